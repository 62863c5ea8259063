#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

// Reduced syntax tree: expressions keep only the parts that branch or create
// functions, statements keep their full control structure.

namespace cjscope::jsmetrics::detail {

struct Function;
struct Stmt;

struct Expr {
    enum class Kind { Sequence, Logical, Conditional, Function };

    Kind kind = Kind::Sequence;
    // Sequence: sub-expressions in evaluation order.
    // Logical: {left, right}. Conditional: {test, consequent, alternate}.
    std::vector<Expr> parts;
    std::shared_ptr<Function> function;

    bool empty() const { return kind == Kind::Sequence && parts.empty(); }
};

struct SwitchCase {
    bool is_default = false;
    Expr test;
    std::vector<Stmt> body;
};

struct Stmt {
    enum class Kind {
        Expression, Var, FunctionDecl, Return, Throw, If, While, DoWhile, For, ForIn,
        Break, Continue, Block, Try, Switch, Labeled, Empty, Debugger, With
    };

    Kind kind = Kind::Empty;
    Expr expr;     // primary expression of the statement, if any
    Expr init;     // For
    Expr update;   // For
    bool has_test = false;     // For
    bool has_else = false;     // If
    bool has_catch = false;    // Try
    bool has_finally = false;  // Try
    std::string label;         // Break, Continue, Labeled
    std::size_t line = 0;      // Break, Continue
    std::size_t column = 0;
    // Block: statements. If: {then, else?}. Loops, With, Labeled: {body}.
    // Try: {block, catch?, finally?}.
    std::vector<Stmt> children;
    std::vector<SwitchCase> cases;
    std::shared_ptr<Function> function;
};

struct Function {
    std::size_t params = 0;
    std::vector<Stmt> body;
};

struct Program {
    Function top;
};

}  // namespace cjscope::jsmetrics::detail
