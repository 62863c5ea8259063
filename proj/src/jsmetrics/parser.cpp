#include "parser.hpp"

#include <array>
#include <algorithm>
#include <memory>
#include <string>
#include <utility>

namespace cjscope::jsmetrics::detail {
namespace {

Expr sequence(Expr a, Expr b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    Expr out;
    auto append = [&out](Expr e) {
        if (e.kind == Expr::Kind::Sequence) {
            for (auto& p : e.parts) out.parts.push_back(std::move(p));
        } else {
            out.parts.push_back(std::move(e));
        }
    };
    append(std::move(a));
    append(std::move(b));
    return out;
}

Expr logical(Expr left, Expr right) {
    Expr e;
    e.kind = Expr::Kind::Logical;
    e.parts.push_back(std::move(left));
    e.parts.push_back(std::move(right));
    return e;
}

int binary_precedence(const Token& t, bool no_in) {
    if (t.kind == TokenKind::Keyword) {
        if (t.text == "instanceof") return 7;
        if (t.text == "in") return no_in ? 0 : 7;
        return 0;
    }
    if (t.kind != TokenKind::Punctuator) return 0;
    static constexpr std::array<std::pair<std::string_view, int>, 21> table = {{
        {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5},
        {"==", 6}, {"!=", 6}, {"===", 6}, {"!==", 6},
        {"<", 7}, {">", 7}, {"<=", 7}, {">=", 7},
        {"<<", 8}, {">>", 8}, {">>>", 8},
        {"+", 9}, {"-", 9}, {"*", 10}, {"/", 10}, {"%", 10}}};
    for (const auto& [op, prec] : table)
        if (t.text == op) return prec;
    return 0;
}

bool is_assignment_operator(const Token& t) {
    static constexpr std::array<std::string_view, 12> ops = {
        "=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", ">>>=", "&=", "|=", "^="};
    return t.kind == TokenKind::Punctuator &&
           std::find(ops.begin(), ops.end(), t.text) != ops.end();
}

class Parser {
public:
    explicit Parser(std::string_view source) : lex_(source) { cur_ = lex_.next(); }

    ParseResult run() {
        ParseResult result;
        while (cur_.kind != TokenKind::End) result.program.top.body.push_back(statement());
        result.tokens = std::move(tokens_);
        return result;
    }

private:
    // --- token plumbing -------------------------------------------------

    void advance() {
        tokens_.push_back(cur_);
        cur_ = lex_.next();
    }

    void advance_as(TokenKind kind) {
        cur_.kind = kind;
        advance();
    }

    [[noreturn]] void unexpected() const {
        if (cur_.kind == TokenKind::End) lex_.fail("unexpected end of input", cur_.line, cur_.column);
        lex_.fail("unexpected token '" + std::string(cur_.text) + "'", cur_.line, cur_.column);
    }

    void expect(std::string_view punct) {
        if (!cur_.is(punct)) unexpected();
        advance();
    }

    bool eat(std::string_view punct) {
        if (!cur_.is(punct)) return false;
        advance();
        return true;
    }

    Token peek_next() const {
        Lexer copy = lex_;
        return copy.next();
    }

    void consume_semicolon() {
        if (eat(";")) return;
        if (cur_.is("}") || cur_.kind == TokenKind::End || cur_.newline_before) return;
        unexpected();
    }

    void expect_identifier() {
        if (cur_.kind != TokenKind::Identifier) unexpected();
        advance();
    }

    void property_name() {
        if (cur_.kind == TokenKind::Identifier || cur_.kind == TokenKind::Keyword) {
            advance_as(TokenKind::Identifier);
        } else if (cur_.kind == TokenKind::String || cur_.kind == TokenKind::Number) {
            advance();
        } else {
            unexpected();
        }
    }

    bool at_let_declaration() const {
        if (cur_.kind != TokenKind::Identifier || cur_.text != "let") return false;
        const Token next = peek_next();
        return next.kind == TokenKind::Identifier;
    }

    // --- statements -----------------------------------------------------

    Stmt statement() {
        if (cur_.kind == TokenKind::Punctuator) {
            if (cur_.text == "{") return block();
            if (cur_.text == ";") {
                advance();
                return Stmt{};
            }
        }
        if (cur_.kind == TokenKind::Keyword) {
            const std::string_view kw = cur_.text;
            if (kw == "var" || kw == "const") return variable_statement();
            if (kw == "if") return if_statement();
            if (kw == "for") return for_statement();
            if (kw == "while") return while_statement();
            if (kw == "do") return do_while_statement();
            if (kw == "continue" || kw == "break") return jump_statement();
            if (kw == "return") return return_statement();
            if (kw == "throw") return throw_statement();
            if (kw == "try") return try_statement();
            if (kw == "switch") return switch_statement();
            if (kw == "with") return with_statement();
            if (kw == "function") return function_declaration();
            if (kw == "debugger") {
                advance();
                consume_semicolon();
                Stmt s;
                s.kind = Stmt::Kind::Debugger;
                return s;
            }
            if (kw == "class" || kw == "import" || kw == "export" || kw == "enum")
                lex_.fail("'" + std::string(kw) + "' is not supported", cur_.line, cur_.column);
        }
        if (at_let_declaration()) return variable_statement();
        if (cur_.kind == TokenKind::Identifier && peek_next().is(":")) return labeled_statement();
        return expression_statement();
    }

    Stmt block() {
        Stmt s;
        s.kind = Stmt::Kind::Block;
        expect("{");
        while (!cur_.is("}")) {
            if (cur_.kind == TokenKind::End) unexpected();
            s.children.push_back(statement());
        }
        advance();
        return s;
    }

    Expr variable_declarations(bool no_in, std::size_t* count = nullptr) {
        advance_as(TokenKind::Keyword);  // var / let / const
        Expr inits;
        std::size_t n = 0;
        do {
            expect_identifier();
            ++n;
            if (eat("=")) inits = sequence(std::move(inits), assignment(no_in));
        } while (eat(","));
        if (count) *count = n;
        return inits;
    }

    Stmt variable_statement() {
        Stmt s;
        s.kind = Stmt::Kind::Var;
        s.expr = variable_declarations(false);
        consume_semicolon();
        return s;
    }

    Stmt expression_statement() {
        Stmt s;
        s.kind = Stmt::Kind::Expression;
        s.expr = expression(false);
        consume_semicolon();
        return s;
    }

    Stmt labeled_statement() {
        Stmt s;
        s.kind = Stmt::Kind::Labeled;
        s.label = std::string(cur_.text);
        advance();
        expect(":");
        s.children.push_back(statement());
        return s;
    }

    Expr parenthesized() {
        expect("(");
        Expr e = expression(false);
        expect(")");
        return e;
    }

    Stmt if_statement() {
        Stmt s;
        s.kind = Stmt::Kind::If;
        advance();
        s.expr = parenthesized();
        s.children.push_back(statement());
        if (cur_.is("else")) {
            advance();
            s.has_else = true;
            s.children.push_back(statement());
        }
        return s;
    }

    Stmt while_statement() {
        Stmt s;
        s.kind = Stmt::Kind::While;
        advance();
        s.expr = parenthesized();
        s.children.push_back(statement());
        return s;
    }

    Stmt do_while_statement() {
        Stmt s;
        s.kind = Stmt::Kind::DoWhile;
        advance();
        s.children.push_back(statement());
        if (!cur_.is("while")) unexpected();
        advance();
        s.expr = parenthesized();
        eat(";");  // optional even without a line break
        return s;
    }

    Stmt for_statement() {
        Stmt s;
        advance();
        expect("(");
        bool for_in = false;
        if (cur_.is("var") || cur_.is("const") || at_let_declaration()) {
            std::size_t declared = 0;
            s.init = variable_declarations(true, &declared);
            if (cur_.is("in")) {
                if (declared != 1) unexpected();
                for_in = true;
            }
        } else if (!cur_.is(";")) {
            s.init = expression(true);
            for_in = cur_.is("in");
        }
        if (for_in) {
            s.kind = Stmt::Kind::ForIn;
            advance();
            s.expr = sequence(std::move(s.init), expression(false));
            s.init = Expr{};
        } else {
            s.kind = Stmt::Kind::For;
            expect(";");
            if (!cur_.is(";")) {
                s.has_test = true;
                s.expr = expression(false);
            }
            expect(";");
            if (!cur_.is(")")) s.update = expression(false);
        }
        expect(")");
        s.children.push_back(statement());
        return s;
    }

    Stmt jump_statement() {
        Stmt s;
        s.kind = cur_.text == "break" ? Stmt::Kind::Break : Stmt::Kind::Continue;
        s.line = cur_.line;
        s.column = cur_.column;
        advance();
        if (cur_.kind == TokenKind::Identifier && !cur_.newline_before) {
            s.label = std::string(cur_.text);
            advance();
        }
        consume_semicolon();
        return s;
    }

    Stmt return_statement() {
        Stmt s;
        s.kind = Stmt::Kind::Return;
        advance();
        if (!cur_.is(";") && !cur_.is("}") && cur_.kind != TokenKind::End && !cur_.newline_before)
            s.expr = expression(false);
        consume_semicolon();
        return s;
    }

    Stmt throw_statement() {
        Stmt s;
        s.kind = Stmt::Kind::Throw;
        advance();
        if (cur_.newline_before) lex_.fail("line break after throw", cur_.line, cur_.column);
        s.expr = expression(false);
        consume_semicolon();
        return s;
    }

    Stmt try_statement() {
        Stmt s;
        s.kind = Stmt::Kind::Try;
        advance();
        s.children.push_back(block());
        if (cur_.is("catch")) {
            advance();
            expect("(");
            expect_identifier();
            expect(")");
            s.has_catch = true;
            s.children.push_back(block());
        }
        if (cur_.is("finally")) {
            advance();
            s.has_finally = true;
            s.children.push_back(block());
        }
        if (!s.has_catch && !s.has_finally) unexpected();
        return s;
    }

    Stmt switch_statement() {
        Stmt s;
        s.kind = Stmt::Kind::Switch;
        advance();
        s.expr = parenthesized();
        expect("{");
        bool seen_default = false;
        while (!eat("}")) {
            SwitchCase c;
            if (cur_.is("case")) {
                advance();
                c.test = expression(false);
            } else if (cur_.is("default")) {
                if (seen_default) unexpected();
                seen_default = true;
                c.is_default = true;
                advance();
            } else {
                unexpected();
            }
            expect(":");
            while (!cur_.is("case") && !cur_.is("default") && !cur_.is("}")) {
                if (cur_.kind == TokenKind::End) unexpected();
                c.body.push_back(statement());
            }
            s.cases.push_back(std::move(c));
        }
        return s;
    }

    Stmt with_statement() {
        Stmt s;
        s.kind = Stmt::Kind::With;
        advance();
        s.expr = parenthesized();
        s.children.push_back(statement());
        return s;
    }

    Stmt function_declaration() {
        Stmt s;
        s.kind = Stmt::Kind::FunctionDecl;
        advance();
        expect_identifier();
        s.function = function_rest();
        return s;
    }

    // Parameter list and body, starting at `(`.
    std::shared_ptr<Function> function_rest() {
        auto fn = std::make_shared<Function>();
        expect("(");
        if (!cur_.is(")")) {
            do {
                expect_identifier();
                ++fn->params;
            } while (eat(","));
        }
        expect(")");
        fn->body = function_body();
        return fn;
    }

    std::vector<Stmt> function_body() {
        expect("{");
        std::vector<Stmt> body;
        while (!cur_.is("}")) {
            if (cur_.kind == TokenKind::End) unexpected();
            body.push_back(statement());
        }
        advance();
        return body;
    }

    // --- expressions ----------------------------------------------------

    Expr expression(bool no_in) {
        Expr e = assignment(no_in);
        while (eat(",")) e = sequence(std::move(e), assignment(no_in));
        return e;
    }

    bool at_parenthesized_arrow() const {
        // ( [ident {, ident}] ) =>
        Lexer probe = lex_;
        Token t = probe.next();
        if (!t.is(")")) {
            for (;;) {
                if (t.kind != TokenKind::Identifier) return false;
                t = probe.next();
                if (t.is(")")) break;
                if (!t.is(",")) return false;
                t = probe.next();
            }
        }
        const Token arrow = probe.next();
        return arrow.is("=>") && !arrow.newline_before;
    }

    Expr arrow_function(bool no_in) {
        auto fn = std::make_shared<Function>();
        if (cur_.kind == TokenKind::Identifier) {
            advance();
            fn->params = 1;
        } else {
            expect("(");
            if (!cur_.is(")")) {
                do {
                    expect_identifier();
                    ++fn->params;
                } while (eat(","));
            }
            expect(")");
        }
        expect("=>");
        if (cur_.is("{")) {
            fn->body = function_body();
        } else {
            Stmt ret;
            ret.kind = Stmt::Kind::Return;
            ret.expr = assignment(no_in);
            fn->body.push_back(std::move(ret));
        }
        Expr e;
        e.kind = Expr::Kind::Function;
        e.function = std::move(fn);
        return e;
    }

    Expr assignment(bool no_in) {
        if (cur_.kind == TokenKind::Identifier) {
            const Token next = peek_next();
            if (next.is("=>") && !next.newline_before) return arrow_function(no_in);
        } else if (cur_.is("(") && at_parenthesized_arrow()) {
            return arrow_function(no_in);
        }
        Expr left = conditional(no_in);
        if (is_assignment_operator(cur_)) {
            advance();
            // Right-hand side is evaluated before the store.
            left = sequence(std::move(left), assignment(no_in));
        }
        return left;
    }

    Expr conditional(bool no_in) {
        Expr test = binary(1, no_in);
        if (!cur_.is("?")) return test;
        advance();
        Expr e;
        e.kind = Expr::Kind::Conditional;
        e.parts.push_back(std::move(test));
        e.parts.push_back(assignment(false));
        expect(":");
        e.parts.push_back(assignment(no_in));
        return e;
    }

    Expr binary(int min_prec, bool no_in) {
        Expr left = unary();
        for (;;) {
            const int prec = binary_precedence(cur_, no_in);
            if (prec == 0 || prec < min_prec) return left;
            const bool short_circuit = cur_.is("&&") || cur_.is("||");
            advance();
            Expr right = binary(prec + 1, no_in);
            left = short_circuit ? logical(std::move(left), std::move(right))
                                 : sequence(std::move(left), std::move(right));
        }
    }

    Expr unary() {
        if (cur_.kind == TokenKind::Keyword &&
            (cur_.text == "delete" || cur_.text == "void" || cur_.text == "typeof")) {
            advance();
            return unary();
        }
        if (cur_.kind == TokenKind::Punctuator &&
            (cur_.text == "+" || cur_.text == "-" || cur_.text == "!" || cur_.text == "~" ||
             cur_.text == "++" || cur_.text == "--")) {
            advance();
            return unary();
        }
        Expr e = left_hand_side();
        if ((cur_.is("++") || cur_.is("--")) && !cur_.newline_before) advance();
        return e;
    }

    Expr arguments() {
        expect("(");
        Expr args;
        if (!cur_.is(")")) {
            do {
                args = sequence(std::move(args), assignment(false));
            } while (eat(","));
        }
        expect(")");
        return args;
    }

    Expr left_hand_side() {
        Expr e;
        if (cur_.is("new")) {
            advance();
            if (cur_.is("new")) {
                e = left_hand_side();  // new new X()()
            } else {
                e = primary();
                while (cur_.is(".") || cur_.is("[")) e = sequence(std::move(e), member_suffix());
            }
            if (cur_.is("(")) e = sequence(std::move(e), arguments());
        } else {
            e = primary();
        }
        for (;;) {
            if (cur_.is(".") || cur_.is("[")) {
                e = sequence(std::move(e), member_suffix());
            } else if (cur_.is("(")) {
                e = sequence(std::move(e), arguments());
            } else {
                return e;
            }
        }
    }

    Expr member_suffix() {
        if (eat(".")) {
            if (cur_.kind != TokenKind::Identifier && cur_.kind != TokenKind::Keyword) unexpected();
            advance_as(TokenKind::Identifier);
            return Expr{};
        }
        expect("[");
        Expr e = expression(false);
        expect("]");
        return e;
    }

    Expr primary() {
        switch (cur_.kind) {
            case TokenKind::Identifier:
            case TokenKind::Number:
            case TokenKind::String:
            case TokenKind::Regex:
                advance();
                return Expr{};
            case TokenKind::Keyword:
                if (cur_.text == "this" || cur_.text == "null" || cur_.text == "true" ||
                    cur_.text == "false") {
                    advance();
                    return Expr{};
                }
                if (cur_.text == "function") {
                    advance();
                    if (cur_.kind == TokenKind::Identifier) advance();
                    Expr e;
                    e.kind = Expr::Kind::Function;
                    e.function = function_rest();
                    return e;
                }
                unexpected();
            case TokenKind::Punctuator:
                if (cur_.text == "/" || cur_.text == "/=") {
                    cur_ = lex_.rescan_as_regex(cur_);
                    advance();
                    return Expr{};
                }
                if (cur_.text == "(") return parenthesized();
                if (cur_.text == "[") return array_literal();
                if (cur_.text == "{") return object_literal();
                unexpected();
            case TokenKind::End:
                unexpected();
        }
        unexpected();
    }

    Expr array_literal() {
        expect("[");
        Expr e;
        while (!eat("]")) {
            if (eat(",")) continue;  // hole
            e = sequence(std::move(e), assignment(false));
            if (!cur_.is("]")) expect(",");
        }
        return e;
    }

    Expr object_literal() {
        expect("{");
        Expr e;
        while (!eat("}")) {
            const bool accessor = cur_.kind == TokenKind::Identifier &&
                                  (cur_.text == "get" || cur_.text == "set") && [&] {
                                      const Token next = peek_next();
                                      return !next.is(":") && !next.is(",") && !next.is("}") &&
                                             !next.is("(");
                                  }();
            if (accessor) {
                advance_as(TokenKind::Keyword);
                property_name();
                Expr fn;
                fn.kind = Expr::Kind::Function;
                fn.function = function_rest();
                e = sequence(std::move(e), std::move(fn));
            } else {
                property_name();
                expect(":");
                e = sequence(std::move(e), assignment(false));
            }
            if (!cur_.is("}")) expect(",");
        }
        return e;
    }

    Lexer lex_;
    Token cur_;
    std::vector<Token> tokens_;
};

}  // namespace

ParseResult parse(std::string_view source) { return Parser(source).run(); }

}  // namespace cjscope::jsmetrics::detail
