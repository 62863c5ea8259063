#include "cfg.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "cjscope/jsmetrics.hpp"

namespace cjscope::jsmetrics::detail {
namespace {

struct JumpTarget {
    std::vector<std::string> labels;
    bool loop = false;
    bool switch_ = false;
    std::vector<std::size_t> breaks;
    std::vector<std::size_t> continues;

    bool has_label(const std::string& l) const {
        return std::find(labels.begin(), labels.end(), l) != labels.end();
    }
};

class Builder {
public:
    explicit Builder(std::deque<const Function*>& pending) : pending_(pending) {}

    FlowGraph build(const Function& fn) {
        graph_.entry = new_node();
        frontier_ = {graph_.entry};
        statements(fn.body);
        graph_.exit = new_node();
        for (auto n : frontier_) edge(n, graph_.exit);
        for (auto n : exits_) edge(n, graph_.exit);
        return std::move(graph_);
    }

private:
    std::size_t new_node() { return graph_.nodes++; }
    void edge(std::size_t from, std::size_t to) { graph_.edges.emplace_back(from, to); }

    // New node reached from every node in the frontier.
    std::size_t begin() {
        const auto n = new_node();
        for (auto f : frontier_) edge(f, n);
        frontier_ = {n};
        return n;
    }

    void join() {
        const auto j = new_node();
        for (auto f : frontier_) edge(f, j);
        frontier_ = {j};
    }

    void expression(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::Sequence:
                for (const auto& p : e.parts) expression(p);
                break;
            case Expr::Kind::Function:
                pending_.push_back(e.function.get());
                break;
            case Expr::Kind::Logical: {
                expression(e.parts[0]);
                auto skip = frontier_;
                begin();
                expression(e.parts[1]);
                frontier_.insert(frontier_.end(), skip.begin(), skip.end());
                join();
                break;
            }
            case Expr::Kind::Conditional: {
                expression(e.parts[0]);
                const auto test = frontier_;
                begin();
                expression(e.parts[1]);
                auto taken = frontier_;
                frontier_ = test;
                begin();
                expression(e.parts[2]);
                frontier_.insert(frontier_.end(), taken.begin(), taken.end());
                join();
                break;
            }
        }
    }

    void statements(const std::vector<Stmt>& list) {
        for (const auto& s : list) statement(s);
    }

    JumpTarget& push_target(bool loop, bool is_switch) {
        targets_.emplace_back();
        auto& t = targets_.back();
        t.loop = loop;
        t.switch_ = is_switch;
        t.labels = std::move(pending_labels_);
        pending_labels_.clear();
        return t;
    }

    JumpTarget pop_target() {
        JumpTarget t = std::move(targets_.back());
        targets_.pop_back();
        return t;
    }

    JumpTarget* find_target(const Stmt& s) {
        const bool is_break = s.kind == Stmt::Kind::Break;
        for (auto it = targets_.rbegin(); it != targets_.rend(); ++it) {
            if (!s.label.empty()) {
                if (it->has_label(s.label) && (is_break || it->loop)) return &*it;
            } else if (it->loop || (is_break && it->switch_)) {
                return &*it;
            }
        }
        throw ParseError(std::string("illegal ") + (is_break ? "break" : "continue") +
                             (s.label.empty() ? "" : " " + s.label),
                         s.line, s.column);
    }

    void body_of_loop(const Stmt& s, std::size_t decision) {
        frontier_ = {decision};
        statement(s.children.front());
    }

    void statement(const Stmt& s) {
        using K = Stmt::Kind;
        switch (s.kind) {
            case K::Empty:
                break;
            case K::FunctionDecl:
                pending_.push_back(s.function.get());
                break;
            case K::Expression:
            case K::Var:
            case K::Debugger:
                begin();
                expression(s.expr);
                break;
            case K::Return:
            case K::Throw:
                begin();
                expression(s.expr);
                exits_.insert(exits_.end(), frontier_.begin(), frontier_.end());
                frontier_.clear();
                break;
            case K::Block:
                statements(s.children);
                break;
            case K::If: {
                begin();
                expression(s.expr);
                const auto test = frontier_;
                statement(s.children[0]);
                auto then_end = frontier_;
                frontier_ = test;
                if (s.has_else) statement(s.children[1]);
                frontier_.insert(frontier_.end(), then_end.begin(), then_end.end());
                break;
            }
            case K::While:
            case K::ForIn: {
                push_target(true, false);
                const auto head = begin();
                expression(s.expr);
                const auto decision = frontier_.front();
                body_of_loop(s, decision);
                auto t = pop_target();
                for (auto f : frontier_) edge(f, head);
                for (auto c : t.continues) edge(c, head);
                frontier_ = {decision};
                frontier_.insert(frontier_.end(), t.breaks.begin(), t.breaks.end());
                break;
            }
            case K::DoWhile: {
                push_target(true, false);
                const auto head = begin();
                statement(s.children.front());
                auto t = pop_target();
                frontier_.insert(frontier_.end(), t.continues.begin(), t.continues.end());
                begin();
                expression(s.expr);
                const auto decision = frontier_.front();
                edge(decision, head);
                frontier_ = {decision};
                frontier_.insert(frontier_.end(), t.breaks.begin(), t.breaks.end());
                break;
            }
            case K::For: {
                begin();
                expression(s.init);
                push_target(true, false);
                const auto head = begin();
                expression(s.expr);
                const auto decision = frontier_.front();
                body_of_loop(s, decision);
                auto t = pop_target();
                frontier_.insert(frontier_.end(), t.continues.begin(), t.continues.end());
                if (!s.update.empty()) {
                    begin();
                    expression(s.update);
                }
                for (auto f : frontier_) edge(f, head);
                frontier_ = {decision};
                frontier_.insert(frontier_.end(), t.breaks.begin(), t.breaks.end());
                break;
            }
            case K::Break:
            case K::Continue: {
                const auto n = begin();
                auto* target = find_target(s);
                (s.kind == K::Break ? target->breaks : target->continues).push_back(n);
                frontier_.clear();
                break;
            }
            case K::Switch: {
                begin();
                expression(s.expr);
                const auto dispatch = frontier_.front();
                push_target(false, true);
                std::vector<std::size_t> fallthrough;
                bool has_default = false;
                for (const auto& c : s.cases) {
                    has_default = has_default || c.is_default;
                    frontier_ = fallthrough;
                    frontier_.push_back(dispatch);
                    begin();
                    expression(c.test);
                    statements(c.body);
                    fallthrough = frontier_;
                }
                auto t = pop_target();
                frontier_ = fallthrough;
                if (!has_default) frontier_.push_back(dispatch);
                frontier_.insert(frontier_.end(), t.breaks.begin(), t.breaks.end());
                break;
            }
            case K::Try: {
                const auto guard = begin();
                statement(s.children[0]);
                std::size_t next = 1;
                if (s.has_catch) {
                    auto after_try = frontier_;
                    frontier_ = {guard};
                    begin();
                    statement(s.children[next++]);
                    frontier_.insert(frontier_.end(), after_try.begin(), after_try.end());
                }
                if (s.has_finally) {
                    begin();
                    statement(s.children[next]);
                }
                break;
            }
            case K::With:
                begin();
                expression(s.expr);
                statement(s.children.front());
                break;
            case K::Labeled: {
                pending_labels_.push_back(s.label);
                const auto& child = s.children.front();
                const bool owns = child.kind == K::While || child.kind == K::DoWhile ||
                                  child.kind == K::For || child.kind == K::ForIn ||
                                  child.kind == K::Switch || child.kind == K::Labeled;
                if (owns) {
                    statement(child);
                } else {
                    push_target(false, false);
                    statement(child);
                    auto t = pop_target();
                    frontier_.insert(frontier_.end(), t.breaks.begin(), t.breaks.end());
                }
                break;
            }
        }
    }

    std::deque<const Function*>& pending_;
    FlowGraph graph_;
    std::vector<std::size_t> frontier_;
    std::vector<std::size_t> exits_;
    std::vector<JumpTarget> targets_;
    std::vector<std::string> pending_labels_;
};

}  // namespace

std::vector<FlowGraph> build_flow_graphs(const Program& program) {
    std::vector<FlowGraph> graphs;
    std::deque<const Function*> pending{&program.top};
    while (!pending.empty()) {
        const Function* fn = pending.front();
        pending.pop_front();
        graphs.push_back(Builder(pending).build(*fn));
    }
    return graphs;
}

}  // namespace cjscope::jsmetrics::detail
