#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "cfg.hpp"
#include "common/csv.hpp"
#include "cjscope/jsmetrics.hpp"
#include "parser.hpp"

// Token classification (Halstead):
//   operands  - identifiers (including property names), numeric, string and
//               regex literals, and the value keywords this/null/true/false
//   operators - every other keyword and punctuator; bracket pairs count once,
//               keyed on the opening bracket as "()", "[]" and "{}"
//   ignored   - closing brackets and the statement terminator `;`
// Operands are distinguished by their exact source text, so 'a' and "a" are
// two different operands.

namespace cjscope::jsmetrics {
namespace {

using detail::Token;
using detail::TokenKind;

bool is_value_keyword(std::string_view t) {
    return t == "this" || t == "null" || t == "true" || t == "false";
}

TokenAccounting count_tokens(const std::vector<Token>& tokens) {
    std::set<std::string, std::less<>> operators;
    std::set<std::string, std::less<>> operands;
    TokenAccounting acc;
    for (const auto& t : tokens) {
        switch (t.kind) {
            case TokenKind::Identifier:
            case TokenKind::Number:
            case TokenKind::String:
            case TokenKind::Regex:
                operands.emplace(t.text);
                ++acc.total_operands;
                break;
            case TokenKind::Keyword:
                if (is_value_keyword(t.text)) {
                    operands.emplace(t.text);
                    ++acc.total_operands;
                } else {
                    operators.emplace(t.text);
                    ++acc.total_operators;
                }
                break;
            case TokenKind::Punctuator: {
                const auto p = t.text;
                if (p == ")" || p == "]" || p == "}" || p == ";") break;
                if (p == "(") operators.emplace("()");
                else if (p == "[") operators.emplace("[]");
                else if (p == "{") operators.emplace("{}");
                else operators.emplace(p);
                ++acc.total_operators;
                break;
            }
            case TokenKind::End:
                break;
        }
    }
    acc.distinct_operators = operators.size();
    acc.distinct_operands = operands.size();
    return acc;
}

CfgSummary summarize(const std::vector<detail::FlowGraph>& graphs) {
    CfgSummary s;
    s.components = graphs.size();
    for (const auto& g : graphs) {
        s.nodes += g.nodes;
        s.edges += g.edges.size();
        s.per_component.push_back(g.edges.size() + 2 - g.nodes);
    }
    return s;
}

std::size_t walk(const detail::Stmt& s, std::size_t& params);

std::size_t count_function(const detail::Function& fn, std::size_t& params) {
    params += fn.params;
    std::size_t n = 0;
    for (const auto& s : fn.body) n += walk(s, params);
    return n;
}

std::size_t count_expr_functions(const detail::Expr& e, std::size_t& params) {
    if (e.kind == detail::Expr::Kind::Function) return count_function(*e.function, params);
    std::size_t n = 0;
    for (const auto& p : e.parts) n += count_expr_functions(p, params);
    return n;
}

// Walks the tree once, returning logical statements and accumulating the
// parameter count of every function reached.
std::size_t walk(const detail::Stmt& s, std::size_t& params) {
    using K = detail::Stmt::Kind;
    std::size_t n = (s.kind == K::Block || s.kind == K::Empty) ? 0 : 1;
    if (s.function) n += count_function(*s.function, params);
    n += count_expr_functions(s.expr, params);
    n += count_expr_functions(s.init, params);
    n += count_expr_functions(s.update, params);
    for (const auto& c : s.children) n += walk(c, params);
    for (const auto& c : s.cases) {
        n += count_expr_functions(c.test, params);
        for (const auto& b : c.body) n += walk(b, params);
    }
    return n;
}

LineCounts lines_of(std::string_view source, const detail::ParseResult& parsed) {
    LineCounts lc;
    if (!source.empty()) {
        lc.physical_lines = static_cast<std::size_t>(std::count(source.begin(), source.end(), '\n'));
        if (source.back() != '\n') ++lc.physical_lines;
    }
    std::size_t last = 0;
    for (const auto& t : parsed.tokens) {
        const auto first = std::max(t.line, last + 1);
        if (t.end_line >= first) lc.source_lines += t.end_line - first + 1;
        last = std::max(last, t.end_line);
    }
    std::size_t params = 0;
    lc.logical_lines = count_function(parsed.program.top, params);
    lc.parameter_count = params;
    return lc;
}

}  // namespace

std::array<double, FeatureVector::size> FeatureVector::values() const {
    return {cyclomatic, cyclomatic_density, bugs, difficulty, effort, logical_lines,
            time, vocabulary, volume, distinct_operators, total_operators,
            distinct_operands, total_operands, params, sloc, physical, maintainability};
}

FeatureVector FeatureVector::from_values(const std::array<double, size>& v) {
    FeatureVector f;
    f.cyclomatic = v[0];
    f.cyclomatic_density = v[1];
    f.bugs = v[2];
    f.difficulty = v[3];
    f.effort = v[4];
    f.logical_lines = v[5];
    f.time = v[6];
    f.vocabulary = v[7];
    f.volume = v[8];
    f.distinct_operators = v[9];
    f.total_operators = v[10];
    f.distinct_operands = v[11];
    f.total_operands = v[12];
    f.params = v[13];
    f.sloc = v[14];
    f.physical = v[15];
    f.maintainability = v[16];
    return f;
}

const std::array<std::string_view, FeatureVector::size>& feature_names() {
    static constexpr std::array<std::string_view, FeatureVector::size> names = {
        "M", "M_d", "B", "D", "E_h", "c_l", "T_h", "eta", "V",
        "eta1", "n1", "eta2", "n2", "params", "sloc", "physical", "M_s"};
    return names;
}

double maintainability_score(double volume, double cyclomatic, double logical_lines) {
    const double ln_v = volume > 0 ? std::log(volume) : 0.0;
    const double ln_c = logical_lines > 0 ? std::log(logical_lines) : 0.0;
    const double raw = 100.0 * (171.0 - 5.2 * ln_v - 0.23 * cyclomatic - 16.2 * ln_c) / 171.0;
    return std::clamp(raw, 0.0, 100.0);
}

FeatureVector derive_features(const TokenAccounting& tokens, std::size_t cyclomatic,
                              const LineCounts& lines) {
    FeatureVector f;
    f.distinct_operators = static_cast<double>(tokens.distinct_operators);
    f.distinct_operands = static_cast<double>(tokens.distinct_operands);
    f.total_operators = static_cast<double>(tokens.total_operators);
    f.total_operands = static_cast<double>(tokens.total_operands);
    f.vocabulary = f.distinct_operators + f.distinct_operands;
    const double length = f.total_operators + f.total_operands;
    f.volume = f.vocabulary > 0 ? length * std::log2(f.vocabulary) : 0.0;
    f.difficulty = f.distinct_operands > 0
                       ? (f.distinct_operators / 2.0) * (f.total_operands / f.distinct_operands)
                       : 0.0;
    f.effort = f.difficulty * f.volume;
    f.time = f.effort / 18.0;
    f.bugs = std::pow(f.effort, 2.0 / 3.0) / 3000.0;

    f.cyclomatic = static_cast<double>(cyclomatic);
    f.logical_lines = static_cast<double>(lines.logical_lines);
    f.params = static_cast<double>(lines.parameter_count);
    f.sloc = static_cast<double>(lines.source_lines);
    // Density is spread over source lines, not logical statements; this is
    // what the published feature rows satisfy (e.g. 131 / 476 -> 27.5).
    f.cyclomatic_density = lines.source_lines > 0 ? 100.0 * f.cyclomatic / f.sloc : 0.0;
    f.physical = static_cast<double>(lines.physical_lines);
    f.maintainability = maintainability_score(f.volume, f.cyclomatic, f.logical_lines);
    return f;
}

Analysis analyze(std::string_view source) {
    const auto parsed = detail::parse(source);
    Analysis a;
    a.tokens = count_tokens(parsed.tokens);
    a.cfg = summarize(detail::build_flow_graphs(parsed.program));
    a.lines = lines_of(source, parsed);
    a.features = derive_features(a.tokens, a.cfg.cyclomatic(), a.lines);
    return a;
}

TokenAccounting tokenize_and_count(std::string_view source) {
    return count_tokens(detail::parse(source).tokens);
}

CfgSummary build_cfg_summary(std::string_view source) {
    return summarize(detail::build_flow_graphs(detail::parse(source).program));
}

LineCounts count_lines(std::string_view source) {
    return lines_of(source, detail::parse(source));
}

FeatureVector compute_features(std::string_view source) { return analyze(source).features; }

// --- CSV -----------------------------------------------------------------

std::string format_number(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, end);
}

std::string export_feature_matrix(const std::vector<LabeledVector>& vectors) {
    std::string out;
    for (const auto& name : feature_names()) {
        out += name;
        out += ',';
    }
    out += "label\n";
    for (const auto& [label, fv] : vectors) {
        for (double v : fv.values()) {
            out += format_number(v);
            out += ',';
        }
        csv::write_field(out, label);
        out += '\n';
    }
    return out;
}

std::vector<LabeledVector> import_feature_matrix(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw std::invalid_argument("csv: missing header");
    const auto& header = rows.front();
    const auto& names = feature_names();
    if (header.size() != names.size() + 1 || header.back() != "label" ||
        !std::equal(names.begin(), names.end(), header.begin()))
        throw std::invalid_argument("csv: header does not match the feature schema");

    std::vector<LabeledVector> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            std::ostringstream msg;
            msg << "csv: row " << r << " has " << row.size() << " fields, expected " << header.size();
            throw std::invalid_argument(msg.str());
        }
        std::array<double, FeatureVector::size> v{};
        for (std::size_t c = 0; c < v.size(); ++c)
            v[c] = csv::parse_double(row[c], "row " + std::to_string(r) + " column " + std::to_string(c + 1));
        out.emplace_back(row.back(), FeatureVector::from_values(v));
    }
    return out;
}

}  // namespace cjscope::jsmetrics
