#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cjscope::jsmetrics {

/// Raised for any source text outside the supported grammar (ES5 plus arrow
/// functions, `let` and `const`). Carries the 1-based position of the
/// offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct TokenAccounting {
    std::size_t distinct_operators = 0;  // eta1
    std::size_t distinct_operands = 0;   // eta2
    std::size_t total_operators = 0;     // n1
    std::size_t total_operands = 0;      // n2

    bool operator==(const TokenAccounting&) const = default;
};

struct CfgSummary {
    std::size_t edges = 0;
    std::size_t nodes = 0;
    std::size_t components = 0;
    /// Cyclomatic complexity of each component; index 0 is top-level code,
    /// the rest follow functions breadth-first by nesting depth, then source order.
    std::vector<std::size_t> per_component;

    std::size_t cyclomatic() const noexcept { return edges + 2 * components - nodes; }

    bool operator==(const CfgSummary&) const = default;
};

struct LineCounts {
    std::size_t logical_lines = 0;
    std::size_t source_lines = 0;
    std::size_t physical_lines = 0;
    std::size_t parameter_count = 0;

    bool operator==(const LineCounts&) const = default;
};

/// The 17 static features of one script, in the column order of the
/// published feature table.
struct FeatureVector {
    double cyclomatic = 0;          // M
    double cyclomatic_density = 0;  // M_d = 100 M / sloc, percent
    double bugs = 0;                // B
    double difficulty = 0;          // D
    double effort = 0;              // E_h
    double logical_lines = 0;       // c_l
    double time = 0;                // T_h, seconds
    double vocabulary = 0;          // eta
    double volume = 0;              // V
    double distinct_operators = 0;  // eta1
    double total_operators = 0;     // n1
    double distinct_operands = 0;   // eta2
    double total_operands = 0;      // n2
    double params = 0;
    double sloc = 0;
    double physical = 0;
    double maintainability = 0;     // M_s, 0..100

    static constexpr std::size_t size = 17;

    std::array<double, size> values() const;
    static FeatureVector from_values(const std::array<double, size>& v);

    bool operator==(const FeatureVector&) const = default;
};

/// Canonical CSV column names, same order as FeatureVector::values().
const std::array<std::string_view, FeatureVector::size>& feature_names();

struct Analysis {
    TokenAccounting tokens;
    CfgSummary cfg;
    LineCounts lines;
    FeatureVector features;
};

TokenAccounting tokenize_and_count(std::string_view source);
CfgSummary build_cfg_summary(std::string_view source);
LineCounts count_lines(std::string_view source);
FeatureVector compute_features(std::string_view source);

/// Single parse producing every intermediate result.
Analysis analyze(std::string_view source);

/// Derives the Halstead, density and maintainability fields from the raw
/// counts. Exposed so table rows and parsed scripts share one formula path.
FeatureVector derive_features(const TokenAccounting& tokens, std::size_t cyclomatic,
                              const LineCounts& lines);

/// 100 * (171 - 5.2 ln V - 0.23 M - 16.2 ln c_l) / 171, clamped to [0, 100];
/// logarithms of non-positive arguments contribute 0.
double maintainability_score(double volume, double cyclomatic, double logical_lines);

using LabeledVector = std::pair<std::string, FeatureVector>;

/// RFC 4180 CSV with the 17 feature columns followed by `label`.
std::string export_feature_matrix(const std::vector<LabeledVector>& vectors);

/// Inverse of export_feature_matrix. Throws std::invalid_argument on a
/// malformed header or row.
std::vector<LabeledVector> import_feature_matrix(std::string_view csv);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace cjscope::jsmetrics
