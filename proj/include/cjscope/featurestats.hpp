#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cjscope/jsmetrics.hpp"

namespace cjscope::featurestats {

struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InsufficientRows : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct SchemaMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Pearson's rho. Returns nullopt when either input has zero variance.
/// Throws LengthMismatch when sizes differ or fewer than two samples.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
    std::vector<std::string> feature_names;
    std::vector<double> values;  // row-major k*k
    /// One entry per zero-variance feature that had to be filled in.
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return feature_names.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
};

/// Correlation of every feature pair over the rows of one class. Cells that
/// involve a constant feature are 0 off the diagonal and 1 on it.
CorrelationMatrix class_correlation(const std::vector<std::vector<double>>& rows,
                                    std::vector<std::string> feature_names);
CorrelationMatrix class_correlation(const std::vector<jsmetrics::FeatureVector>& rows);

enum class Strategy {
    /// keep k iff (C-M) > (M-B) and (C-B) > (M-B) on signed column means
    Conjunctive,
    /// same test on column means of |rho|
    ConjunctiveMagnitude,
};

std::string_view to_string(Strategy s);
/// Throws std::invalid_argument for unknown names.
Strategy parse_strategy(std::string_view name);

struct SelectionOptions {
    Strategy strategy = Strategy::Conjunctive;
    bool exclude_diagonal = false;
};

struct FeatureSelection {
    std::vector<std::string> feature_names;
    std::vector<std::string> selected;
    std::vector<std::size_t> selected_indices;
    std::vector<double> c_mean, m_mean, b_mean;
    Strategy strategy = Strategy::Conjunctive;
    bool exclude_diagonal = false;

    bool contains(std::string_view name) const;
};

/// Selects the features that separate the cryptojacking class C from the
/// malicious (M) and benign (B) classes. Throws SchemaMismatch when the three
/// matrices disagree on feature names or order.
FeatureSelection select_features(const CorrelationMatrix& c, const CorrelationMatrix& m,
                                 const CorrelationMatrix& b, SelectionOptions options = {});

/// Square CSV: header "feature,<names...>", then one row per feature.
std::string to_csv(const CorrelationMatrix& m);
/// Inverse of to_csv; throws std::invalid_argument on malformed input.
CorrelationMatrix correlation_from_csv(std::string_view csv);

std::string to_json(const FeatureSelection& s, int indent = 2);

}  // namespace cjscope::featurestats
