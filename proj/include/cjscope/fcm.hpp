#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cjscope/dataset.hpp"

namespace cjscope::fcm {

struct DegenerateData : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    bool operator==(const Matrix&) const = default;
};

Matrix to_matrix(const std::vector<jsmetrics::LabeledVector>& rows);

struct Standardized {
    Matrix data;
    std::vector<double> mean;
    std::vector<double> stddev;  // population standard deviation
    std::vector<std::size_t> kept_columns;
    std::vector<std::string> warnings;
};

/// Per-column z-score. Constant columns are dropped with a warning; throws
/// DegenerateData if nothing is left or fewer than two rows are given.
Standardized standardize(const Matrix& data);

struct FitOptions {
    std::size_t clusters = 3;
    double fuzzifier = 2.0;
    double tolerance = 1e-9;
    std::size_t max_iterations = 1000;
    std::uint64_t seed = 1;
};

struct ClusterModel {
    Matrix centers;      // clusters x features
    Matrix memberships;  // points x clusters
    double fuzzifier = 2.0;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    bool converged = false;
    /// Objective after each center update, J(U_{t-1}, V_t); non-increasing.
    std::vector<double> objective_history;

    std::vector<std::size_t> hard_assignment() const;
};

/// One run of fuzzy c-means from a seeded initial partition. The initial
/// membership of a point is derived from its values and the seed, so
/// reordering the input rows reorders the result and nothing else.
ClusterModel fit(const Matrix& data, const FitOptions& options = {});

/// `restarts` runs with seeds options.seed, options.seed + 1, ...; keeps the
/// lowest objective (lowest seed on ties). Runs may execute on `threads`
/// workers (0 = hardware concurrency); the result does not depend on it.
ClusterModel fit_best(const Matrix& data, const FitOptions& options = {}, std::size_t restarts = 20,
                      unsigned threads = 0);

using Confusion = std::array<std::array<std::size_t, 3>, 3>;  // [true class][predicted class]

struct ClassMetrics {
    // one-vs-rest rates, percent
    double false_positive_rate = 0;
    double false_negative_rate = 0;
    double accuracy = 0;  // correct / class size
    // the published table's column convention, percent:
    //   "FPR" = share of the class assigned elsewhere (row miss rate)
    //   "FNR" = share of the predicted class that is wrong (false discovery rate)
    double table_fpr = 0;
    double table_fnr = 0;
};

struct EvaluationReport {
    Confusion confusion{};
    /// cluster index -> class index (ScriptClass order: benign, malicious, cryptojacking)
    std::array<std::size_t, 3> cluster_to_class{0, 1, 2};
    double accuracy = 0;  // percent
    std::array<ClassMetrics, 3> per_class{};
    ClassMetrics total;  // macro averages; total.accuracy is the overall rate
    /// Where the one-vs-rest and table-convention rates disagree.
    std::vector<std::string> divergences;
};

/// Metrics from a confusion matrix whose columns are already classes.
EvaluationReport evaluate_confusion(const Confusion& confusion);

/// Hard-assigns by argmax membership, picks the cluster->class permutation
/// with the largest trace (all 3! checked), then scores.
EvaluationReport evaluate(const ClusterModel& model, const std::vector<dataset::ScriptClass>& labels);

struct Projection {
    Matrix points;      // n x 2
    Matrix components;  // 2 x k, rows are unit loadings
    std::array<double, 2> explained_variance_ratio{};
    std::vector<double> eigenvalues;  // all, descending
};

/// Top-2 principal components of the z-scored data. Each component's
/// largest-magnitude loading is made positive.
Projection project_2d(const Matrix& data);

std::string to_json(const EvaluationReport& report, int indent = 2);
std::string to_json(const ClusterModel& model, int indent = 2);

}  // namespace cjscope::fcm
