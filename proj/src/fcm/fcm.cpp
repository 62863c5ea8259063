#include "cjscope/fcm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace cjscope::fcm {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols) throw LengthMismatch("matrix rows have different lengths");
        std::copy(rows[r].begin(), rows[r].end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
    }
    return m;
}

Matrix to_matrix(const std::vector<jsmetrics::LabeledVector>& rows) {
    Matrix m(rows.size(), jsmetrics::FeatureVector::size);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto v = rows[r].second.values();
        std::copy(v.begin(), v.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
    }
    return m;
}

Standardized standardize(const Matrix& data) {
    if (data.rows < 2) throw DegenerateData("standardize: need at least two rows");
    Standardized s;
    const double n = static_cast<double>(data.rows);
    std::vector<double> mean(data.cols, 0.0), sd(data.cols, 0.0);
    for (std::size_t c = 0; c < data.cols; ++c) {
        for (std::size_t r = 0; r < data.rows; ++r) mean[c] += data(r, c);
        mean[c] /= n;
        for (std::size_t r = 0; r < data.rows; ++r) sd[c] += (data(r, c) - mean[c]) * (data(r, c) - mean[c]);
        sd[c] = std::sqrt(sd[c] / n);
        if (sd[c] > 0) {
            s.kept_columns.push_back(c);
        } else {
            s.warnings.push_back("column " + std::to_string(c) + " is constant and was dropped");
        }
    }
    if (s.kept_columns.empty()) throw DegenerateData("standardize: every column is constant");

    s.data = Matrix(data.rows, s.kept_columns.size());
    for (std::size_t j = 0; j < s.kept_columns.size(); ++j) {
        const auto c = s.kept_columns[j];
        s.mean.push_back(mean[c]);
        s.stddev.push_back(sd[c]);
        for (std::size_t r = 0; r < data.rows; ++r) s.data(r, j) = (data(r, c) - mean[c]) / sd[c];
    }
    return s;
}

std::vector<std::size_t> ClusterModel::hard_assignment() const {
    std::vector<std::size_t> out(memberships.rows);
    for (std::size_t i = 0; i < memberships.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < memberships.cols; ++c)
            if (memberships(i, c) > memberships(i, best)) best = c;
        out[i] = best;
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Hashes the row quantized to 2^-20 so that round-off from an upstream
// rescale or reordering does not change the starting partition.
std::uint64_t row_hash(const Matrix& data, std::size_t r) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (std::size_t c = 0; c < data.cols; ++c) {
        const auto q = static_cast<std::int64_t>(std::llround(data(r, c) * 1048576.0));
        unsigned char bytes[sizeof q];
        std::memcpy(bytes, &q, sizeof q);
        for (unsigned char b : bytes) h = (h ^ b) * 0x100000001b3ULL;
    }
    return h;
}

Matrix initial_memberships(const Matrix& data, std::size_t clusters, std::uint64_t seed) {
    Matrix u(data.rows, clusters);
    const auto seed_mix = splitmix64(seed);
    for (std::size_t i = 0; i < data.rows; ++i) {
        const auto h = row_hash(data, i) ^ seed_mix;
        double sum = 0;
        for (std::size_t c = 0; c < clusters; ++c) {
            const auto x = splitmix64(h + 0x632be59bd9b4e019ULL * (c + 1));
            u(i, c) = (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
            sum += u(i, c);
        }
        for (std::size_t c = 0; c < clusters; ++c) u(i, c) /= sum;
    }
    return u;
}

double squared_distance(const Matrix& data, std::size_t i, const Matrix& centers, std::size_t c) {
    double d = 0;
    for (std::size_t f = 0; f < data.cols; ++f) {
        const double diff = data(i, f) - centers(c, f);
        d += diff * diff;
    }
    return d;
}

void update_centers(const Matrix& data, const Matrix& u, double m, Matrix& centers) {
    for (std::size_t c = 0; c < centers.rows; ++c) {
        double weight = 0;
        std::fill_n(centers.data.begin() + static_cast<std::ptrdiff_t>(c * centers.cols), centers.cols, 0.0);
        for (std::size_t i = 0; i < data.rows; ++i) {
            const double w = std::pow(u(i, c), m);
            weight += w;
            for (std::size_t f = 0; f < data.cols; ++f) centers(c, f) += w * data(i, f);
        }
        if (weight > 0)
            for (std::size_t f = 0; f < data.cols; ++f) centers(c, f) /= weight;
    }
}

double objective(const Matrix& data, const Matrix& u, const Matrix& centers, double m) {
    double j = 0;
    for (std::size_t i = 0; i < data.rows; ++i)
        for (std::size_t c = 0; c < centers.rows; ++c)
            j += std::pow(u(i, c), m) * squared_distance(data, i, centers, c);
    return j;
}

void update_memberships(const Matrix& data, const Matrix& centers, double m, Matrix& u) {
    const double exponent = 1.0 / (m - 1.0);
    std::vector<double> d2(centers.rows);
    for (std::size_t i = 0; i < data.rows; ++i) {
        std::size_t zero = 0;
        for (std::size_t c = 0; c < centers.rows; ++c) {
            d2[c] = squared_distance(data, i, centers, c);
            if (d2[c] == 0) ++zero;
        }
        if (zero > 0) {
            // the point sits on one or more centers: share membership among them
            for (std::size_t c = 0; c < centers.rows; ++c) u(i, c) = d2[c] == 0 ? 1.0 / zero : 0.0;
            continue;
        }
        for (std::size_t c = 0; c < centers.rows; ++c) {
            double s = 0;
            for (std::size_t j = 0; j < centers.rows; ++j) s += std::pow(d2[c] / d2[j], exponent);
            u(i, c) = 1.0 / s;
        }
    }
}

}  // namespace

ClusterModel fit(const Matrix& data, const FitOptions& options) {
    const std::size_t n = data.rows, k = options.clusters;
    if (k < 2) throw std::invalid_argument("fit: need at least two clusters");
    if (n < k) throw std::invalid_argument("fit: fewer points than clusters");
    if (!(options.fuzzifier > 1.0)) throw std::invalid_argument("fit: fuzzifier must exceed 1");
    if (data.cols == 0) throw DegenerateData("fit: data has no features");

    ClusterModel model;
    model.fuzzifier = options.fuzzifier;
    model.seed = options.seed;
    model.memberships = initial_memberships(data, k, options.seed);
    model.centers = Matrix(k, data.cols);

    for (std::size_t t = 1; t <= options.max_iterations; ++t) {
        update_centers(data, model.memberships, options.fuzzifier, model.centers);
        const double j = objective(data, model.memberships, model.centers, options.fuzzifier);
        update_memberships(data, model.centers, options.fuzzifier, model.memberships);
        model.iterations = t;
        const bool settled = !model.objective_history.empty() &&
                             std::fabs(model.objective_history.back() - j) < options.tolerance;
        model.objective_history.push_back(j);
        if (settled) {
            model.converged = true;
            break;
        }
    }
    model.objective = objective(data, model.memberships, model.centers, options.fuzzifier);
    return model;
}

ClusterModel fit_best(const Matrix& data, const FitOptions& options, std::size_t restarts,
                      unsigned threads) {
    if (restarts == 0) throw std::invalid_argument("fit_best: need at least one restart");
    std::vector<ClusterModel> runs(restarts);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < restarts;) {
            FitOptions o = options;
            o.seed = options.seed + r;
            runs[r] = fit(data, o);
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, restarts));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (runs[r].objective < runs[best].objective) best = r;
    return std::move(runs[best]);
}

EvaluationReport evaluate_confusion(const Confusion& confusion) {
    EvaluationReport rep;
    rep.confusion = confusion;
    std::size_t n = 0, trace = 0;
    std::array<std::size_t, 3> row{}, col{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            n += confusion[i][j];
            row[i] += confusion[i][j];
            col[j] += confusion[i][j];
            if (i == j) trace += confusion[i][j];
        }
    auto pct = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
    };
    for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t tp = confusion[c][c];
        const std::size_t fn = row[c] - tp;
        const std::size_t fp = col[c] - tp;
        const std::size_t tn = n - tp - fn - fp;
        auto& m = rep.per_class[c];
        m.false_positive_rate = pct(fp, fp + tn);
        m.false_negative_rate = pct(fn, fn + tp);
        m.accuracy = pct(tp, row[c]);
        m.table_fpr = pct(fn, row[c]);
        m.table_fnr = pct(fp, col[c]);

        const auto name = std::string(dataset::to_string(dataset::all_classes[c]));
        auto flag = [&](const char* what, double standard, double table) {
            if (std::fabs(standard - table) > 1e-9) {
                std::ostringstream s;
                s << name << ": one-vs-rest " << what << " " << standard << " vs table-convention "
                  << table;
                rep.divergences.push_back(s.str());
            }
        };
        flag("FPR", m.false_positive_rate, m.table_fpr);
        flag("FNR", m.false_negative_rate, m.table_fnr);
    }
    for (const auto& m : rep.per_class) {
        rep.total.false_positive_rate += m.false_positive_rate / 3;
        rep.total.false_negative_rate += m.false_negative_rate / 3;
        rep.total.table_fpr += m.table_fpr / 3;
        rep.total.table_fnr += m.table_fnr / 3;
    }
    rep.accuracy = pct(trace, n);
    rep.total.accuracy = rep.accuracy;
    return rep;
}

EvaluationReport evaluate(const ClusterModel& model, const std::vector<dataset::ScriptClass>& labels) {
    if (labels.size() != model.memberships.rows)
        throw LengthMismatch("evaluate: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(model.memberships.rows) + " points");
    if (model.memberships.cols != 3) throw std::invalid_argument("evaluate: model must have 3 clusters");

    const auto assignment = model.hard_assignment();
    Confusion by_cluster{};  // [class][cluster]
    for (std::size_t i = 0; i < labels.size(); ++i)
        ++by_cluster[static_cast<std::size_t>(labels[i])][assignment[i]];

    std::array<std::size_t, 3> perm{0, 1, 2}, best_perm = perm;
    std::size_t best_trace = 0;
    bool first = true;
    do {
        std::size_t trace = 0;
        for (std::size_t cl = 0; cl < 3; ++cl) trace += by_cluster[perm[cl]][cl];
        if (first || trace > best_trace) {
            best_trace = trace;
            best_perm = perm;
            first = false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    Confusion confusion{};
    for (std::size_t cls = 0; cls < 3; ++cls)
        for (std::size_t cl = 0; cl < 3; ++cl) confusion[cls][best_perm[cl]] += by_cluster[cls][cl];
    auto rep = evaluate_confusion(confusion);
    rep.cluster_to_class = best_perm;
    return rep;
}

Projection project_2d(const Matrix& data) {
    if (data.rows < 2) throw DegenerateData("project_2d: need at least two rows");
    const auto z = standardize(data);
    const std::size_t n = z.data.rows, k = z.data.cols;

    Eigen::MatrixXd x(n, k);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < k; ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = z.data(r, c);
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DegenerateData("project_2d: eigen-decomposition failed");

    Projection p;
    const auto& values = solver.eigenvalues();  // ascending
    for (Eigen::Index i = values.size() - 1; i >= 0; --i) p.eigenvalues.push_back(std::max(0.0, values(i)));
    const double total = std::accumulate(p.eigenvalues.begin(), p.eigenvalues.end(), 0.0);

    p.components = Matrix(2, k);
    p.points = Matrix(n, 2);
    for (std::size_t comp = 0; comp < 2 && comp < k; ++comp) {
        Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(k - 1 - comp));
        Eigen::Index largest = 0;
        v.cwiseAbs().maxCoeff(&largest);
        if (v(largest) < 0) v = -v;
        for (std::size_t c = 0; c < k; ++c) p.components(comp, c) = v(static_cast<Eigen::Index>(c));
        const Eigen::VectorXd scores = x * v;
        for (std::size_t r = 0; r < n; ++r) p.points(r, comp) = scores(static_cast<Eigen::Index>(r));
        p.explained_variance_ratio[comp] = total > 0 ? p.eigenvalues[comp] / total : 0.0;
    }
    return p;
}

std::string to_json(const EvaluationReport& r, int indent) {
    using nlohmann::ordered_json;
    ordered_json j;
    auto& names = j["classes"] = ordered_json::array();
    for (auto c : dataset::all_classes) names.push_back(dataset::to_string(c));
    j["confusion"] = r.confusion;
    auto& mapping = j["cluster_to_class"] = ordered_json::object();
    for (std::size_t cl = 0; cl < 3; ++cl)
        mapping[std::to_string(cl)] = dataset::to_string(dataset::all_classes[r.cluster_to_class[cl]]);
    j["accuracy"] = r.accuracy;
    auto metrics = [](const ClassMetrics& m) {
        return ordered_json{{"false_positive_rate", m.false_positive_rate},
                            {"false_negative_rate", m.false_negative_rate},
                            {"accuracy", m.accuracy},
                            {"table_fpr", m.table_fpr},
                            {"table_fnr", m.table_fnr}};
    };
    auto& per = j["per_class"] = ordered_json::object();
    for (std::size_t c = 0; c < 3; ++c) per[std::string(dataset::to_string(dataset::all_classes[c]))] = metrics(r.per_class[c]);
    j["total"] = metrics(r.total);
    j["divergences"] = r.divergences;
    return j.dump(indent);
}

std::string to_json(const ClusterModel& m, int indent) {
    using nlohmann::ordered_json;
    auto rows = [](const Matrix& x) {
        ordered_json a = ordered_json::array();
        for (std::size_t r = 0; r < x.rows; ++r)
            a.push_back(std::vector<double>(x.data.begin() + static_cast<std::ptrdiff_t>(r * x.cols),
                                            x.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * x.cols)));
        return a;
    };
    ordered_json j;
    j["seed"] = m.seed;
    j["fuzzifier"] = m.fuzzifier;
    j["objective"] = m.objective;
    j["iterations"] = m.iterations;
    j["converged"] = m.converged;
    j["centers"] = rows(m.centers);
    j["memberships"] = rows(m.memberships);
    j["assignment"] = m.hard_assignment();
    return j.dump(indent);
}

}  // namespace cjscope::fcm
