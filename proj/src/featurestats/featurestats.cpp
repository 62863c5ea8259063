#include "cjscope/featurestats.hpp"

#include <algorithm>
#include <cmath>

#include "common/csv.hpp"
#include "json.hpp"

namespace cjscope::featurestats {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw LengthMismatch("pearson: inputs have " + std::to_string(x.size()) + " and " +
                             std::to_string(y.size()) + " samples");
    if (x.size() < 2) throw LengthMismatch("pearson: need at least two samples");

    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix class_correlation(const std::vector<std::vector<double>>& rows,
                                    std::vector<std::string> feature_names) {
    if (rows.size() < 2)
        throw InsufficientRows("class_correlation: need at least two rows, got " +
                               std::to_string(rows.size()));
    const std::size_t k = feature_names.size();
    std::vector<std::vector<double>> columns(k, std::vector<double>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != k)
            throw LengthMismatch("class_correlation: row " + std::to_string(r) + " has " +
                                 std::to_string(rows[r].size()) + " values, expected " +
                                 std::to_string(k));
        for (std::size_t c = 0; c < k; ++c) columns[c][r] = rows[r][c];
    }

    CorrelationMatrix out;
    out.feature_names = std::move(feature_names);
    out.values.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const bool constant = !pearson(columns[i], columns[i]).has_value();
        if (constant) out.warnings.push_back("feature '" + out.feature_names[i] + "' is constant");
        out.values[i * k + i] = 1.0;
        for (std::size_t j = i + 1; j < k; ++j) {
            const double rho = pearson(columns[i], columns[j]).value_or(0.0);
            out.values[i * k + j] = rho;
            out.values[j * k + i] = rho;
        }
    }
    return out;
}

CorrelationMatrix class_correlation(const std::vector<jsmetrics::FeatureVector>& rows) {
    std::vector<std::vector<double>> raw;
    raw.reserve(rows.size());
    for (const auto& f : rows) {
        const auto v = f.values();
        raw.emplace_back(v.begin(), v.end());
    }
    const auto& names = jsmetrics::feature_names();
    return class_correlation(raw, std::vector<std::string>(names.begin(), names.end()));
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Conjunctive: return "conjunctive";
        case Strategy::ConjunctiveMagnitude: return "conjunctive-magnitude";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "conjunctive") return Strategy::Conjunctive;
    if (name == "conjunctive-magnitude") return Strategy::ConjunctiveMagnitude;
    throw std::invalid_argument("unknown selection strategy '" + std::string(name) + "'");
}

bool FeatureSelection::contains(std::string_view name) const {
    return std::find(selected.begin(), selected.end(), name) != selected.end();
}

namespace {

std::vector<double> column_means(const CorrelationMatrix& m, const SelectionOptions& opt) {
    const std::size_t k = m.size();
    std::vector<double> means(k, 0.0);
    const double count = static_cast<double>(opt.exclude_diagonal ? k - 1 : k);
    for (std::size_t col = 0; col < k; ++col) {
        double sum = 0;
        for (std::size_t row = 0; row < k; ++row) {
            if (opt.exclude_diagonal && row == col) continue;
            const double v = m.at(row, col);
            sum += opt.strategy == Strategy::ConjunctiveMagnitude ? std::fabs(v) : v;
        }
        means[col] = count > 0 ? sum / count : 0.0;
    }
    return means;
}

}  // namespace

FeatureSelection select_features(const CorrelationMatrix& c, const CorrelationMatrix& m,
                                 const CorrelationMatrix& b, SelectionOptions options) {
    if (c.feature_names != m.feature_names || c.feature_names != b.feature_names)
        throw SchemaMismatch("select_features: matrices disagree on feature names or order");
    for (const auto* x : {&c, &m, &b})
        if (x->values.size() != x->size() * x->size())
            throw SchemaMismatch("select_features: matrix is not square");

    FeatureSelection s;
    s.feature_names = c.feature_names;
    s.strategy = options.strategy;
    s.exclude_diagonal = options.exclude_diagonal;
    s.c_mean = column_means(c, options);
    s.m_mean = column_means(m, options);
    s.b_mean = column_means(b, options);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double cm = s.c_mean[k] - s.m_mean[k];
        const double cb = s.c_mean[k] - s.b_mean[k];
        const double mb = s.m_mean[k] - s.b_mean[k];
        if (cm > mb && cb > mb) {
            s.selected.push_back(c.feature_names[k]);
            s.selected_indices.push_back(k);
        }
    }
    return s;
}

std::string to_csv(const CorrelationMatrix& m) {
    std::string out = "feature";
    for (const auto& n : m.feature_names) {
        out += ',';
        csv::write_field(out, n);
    }
    out += '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        csv::write_field(out, m.feature_names[i]);
        for (std::size_t j = 0; j < m.size(); ++j) {
            out += ',';
            out += jsmetrics::format_number(m.at(i, j));
        }
        out += '\n';
    }
    return out;
}

CorrelationMatrix correlation_from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "feature")
        throw std::invalid_argument("correlation csv: missing 'feature' header");
    CorrelationMatrix m;
    m.feature_names.assign(rows[0].begin() + 1, rows[0].end());
    const std::size_t k = m.size();
    if (rows.size() != k + 1) throw std::invalid_argument("correlation csv: matrix is not square");
    for (std::size_t i = 0; i < k; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != k + 1 || row[0] != m.feature_names[i])
            throw std::invalid_argument("correlation csv: row " + std::to_string(i + 1) +
                                        " does not match the header");
        for (std::size_t j = 0; j < k; ++j)
            m.values.push_back(csv::parse_double(row[j + 1], "row " + std::to_string(i + 1)));
    }
    return m;
}

std::string to_json(const FeatureSelection& s, int indent) {
    nlohmann::ordered_json j;
    j["strategy"] = to_string(s.strategy);
    j["exclude_diagonal"] = s.exclude_diagonal;
    j["selected"] = s.selected;
    auto& features = j["features"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < s.feature_names.size(); ++k) {
        features.push_back({{"name", s.feature_names[k]},
                            {"c_mean", s.c_mean[k]},
                            {"m_mean", s.m_mean[k]},
                            {"b_mean", s.b_mean[k]},
                            {"selected", std::find(s.selected_indices.begin(), s.selected_indices.end(),
                                                   k) != s.selected_indices.end()}});
    }
    return j.dump(indent);
}

}  // namespace cjscope::featurestats
