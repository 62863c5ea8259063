#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cjscope/cli.hpp"
#include "cjscope/corpus.hpp"
#include "cjscope/dataset.hpp"
#include "cjscope/econ.hpp"
#include "cjscope/fcm.hpp"
#include "cjscope/featurestats.hpp"
#include "cjscope/jsmetrics.hpp"
#include "cjscope/mineproto.hpp"

namespace py = pybind11;
using namespace cjscope;

// Structured results cross the boundary as JSON text; the Python package
// turns them into dicts.

namespace {

std::map<std::string, double> features(const std::string& source) {
    const auto v = jsmetrics::compute_features(source).values();
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace(jsmetrics::feature_names()[i], v[i]);
    return out;
}

std::vector<jsmetrics::LabeledVector> matrix(const std::optional<std::string>& csv) {
    return csv ? jsmetrics::import_feature_matrix(*csv) : dataset::feature_fixture();
}

std::vector<std::string> select_features(const std::optional<std::string>& csv, const std::string& strategy,
                                bool exclude_diagonal) {
    const auto rows = matrix(csv);
    auto corr = [&](dataset::ScriptClass c) { return featurestats::class_correlation(dataset::rows_of(rows, c)); };
    return featurestats::select_features(corr(dataset::ScriptClass::Cryptojacking),
                                         corr(dataset::ScriptClass::Malicious), corr(dataset::ScriptClass::Benign),
                                         {featurestats::parse_strategy(strategy), exclude_diagonal})
        .selected;
}

std::string cluster(const std::optional<std::string>& csv, std::size_t restarts, std::uint64_t seed) {
    const auto rows = matrix(csv);
    fcm::FitOptions opt;
    opt.seed = seed;
    const auto model = fcm::fit_best(fcm::standardize(fcm::to_matrix(rows)).data, opt, restarts);
    std::vector<dataset::ScriptClass> labels;
    for (const auto& r : rows) labels.push_back(dataset::class_of(r.first));
    return fcm::to_json(fcm::evaluate(model, labels), -1);
}

py::object classify_frame(const std::string& text) {
    const auto f = mineproto::classify_frame(text);
    if (!f) return py::none();
    return py::str(mineproto::serialize(*f));
}

std::string detect(const std::string& jsonl) {
    return mineproto::to_json(mineproto::detect_content(mineproto::SessionLog::from_jsonl(jsonl)), -1);
}

std::string blacklist(const std::string& url, const std::vector<std::string>& patterns) {
    return mineproto::to_json(mineproto::blacklist_detector(url, mineproto::Blacklist(patterns)), -1);
}

std::string simulate(const std::string& scenario) {
    const auto sc = scenario.starts_with("{") ? mineproto::Scenario::from_json(scenario)
                                              : mineproto::Scenario::builtin(scenario);
    py::gil_scoped_release release;
    return mineproto::to_json(mineproto::run_scenario(sc), -1);
}

std::string econ_report(const std::optional<std::string>& device, std::optional<double> alpha) {
    return econ::to_json(econ::build_report(econ::EconConfig::builtin(), econ::SiteTable::builtin(), device, alpha), -1);
}

std::string scan_html(const std::string& html, const std::string& domain) {
    return corpus::to_json(corpus::scan_html(html, corpus::SignatureDb::builtin(), domain));
}

std::string synthetic_distribution(std::uint64_t seed) {
    return corpus::to_json(corpus::aggregate(corpus::synthetic_corpus(seed)), -1);
}

py::tuple run_cli(const std::vector<std::string>& args, const std::string& input) {
    std::istringstream in(input);
    std::ostringstream out, err;
    int code;
    {
        py::gil_scoped_release release;
        code = cli::run(args, in, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_cjscope, m) {
    m.doc() = "Native core of cjscope";

    py::register_exception<jsmetrics::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<mineproto::Malformed>(m, "MalformedFrame", PyExc_ValueError);

    m.def("features", &features, py::arg("source"));
    m.def("feature_names", [] {
        std::vector<std::string> out;
        for (auto n : jsmetrics::feature_names()) out.emplace_back(n);
        return out;
    });
    m.def("cyclomatic", [](const std::string& s) { return jsmetrics::build_cfg_summary(s).cyclomatic(); },
          py::arg("source"));
    m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
        return featurestats::pearson(x, y);
    }, py::arg("x"), py::arg("y"));
    m.def("select_features", &select_features, py::arg("csv") = py::none(), py::arg("strategy") = "conjunctive",
          py::arg("exclude_diagonal") = false);
    m.def("cluster", &cluster, py::arg("csv") = py::none(), py::arg("restarts") = 20, py::arg("seed") = 1);

    m.def("classify_frame", &classify_frame, py::arg("text"));
    m.def("credit_per_share", [](const std::string& t) { return mineproto::credit_per_share(t); }, py::arg("target"));
    m.def("detect", &detect, py::arg("jsonl"));
    m.def("blacklist", &blacklist, py::arg("url"), py::arg("patterns"));
    m.def("simulate", &simulate, py::arg("scenario"));

    m.def("session_profit", [](double h, double seconds) { return econ::session_profit(h, seconds, {}).usd; },
          py::arg("hash_rate"), py::arg("seconds"));
    m.def("time_to_one_xmr", [](double h) { return econ::time_to_one_xmr(h, {}); }, py::arg("hash_rate"));
    m.def("econ_report", &econ_report, py::arg("device") = py::none(), py::arg("alpha") = py::none());

    m.def("scan_html", &scan_html, py::arg("html"), py::arg("domain") = "");
    m.def("synthetic_distribution", &synthetic_distribution, py::arg("seed") = 1);

    m.def("run_cli", &run_cli, py::arg("args"), py::arg("stdin") = "");
}
