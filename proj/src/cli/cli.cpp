#include "cjscope/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cjscope/corpus.hpp"
#include "cjscope/dataset.hpp"
#include "cjscope/econ.hpp"
#include "cjscope/fcm.hpp"
#include "cjscope/featurestats.hpp"
#include "cjscope/jsmetrics.hpp"
#include "cjscope/mineproto.hpp"
#include "json.hpp"

namespace cjscope::cli {

namespace {

using nlohmann::ordered_json;

// Bad input from the user: missing files, unparsable data. Exit code 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string slurp(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path);
    f << text;
}

std::string with_newline(std::string s) {
    if (s.empty() || s.back() != '\n') s += '\n';
    return s;
}

// Options shared by every subcommand.
struct Common {
    bool json = false;
    std::string output;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_flag("--json", c.json, "Machine-readable JSON output");
    sub->add_option("-o,--output", c.output, "Write the result here instead of stdout");
}

struct Context {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;

    void emit(const Common& c, const std::string& text) const {
        if (c.output.empty())
            out << with_newline(text);
        else
            write_file(c.output, with_newline(text));
    }
};

std::vector<jsmetrics::LabeledVector> load_matrix(const std::string& path, const Context& ctx) {
    if (path.empty()) return dataset::feature_fixture();
    return jsmetrics::import_feature_matrix(path == "-" ? slurp(ctx.in) : read_file(path));
}

// ---- features ---------------------------------------------------------------

struct FeaturesOpts {
    Common common;
    std::vector<std::string> files;
    unsigned threads = 0;
};

int cmd_features(const FeaturesOpts& o, const Context& ctx) {
    std::vector<std::string> files = o.files;
    if (files.empty()) files.push_back("-");
    std::vector<std::string> sources(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) sources[i] = files[i] == "-" ? slurp(ctx.in) : read_file(files[i]);

    std::vector<jsmetrics::LabeledVector> rows(files.size());
    std::vector<std::string> errors(files.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < files.size();) {
            try {
                rows[i] = {files[i] == "-" ? "stdin" : files[i], jsmetrics::compute_features(sources[i])};
            } catch (const jsmetrics::ParseError& e) {
                errors[i] = files[i] + ": " + e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(o.threads ? o.threads : std::thread::hardware_concurrency(),
                                                       static_cast<unsigned>(files.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
        work();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw InputError(e);

    if (!o.common.json) {
        ctx.emit(o.common, jsmetrics::export_feature_matrix(rows));
        return 0;
    }
    ordered_json arr = ordered_json::array();
    const auto& names = jsmetrics::feature_names();
    for (const auto& [label, fv] : rows) {
        ordered_json f;
        const auto v = fv.values();
        for (std::size_t k = 0; k < v.size(); ++k) f[std::string(names[k])] = v[k];
        arr.push_back({{"file", label}, {"features", std::move(f)}});
    }
    ctx.emit(o.common, arr.dump(2));
    return 0;
}

// ---- correlate / select-features --------------------------------------------

struct CorrelateOpts {
    Common common;
    std::string input;
    std::string cls = "cryptojacking";
};

ordered_json matrix_json(const featurestats::CorrelationMatrix& m) {
    ordered_json j;
    j["features"] = m.feature_names;
    auto& rows = j["values"] = ordered_json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<double> r(m.values.begin() + i * m.size(), m.values.begin() + (i + 1) * m.size());
        rows.push_back(r);
    }
    j["warnings"] = m.warnings;
    return j;
}

featurestats::CorrelationMatrix correlation_of(const std::vector<jsmetrics::LabeledVector>& rows,
                                                dataset::ScriptClass c) {
    return featurestats::class_correlation(dataset::rows_of(rows, c));
}

int cmd_correlate(const CorrelateOpts& o, const Context& ctx) {
    const auto rows = load_matrix(o.input, ctx);
    if (o.common.json) {
        ordered_json j;
        for (const auto c : dataset::all_classes) j[std::string(dataset::to_string(c))] = matrix_json(correlation_of(rows, c));
        ctx.emit(o.common, j.dump(2));
        return 0;
    }
    const auto m = correlation_of(rows, dataset::class_of(o.cls));
    for (const auto& w : m.warnings) ctx.err << "warning: " << w << '\n';
    ctx.emit(o.common, featurestats::to_csv(m));
    return 0;
}

struct SelectOpts {
    Common common;
    std::string input;
    std::string strategy = "conjunctive";
    bool exclude_diagonal = false;
};

int cmd_select(const SelectOpts& o, const Context& ctx) {
    const auto rows = load_matrix(o.input, ctx);
    featurestats::SelectionOptions opt;
    opt.strategy = featurestats::parse_strategy(o.strategy);
    opt.exclude_diagonal = o.exclude_diagonal;
    const auto s = featurestats::select_features(correlation_of(rows, dataset::ScriptClass::Cryptojacking),
                                                 correlation_of(rows, dataset::ScriptClass::Malicious),
                                                 correlation_of(rows, dataset::ScriptClass::Benign), opt);
    if (o.common.json) {
        ctx.emit(o.common, featurestats::to_json(s));
        return 0;
    }
    std::string text;
    for (const auto& name : s.selected) text += name + '\n';
    ctx.emit(o.common, text);
    return 0;
}

// ---- cluster ----------------------------------------------------------------

struct ClusterOpts {
    Common common;
    std::string input;
    std::size_t restarts = 20;
    std::uint64_t seed = 1;
    std::size_t clusters = 3;
    double fuzzifier = 2.0;
    unsigned threads = 0;
    bool evaluate = false;
    std::string projection;
};

int cmd_cluster(const ClusterOpts& o, const Context& ctx) {
    const auto rows = load_matrix(o.input, ctx);
    const auto z = fcm::standardize(fcm::to_matrix(rows));
    for (const auto& w : z.warnings) ctx.err << "warning: " << w << '\n';
    fcm::FitOptions fit;
    fit.clusters = o.clusters;
    fit.fuzzifier = o.fuzzifier;
    fit.seed = o.seed;
    const auto model = fcm::fit_best(z.data, fit, o.restarts, o.threads);
    const auto hard = model.hard_assignment();

    std::optional<fcm::EvaluationReport> report;
    if (o.evaluate) {
        if (o.clusters != 3) throw InputError("--evaluate needs 3 clusters");
        std::vector<dataset::ScriptClass> labels;
        for (const auto& r : rows) labels.push_back(dataset::class_of(r.first));
        report = fcm::evaluate(model, labels);
    }

    if (!o.projection.empty()) {
        const auto p = fcm::project_2d(fcm::to_matrix(rows));
        std::string csv = "label,pc1,pc2,cluster\n";
        for (std::size_t i = 0; i < rows.size(); ++i)
            csv += "\"" + rows[i].first + "\"," + jsmetrics::format_number(p.points(i, 0)) + "," +
                   jsmetrics::format_number(p.points(i, 1)) + "," + std::to_string(hard[i]) + "\n";
        write_file(o.projection, csv);
    }

    if (o.common.json) {
        ordered_json j;
        j["model"] = ordered_json::parse(fcm::to_json(model, -1));
        auto& a = j["assignments"] = ordered_json::array();
        for (std::size_t i = 0; i < rows.size(); ++i) a.push_back({{"label", rows[i].first}, {"cluster", hard[i]}});
        j["evaluation"] = report ? ordered_json::parse(fcm::to_json(*report, -1)) : ordered_json(nullptr);
        ctx.emit(o.common, j.dump(2));
        return 0;
    }
    std::ostringstream text;
    if (report) {
        text << "accuracy " << jsmetrics::format_number(report->accuracy) << "%\n";
        for (const auto c : dataset::all_classes) {
            const auto& m = report->per_class[static_cast<std::size_t>(c)];
            text << dataset::to_string(c) << " accuracy " << jsmetrics::format_number(m.accuracy) << "% fpr "
                 << jsmetrics::format_number(m.table_fpr) << "% fnr " << jsmetrics::format_number(m.table_fnr)
                 << "%\n";
        }
    } else {
        text << "label,cluster\n";
        for (std::size_t i = 0; i < rows.size(); ++i) text << '"' << rows[i].first << "\"," << hard[i] << '\n';
    }
    ctx.emit(o.common, text.str());
    return 0;
}

// ---- detect / simulate ------------------------------------------------------

struct DetectOpts {
    Common common;
    std::string log = "-";
    std::string endpoint;
    std::string blacklist;
};

mineproto::Blacklist load_blacklist(const std::string& path) {
    if (path.empty()) return mineproto::Blacklist(mineproto::Scenario::builtin("direct").blacklist);
    return mineproto::Blacklist::parse(read_file(path));
}

std::string verdict_line(const mineproto::DetectionVerdict& v) {
    return std::string(to_string(v.detector)) + ": " + std::string(to_string(v.status)) + " (" +
           std::to_string(v.evidence.size()) + " evidence)\n";
}

int cmd_detect(const DetectOpts& o, const Context& ctx) {
    const auto log = mineproto::SessionLog::from_jsonl(o.log == "-" ? slurp(ctx.in) : read_file(o.log));
    std::vector<mineproto::DetectionVerdict> verdicts{mineproto::detect_content(log)};
    if (!o.endpoint.empty()) verdicts.push_back(mineproto::blacklist_detector(o.endpoint, load_blacklist(o.blacklist)));
    if (o.common.json) {
        ordered_json arr = ordered_json::array();
        for (const auto& v : verdicts) arr.push_back(ordered_json::parse(to_json(v, -1)));
        ctx.emit(o.common, ordered_json{{"frames", log.entries.size()}, {"verdicts", arr}}.dump(2));
        return 0;
    }
    std::string text;
    for (const auto& v : verdicts) text += verdict_line(v);
    ctx.emit(o.common, text);
    return 0;
}

struct SimulateOpts {
    Common common;
    std::string scenario = "relay";
    std::string detector = "all";
    std::string log;
};

int cmd_simulate(const SimulateOpts& o, const Context& ctx) {
    mineproto::Scenario sc;
    if (o.scenario == "direct" || o.scenario == "relay" || o.scenario == "keyless")
        sc = mineproto::Scenario::builtin(o.scenario);
    else
        sc = mineproto::Scenario::from_json(read_file(o.scenario));

    const auto result = mineproto::run_scenario(sc);
    if (!o.log.empty()) {
        const auto& log = sc.topology == mineproto::Topology::Relay && !result.proxy_logs.empty()
                              ? result.proxy_logs.front()
                              : result.client.log;
        write_file(o.log, log.to_jsonl());
    }
    std::vector<const mineproto::DetectionVerdict*> chosen;
    if (o.detector == "content" || o.detector == "all") chosen.push_back(&result.content);
    if (o.detector == "blacklist" || o.detector == "all") chosen.push_back(&result.blacklist);

    if (o.common.json) {
        auto j = ordered_json::parse(to_json(result, -1));
        auto& v = j["verdicts"] = ordered_json::array();
        for (const auto* d : chosen) v.push_back(ordered_json::parse(to_json(*d, -1)));
        ctx.emit(o.common, j.dump(2));
    } else {
        std::string text = "scenario " + sc.name + " via " + result.observed_endpoint + "\n";
        for (const auto* d : chosen) text += verdict_line(*d);
        ctx.emit(o.common, text);
    }
    if (result.client.error) ctx.err << "miner: " << *result.client.error << '\n';
    return 0;
}

// ---- econ -------------------------------------------------------------------

struct EconOpts {
    Common common;
    std::string config;
    std::string sites;
    std::optional<std::string> device;
    std::optional<double> alpha;
    std::optional<double> xmr_price, payout_rate, electricity_cost;
    std::string trajectory;
    std::optional<double> minutes;
    std::string pow_target;
    double network_hash_rate = 0;
};

int cmd_econ(const EconOpts& o, const Context& ctx) {
    std::string config_path = o.config;
    if (config_path.empty())
        if (const char* env = std::getenv("CJSCOPE_CONFIG")) config_path = env;
    auto cfg = config_path.empty() ? econ::EconConfig::builtin() : econ::EconConfig::from_json(read_file(config_path));
    if (o.xmr_price) cfg.params.xmr_price = *o.xmr_price;
    if (o.payout_rate) cfg.params.payout_rate = *o.payout_rate;
    if (o.electricity_cost) cfg.params.electricity_cost = *o.electricity_cost;
    cfg.params.validate();
    const auto sites = o.sites.empty() ? econ::SiteTable::builtin() : econ::SiteTable::from_json(read_file(o.sites));
    const auto report = econ::build_report(cfg, sites, o.device, o.alpha);

    if (!o.trajectory.empty()) {
        if (!o.device) throw InputError("--trajectory needs --device");
        const auto& d = cfg.device(*o.device);
        write_file(o.trajectory, econ::trajectory_csv(econ::simulate_battery(d, o.alpha, o.minutes.value_or(d.session_minutes))));
    }
    std::optional<econ::PowModel> pow;
    if (!o.pow_target.empty()) pow = econ::pow_block_model(o.pow_target, o.network_hash_rate);

    if (o.common.json) {
        auto j = ordered_json::parse(econ::to_json(report, -1));
        if (pow)
            j["pow"] = {{"target", pow->target},
                        {"block_probability", pow->block_probability},
                        {"expected_hashes", pow->expected_hashes},
                        {"network_hash_rate", pow->network_hash_rate},
                        {"block_time", pow->block_time}};
        ctx.emit(o.common, j.dump(2));
        return 0;
    }
    using jsmetrics::format_number;
    std::ostringstream t;
    t << "device,alpha,hash_rate,profit_usd,loss_usd,gap_usd,years,flagged\n";
    for (const auto& d : report.devices) {
        std::string flagged;
        for (const auto& delta : d.deltas)
            if (delta.flagged) flagged += (flagged.empty() ? "" : "|") + delta.quantity;
        t << d.device << ',' << format_number(d.alpha) << ',' << format_number(d.hash_rate) << ','
          << format_number(d.computed.profit.usd) << ',' << format_number(d.computed.loss_usd) << ','
          << format_number(d.computed.gap_usd) << ',' << format_number(d.computed.years) << ',' << flagged << '\n';
    }
    if (!o.device && !o.alpha) {
        t << "\nsite,table,monthly_usd,reported_usd,flagged\n";
        for (const auto& s : report.sites)
            t << s.domain << ',' << s.table << ',' << format_number(s.computed_usd) << ','
              << format_number(s.delta.reported) << ',' << (s.delta.flagged ? "yes" : "") << '\n';
    }
    if (pow)
        t << "\nblock_probability " << format_number(pow->block_probability) << "\nexpected_hashes "
          << format_number(pow->expected_hashes) << "\nblock_time_s " << format_number(pow->block_time) << '\n';
    ctx.emit(o.common, t.str());
    return 0;
}

// ---- scan -------------------------------------------------------------------

struct ScanOpts {
    Common common;
    std::string dir;
    bool synthetic = false;
    std::uint64_t seed = 1;
    std::string records;
    std::string signatures;
    std::size_t top_tlds = 10;
    unsigned threads = 0;
};

int cmd_scan(const ScanOpts& o, const Context& ctx) {
    if (o.synthetic == !o.dir.empty()) throw InputError("scan needs exactly one of a directory or --synthetic");
    const auto db = o.signatures.empty() ? corpus::SignatureDb::builtin()
                                         : corpus::SignatureDb::from_json(read_file(o.signatures));
    std::vector<corpus::SiteRecord> records;
    if (o.synthetic) {
        records = corpus::synthetic_corpus(o.seed);
    } else {
        if (!std::filesystem::is_directory(o.dir)) throw InputError("not a directory: " + o.dir);
        records = corpus::scan_directory(o.dir, db, o.threads);
    }
    if (!o.records.empty()) write_file(o.records, corpus::to_jsonl(records));
    const auto report = corpus::aggregate(records, o.top_tlds);
    if (o.common.json) {
        ctx.emit(o.common, corpus::to_json(report));
        return 0;
    }
    std::ostringstream t;
    t << "total " << report.total << "\nactive " << report.active << '\n';
    auto table = [&](const char* title, const std::vector<corpus::CountRow>& rows) {
        t << '\n' << title << ",type,count,percent\n";
        for (const auto& r : rows)
            t << r.name << ',' << r.type << ',' << r.count << ',' << jsmetrics::format_number(std::round(r.percent * 100) / 100) << '\n';
    };
    table("tld", report.tlds);
    table("platform", report.platforms);
    table("currency", report.currencies);
    ctx.emit(o.common, t.str());
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    const Context ctx{in, out, err};
    CLI::App app{"Static and network analysis of in-browser cryptojacking", "cjscope"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", "cjscope 0.1.0");

    FeaturesOpts features;
    auto* s_features = app.add_subcommand("features", "Static features of JavaScript files (stdin with no files or '-')");
    add_common(s_features, features.common);
    s_features->add_option("files", features.files, "JavaScript sources");
    s_features->add_option("--threads", features.threads, "Worker threads (0 = all cores)");

    CorrelateOpts correlate;
    auto* s_corr = app.add_subcommand("correlate", "Per-class Pearson correlation of a feature matrix");
    add_common(s_corr, correlate.common);
    s_corr->add_option("matrix", correlate.input, "Feature matrix CSV ('-' for stdin; default: built-in fixture)");
    s_corr->add_option("--class", correlate.cls, "Class for CSV output")
        ->check(CLI::IsMember({"cryptojacking", "malicious", "benign"}));

    SelectOpts select;
    auto* s_sel = app.add_subcommand("select-features", "Features that separate cryptojacking from other scripts");
    add_common(s_sel, select.common);
    s_sel->add_option("matrix", select.input, "Feature matrix CSV ('-' for stdin; default: built-in fixture)");
    s_sel->add_option("--strategy", select.strategy, "conjunctive | conjunctive-magnitude");
    s_sel->add_flag("--exclude-diagonal", select.exclude_diagonal, "Leave rho(k,k) out of the column means");

    ClusterOpts cluster;
    auto* s_cl = app.add_subcommand("cluster", "Fuzzy c-means over a feature matrix");
    add_common(s_cl, cluster.common);
    s_cl->add_option("matrix", cluster.input, "Feature matrix CSV ('-' for stdin; default: built-in fixture)");
    s_cl->add_option("--restarts", cluster.restarts, "Seeded restarts")->check(CLI::PositiveNumber);
    s_cl->add_option("--seed", cluster.seed, "First restart seed");
    s_cl->add_option("--clusters", cluster.clusters, "Number of clusters")->check(CLI::Range(2, 64));
    s_cl->add_option("--fuzzifier", cluster.fuzzifier, "m > 1");
    s_cl->add_option("--threads", cluster.threads, "Worker threads (0 = all cores)");
    s_cl->add_flag("--evaluate", cluster.evaluate, "Score against the class prefix of each label");
    s_cl->add_option("--projection", cluster.projection, "Write a 2-D PCA projection CSV");

    DetectOpts detect;
    auto* s_det = app.add_subcommand("detect", "Verdicts for a WebSocket frame log (JSONL)");
    add_common(s_det, detect.common);
    s_det->add_option("log", detect.log, "Frame log ('-' or omitted for stdin)");
    s_det->add_option("--endpoint", detect.endpoint, "ws:// or wss:// URL the session connected to");
    s_det->add_option("--blacklist", detect.blacklist, "Host blacklist file (default: built-in list)");

    SimulateOpts simulate;
    auto* s_sim = app.add_subcommand("simulate", "Run a dropzone / miner / relay scenario on loopback");
    add_common(s_sim, simulate.common);
    s_sim->add_option("--scenario", simulate.scenario, "direct | relay | keyless | path to a scenario JSON");
    s_sim->add_option("--detector", simulate.detector, "Which verdicts to report")
        ->check(CLI::IsMember({"content", "blacklist", "all"}));
    s_sim->add_option("--log", simulate.log, "Write the observed frame log (JSONL)");

    EconOpts econ_o;
    auto* s_econ = app.add_subcommand("econ", "Profit, loss and time-to-1-XMR report");
    add_common(s_econ, econ_o.common);
    s_econ->add_option("--config", econ_o.config, "Config JSON (default: $CJSCOPE_CONFIG, else built-in)");
    s_econ->add_option("--sites", econ_o.sites, "Site table JSON");
    s_econ->add_option("--device", econ_o.device, "Device profile name");
    s_econ->add_option("--alpha", econ_o.alpha, "Throttle in [0, 1]")->check(CLI::Range(0.0, 1.0));
    s_econ->add_option("--xmr-price", econ_o.xmr_price, "USD per XMR");
    s_econ->add_option("--payout-rate", econ_o.payout_rate, "XMR per million hashes");
    s_econ->add_option("--electricity-cost", econ_o.electricity_cost, "USD per watt-hour");
    s_econ->add_option("--trajectory", econ_o.trajectory, "Write the battery trajectory CSV (needs --device)");
    s_econ->add_option("--minutes", econ_o.minutes, "Trajectory length (default: the device session)");
    s_econ->add_option("--pow-target", econ_o.pow_target, "Block target, decimal or 0x hex");
    s_econ->add_option("--network-hash-rate", econ_o.network_hash_rate, "Hashes/second for the block-time model");

    ScanOpts scan;
    auto* s_scan = app.add_subcommand("scan", "Scan saved pages for miner scripts and aggregate");
    add_common(s_scan, scan.common);
    s_scan->add_option("dir", scan.dir, "Directory of .html/.htm files");
    s_scan->add_flag("--synthetic", scan.synthetic, "Use the generated 5,703-page corpus");
    s_scan->add_option("--seed", scan.seed, "Seed of the synthetic corpus");
    s_scan->add_option("--records", scan.records, "Write per-site records (JSONL)");
    s_scan->add_option("--signatures", scan.signatures, "Signature database JSON");
    s_scan->add_option("--top-tlds", scan.top_tlds, "TLD rows before 'others'");
    s_scan->add_option("--threads", scan.threads, "Worker threads (0 = all cores)");

    std::vector<const char*> argv{"cjscope"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*s_features) return cmd_features(features, ctx);
        if (*s_corr) return cmd_correlate(correlate, ctx);
        if (*s_sel) return cmd_select(select, ctx);
        if (*s_cl) return cmd_cluster(cluster, ctx);
        if (*s_det) return cmd_detect(detect, ctx);
        if (*s_sim) return cmd_simulate(simulate, ctx);
        if (*s_econ) return cmd_econ(econ_o, ctx);
        if (*s_scan) return cmd_scan(scan, ctx);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const jsmetrics::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error: bad JSON: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
    err << "internal error: no subcommand ran\n";
    return 2;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    return run(args, std::cin, std::cout, std::cerr);
}

int run(int argc, char** argv) { return run(argc, const_cast<const char* const*>(argv)); }

}  // namespace cjscope::cli
