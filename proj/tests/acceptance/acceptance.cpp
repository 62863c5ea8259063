// One PASS/FAIL line per acceptance criterion. Tolerances are pinned here;
// the published numbers are typed in directly rather than read from the
// embedded data files, so the data files are checked too.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cjscope/corpus.hpp"
#include "cjscope/dataset.hpp"
#include "cjscope/econ.hpp"
#include "cjscope/fcm.hpp"
#include "cjscope/featurestats.hpp"
#include "cjscope/jsmetrics.hpp"
#include "cjscope/mineproto.hpp"
#include "support/jsgen.hpp"

namespace {

using Clock = std::chrono::steady_clock;
namespace mp = cjscope::mineproto;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double rel(double computed, double reported) { return std::fabs(computed - reported) / std::fabs(reported); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1: clustering ------------------------------------------------------------

constexpr double min_accuracy = 92.8;  // 26/28
constexpr double cluster_time_limit = 1.0;

Outcome clustering() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto rows = cjscope::dataset::feature_fixture();
    const auto z = cjscope::fcm::standardize(cjscope::fcm::to_matrix(rows));
    cjscope::fcm::FitOptions opt;
    opt.fuzzifier = 2.0;
    opt.seed = 1;
    const auto model = cjscope::fcm::fit_best(z.data, opt, 20);
    std::vector<cjscope::dataset::ScriptClass> labels;
    for (const auto& r : rows) labels.push_back(cjscope::dataset::class_of(r.first));
    const auto report = cjscope::fcm::evaluate(model, labels);
    const double t = seconds_since(t0);

    std::size_t correct = 0;
    for (std::size_t c = 0; c < 3; ++c) correct += report.confusion[c][c];
    const auto mal = static_cast<std::size_t>(cjscope::dataset::ScriptClass::Malicious);
    o.require(rows.size() == 28, "fixture has " + std::to_string(rows.size()) + " rows");
    o.require(report.accuracy >= min_accuracy, "accuracy " + std::to_string(correct) + "/28 = " +
                                                   fmt(report.accuracy) + "% < " + fmt(min_accuracy) + "%");
    o.require(report.confusion[mal][mal] == 10, "malicious " + std::to_string(report.confusion[mal][mal]) + "/10");
    o.require(t < cluster_time_limit, "runtime " + fmt(t) + " s");
    return o;
}

// ---- 2: device economics --------------------------------------------------------

constexpr double device_tolerance = 0.05;
constexpr double worked_tolerance = 0.02;

struct PublishedRow {
    const char* device;
    double alpha, h, minutes, b_n, b_c, profit, loss;
};

// Results of cryptojacking with different devices, as printed.
const PublishedRow device_rows[] = {
    {"windows", 0.1, 21, 85, 82, 10, 6.4e-4, 4.5e-3}, {"windows", 0.5, 14, 85, 82, 19, 3.1e-4, 3.7e-3},
    {"windows", 0.9, 5, 85, 82, 57, 4.4e-5, 1.6e-3},  {"linux", 0.1, 26, 71, 70, 3, 6.6e-4, 5.5e-3},
    {"linux", 0.5, 16, 71, 70, 22, 4.1e-4, 4.2e-3},   {"linux", 0.9, 5, 71, 70, 54, 1.3e-4, 2.6e-3},
    {"android", 0.1, 5, 163, 76, 11, 2.8e-4, 9.5e-4}, {"android", 0.5, 3, 163, 76, 32, 1.7e-4, 7.2e-4},
    {"android", 0.9, 2, 163, 76, 49, 1.1e-4, 5.4e-4},
};

Outcome device_economics() {
    Outcome o;
    const auto cfg = cjscope::econ::EconConfig::builtin();
    const auto& p = cfg.params;
    for (const auto& row : device_rows) {
        const auto& d = cfg.device(row.device);
        const std::string tag = std::string(row.device) + " a=" + fmt(row.alpha);
        o.require(d.hash_rate(row.alpha) == row.h && d.cj_end_battery(row.alpha) == row.b_c &&
                      d.session_minutes == row.minutes && d.baseline_end_battery == row.b_n,
                  tag + ": embedded profile differs from the table inputs");
        const auto e = cjscope::econ::session_economics(d, row.alpha, p);
        if (rel(e.profit.usd, row.profit) > device_tolerance)
            o.require(false, tag + " P " + fmt(e.profit.usd) + " vs " + fmt(row.profit) + " (" +
                                 fmt(100 * (e.profit.usd - row.profit) / row.profit) + "%)");
        if (rel(e.loss_usd, row.loss) > device_tolerance)
            o.require(false, tag + " L " + fmt(e.loss_usd) + " vs " + fmt(row.loss) + " (" +
                                 fmt(100 * (e.loss_usd - row.loss) / row.loss) + "%)");
        o.require(e.loss_usd - e.profit.usd > 0, tag + " L-P <= 0");
    }
    // worked example: 21 h/s for 85 minutes on the Windows laptop
    const double p_worked = cjscope::econ::session_profit(21, 85 * 60, p).usd;
    const double l_worked = cjscope::econ::session_loss(65, 0.015, 82, 10, p);
    if (rel(p_worked, 6.38e-4) > worked_tolerance)
        o.require(false, "worked P " + fmt(p_worked) + " vs 6.38e-04 (" + fmt(100 * (p_worked - 6.38e-4) / 6.38e-4) + "%)");
    o.require(rel(l_worked, 4.5e-3) <= worked_tolerance, "worked L " + fmt(l_worked) + " vs 4.5e-03");
    o.require(std::lround(l_worked / p_worked) == 7, "L/P = " + fmt(l_worked / p_worked) + ", not about 7");
    return o;
}

// ---- 3: advertising comparison ----------------------------------------------

constexpr double site_tolerance = 0.03;
constexpr double visitor_hash_rate = 20;

struct PublishedSite {
    const char* domain;
    double visits;
    const char* duration;
    double usd;
};

const PublishedSite top_sites[] = {
    {"google.com", 47.09e9, "07:23", 2.41e6},   {"youtube.com", 26.22e9, "20:05", 3.65e6},
    {"baidu.com", 19.08e9, "08:56", 1.18e6},    {"wikipedia.org", 6.55e9, "03:51", 0.17e6},
    {"reddit.com", 1.69e9, "10:38", 0.12e6},    {"facebook.com", 29.87e9, "13:28", 2.80e6},
    {"yahoo.com", 5.21e9, "06:19", 0.22e6},     {"google.co.in", 5.33e9, "07:46", 0.29e6},
    {"qq.com", 3.66e9, "04:02", 0.10e6},        {"taobao.com", 1.73e9, "06:25", 0.08e6},
};
const PublishedSite cj_sites[] = {
    {"firefoxchina.cn", 87.24e6, "04:32", 2746.9}, {"baytpbportal.fi", 12.16e6, "05:36", 472.9},
    {"mejortorrent.com", 22.83e6, "04:50", 766.4}, {"moonbit.co.in", 15.68e6, "28:37", 3116.5},
    {"shareae.com", 5.86e6, "04:49", 196.0},       {"maalaimalar.com", 3.38e6, "03:26", 80.6},
    {"icouchtuner.to", 7.96e6, "02:98", 200.8},    {"paperpk.com", 3.01e6, "03:23", 70.7},
    {"scamadviser.com", 4.20e6, "02:08", 62.2},    {"seriesdanko.to", 5.44e6, "04:59", 188.2},
};

Outcome ad_comparison() {
    Outcome o;
    const cjscope::econ::EconParams p{};
    auto check = [&](const PublishedSite& s) {
        const double usd =
            cjscope::econ::site_monthly_revenue(s.visits, cjscope::econ::parse_duration(s.duration), visitor_hash_rate, p);
        if (rel(usd, s.usd) > site_tolerance)
            o.require(false, std::string(s.domain) + " " + fmt(usd) + " vs " + fmt(s.usd) + " (" +
                                 fmt(100 * (usd - s.usd) / s.usd) + "%)");
    };
    for (const auto& s : top_sites) check(s);
    for (const auto& s : cj_sites) check(s);
    return o;
}

// ---- 4: time to one XMR -------------------------------------------------------

Outcome time_to_xmr() {
    Outcome o;
    const cjscope::econ::EconParams p{};
    const double hashes = cjscope::econ::hashes_per_xmr(p);
    o.require(rel(hashes, 3.455e10) < 1e-3, "hashes per XMR " + fmt(hashes));
    const double years = cjscope::econ::time_to_one_xmr(21, p);
    o.require(std::fabs(years - 52) <= 1, "h=21 gives " + fmt(years) + " years");
    // table divergences show up as flagged deltas in the report, not errors
    const auto report = cjscope::econ::build_report(cjscope::econ::EconConfig::builtin(), cjscope::econ::SiteTable::builtin());
    std::size_t flagged_years = 0;
    for (const auto& d : report.devices)
        for (const auto& delta : d.deltas)
            if (delta.quantity == "years" && delta.flagged) ++flagged_years;
    o.require(flagged_years > 0, "no table year divergence was flagged");
    return o;
}

// ---- 5: protocol scenario -----------------------------------------------------

constexpr double scenario_time_limit = 10.0;

Outcome protocol_scenario() {
    Outcome o;
    const auto t0 = Clock::now();
    auto direct = mp::Scenario::builtin("direct");
    direct.throttle = 0.5;
    direct.target = "ffffff00";
    const auto r = mp::run_scenario(direct);
    o.require(!r.client.error, "miner error: " + r.client.error.value_or(""));
    o.require(r.replay.ok, "server log does not replay: " + r.replay.error);

    // expected order: auth, authed, job, then (submit, hash_accept, job) per share
    std::vector<mp::FrameKind> kinds;
    for (const auto& e : r.server_logs.at(0).entries)
        if (const auto f = mp::classify_frame(e.payload)) kinds.push_back(f->kind());
    std::vector<mp::FrameKind> expected{mp::FrameKind::Auth, mp::FrameKind::Authed, mp::FrameKind::Job};
    for (std::size_t i = 0; i < r.replay.accepted_shares; ++i)
        expected.insert(expected.end(), {mp::FrameKind::Submit, mp::FrameKind::HashAccept, mp::FrameKind::Job});
    o.require(kinds == expected, "frame sequence does not follow the session state machine");
    o.require(r.replay.accepted_shares == direct.max_shares,
              std::to_string(r.replay.accepted_shares) + " shares accepted");
    o.require(r.replay.credited_hashes == 256 * r.replay.accepted_shares,
              "credited " + std::to_string(r.replay.credited_hashes) + " hashes for " +
                  std::to_string(r.replay.accepted_shares) + " shares");
    o.require(r.server_balance == 256 * r.replay.accepted_shares, "server balance " + std::to_string(r.server_balance));
    o.require(mp::credit_per_share("ffffff00") == 256, "credit per share");

    const auto relay = mp::run_scenario(mp::Scenario::builtin("relay"));
    o.require(relay.content.status == mp::Verdict::Cryptojacking,
              "relay content verdict " + std::string(mp::to_string(relay.content.status)));
    o.require(relay.blacklist.status == mp::Verdict::Clean,
              "relay blacklist verdict " + std::string(mp::to_string(relay.blacklist.status)));
    const double t = seconds_since(t0);
    o.require(t < scenario_time_limit, "runtime " + fmt(t) + " s");
    return o;
}

// ---- 6: keyless sites -----------------------------------------------------------

Outcome keyless() {
    Outcome o;
    for (int i = 0; i < 3; ++i) {
        const auto r = mp::run_scenario(mp::Scenario::builtin("keyless"));
        o.require(r.content.status == mp::Verdict::Suspicious,
                  "keyless run " + std::to_string(i) + ": " + std::string(mp::to_string(r.content.status)));
        o.require(r.server_balance == 0, "keyless session was credited");
    }
    // auth-only logs, with or without the reply, are never cryptojacking
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) {
        mp::SessionLog log;
        std::uint64_t t = 0;
        const auto n = 1 + rng() % 4;
        for (std::size_t k = 0; k < n; ++k) {
            t += rng() % 1000;
            mp::Auth a;
            a.site_key = (rng() % 2) ? "" : std::string(rng() % 40, 'k');
            log.entries.push_back({t, mp::Direction::ClientToServer, mp::serialize(a)});
            if (rng() % 2) log.entries.push_back({t + 1, mp::Direction::ServerToClient, mp::serialize(mp::Authed{"", 0})});
        }
        const auto v = mp::detect_content(log);
        if (v.status != mp::Verdict::Suspicious) {
            o.require(false, "auth-only log rated " + std::string(mp::to_string(v.status)));
            break;
        }
    }
    return o;
}

// ---- 7: property suites --------------------------------------------------------

bool close(double a, double b, double tol = 1e-9) { return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)}); }

Outcome properties() {
    Outcome o;
    {
        cjscope::testing::JsGenerator gen(1000);
        std::size_t bad = 0, bad_m = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto prog = gen.program();
            const auto a = cjscope::jsmetrics::analyze(prog.source);
            const auto& f = a.features;
            const bool ok = f.vocabulary == f.distinct_operators + f.distinct_operands &&
                            close(f.volume, (f.total_operators + f.total_operands) * std::log2(f.vocabulary)) &&
                            close(f.difficulty, f.distinct_operators / 2 * f.total_operands / f.distinct_operands) &&
                            close(f.effort, f.difficulty * f.volume) && close(f.time, f.effort / 18) &&
                            close(f.bugs, std::pow(f.effort, 2.0 / 3.0) / 3000) &&
                            a.cfg.cyclomatic() == prog.expected_cyclomatic();
            bad += !ok;
            const auto more = cjscope::jsmetrics::analyze(prog.source + "\nwhile (x) { y(); }\n");
            bad_m += more.cfg.cyclomatic() != a.cfg.cyclomatic() + 1;
        }
        o.require(bad == 0, std::to_string(bad) + "/1000 programs break the Halstead identities");
        o.require(bad_m == 0, std::to_string(bad_m) + "/1000 programs: a branch did not add exactly 1 to M");
    }
    {
        std::mt19937_64 rng(100);
        std::normal_distribution<double> noise(0, 1);
        std::size_t bad = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 12 + rng() % 30, k = 2 + rng() % 4, c = 2 + rng() % 3;
            cjscope::fcm::Matrix m(n, k);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < k; ++j) m(i, j) = noise(rng) + 4.0 * static_cast<double>(i % c);
            cjscope::fcm::FitOptions opt;
            opt.clusters = c;
            opt.seed = rng();
            const auto model = cjscope::fcm::fit(cjscope::fcm::standardize(m).data, opt);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0;
                for (std::size_t j = 0; j < c; ++j) s += model.memberships(i, j);
                bad += std::fabs(s - 1) > 1e-9;
            }
            for (std::size_t t = 1; t < model.objective_history.size(); ++t)
                bad += model.objective_history[t] > model.objective_history[t - 1] * (1 + 1e-9) + 1e-12;
        }
        o.require(bad == 0, std::to_string(bad) + " FCM membership-sum or monotonicity violations");
    }
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-100, 100);
        std::size_t bad = 0;
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<double> x(5 + rng() % 20), y(x.size()), ax(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = u(rng), x[i] = u(rng);
            double a = u(rng);
            if (std::fabs(a) < 0.01) a = 1;
            const double b = u(rng);
            for (std::size_t i = 0; i < x.size(); ++i) ax[i] = a * x[i] + b;
            const auto r0 = cjscope::featurestats::pearson(x, y);
            const auto r1 = cjscope::featurestats::pearson(ax, y);
            bad += !r0 || !r1 || !close(*r1, a > 0 ? *r0 : -*r0, 1e-8);
        }
        o.require(bad == 0, std::to_string(bad) + "/500 pearson affine-invariance failures");
    }
    {
        std::mt19937_64 rng(5);
        std::size_t bad = 0;
        auto hex = [&](std::size_t n) {
            std::string s(n, '0');
            for (auto& ch : s) ch = "0123456789abcdef"[rng() % 16];
            return s;
        };
        for (int i = 0; i < 500; ++i) {
            const std::vector<mp::ProtocolFrame> frames{
                mp::Auth{hex(32), "anonymous", (rng() % 2) ? std::optional<std::string>(hex(5)) : std::nullopt,
                         static_cast<std::int64_t>(rng() % 100000)},
                mp::Authed{hex(rng() % 20), rng() >> 8},
                mp::Job{hex(15), hex(2 * (rng() % 80)), hex(8)},
                mp::Submit{hex(15), hex(8), hex(64)},
                mp::HashAccept{rng() >> 4}};
            for (const auto& f : frames) {
                const auto back = mp::classify_frame(mp::serialize(f));
                bad += !back || back->params != f.params;
            }
        }
        o.require(bad == 0, std::to_string(bad) + " frame round-trip failures");
    }
    {
        // relay transparency: the proxy sees exactly the frames the server sees
        mp::DropzoneServer server(mp::ServerConfig{});
        mp::RelayProxy relay(mp::RelayConfig{"127.0.0.1", 0, "127.0.0.1", server.port()});
        std::mt19937_64 rng(77);
        const int sessions = 6;
        for (int s = 0; s < sessions; ++s) {
            mp::MinerConfig mc;
            mc.endpoint = "ws://127.0.0.1:" + std::to_string(relay.port()) + "/";
            mc.site_key = "k4Xq9TnB2vLm8RzW5cYp1HsJ7dFgQ3eA";
            mc.throttle = static_cast<double>(rng() % 8) / 10.0;
            mc.max_shares = 1 + rng() % 3;
            mc.hash_budget = 100000;
            mp::run_miner_client(mc);
            server.wait_for_sessions(s + 1, std::chrono::seconds(5));
            relay.wait_for_sessions(s + 1, std::chrono::seconds(5));
        }
        auto multiset = [](const mp::SessionLog& log) {
            std::vector<std::pair<mp::Direction, std::string>> v;
            for (const auto& e : log.entries) v.emplace_back(e.direction, e.payload);
            std::sort(v.begin(), v.end());
            return v;
        };
        const auto a = server.logs(), b = relay.logs();
        bool same = a.size() == b.size() && a.size() == static_cast<std::size_t>(sessions);
        for (std::size_t i = 0; same && i < a.size(); ++i) same = multiset(a[i]) == multiset(b[i]);
        o.require(same, "relay changed the frame multiset");
    }
    return o;
}

// ---- 8: corpus distributions ----------------------------------------------------

constexpr double pp_tolerance = 0.1;

Outcome distributions() {
    Outcome o;
    const auto report = cjscope::corpus::aggregate(cjscope::corpus::synthetic_corpus());
    o.require(report.total == 5703, "total " + std::to_string(report.total));
    auto check = [&](const std::vector<cjscope::corpus::CountRow>& rows, const std::string& name, double published) {
        const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.name == name; });
        if (it == rows.end()) return o.require(false, name + " missing");
        o.require(std::fabs(it->percent - published) <= pp_tolerance + 1e-9,
                  name + " " + fmt(it->percent) + "% vs " + fmt(published) + "%");
    };
    const std::pair<const char*, double> tlds[] = {
        {".com", 34.1}, {".net", 6.2}, {".si", 6.2}, {".online", 6.1}, {".ru", 4.2}, {".org", 3.3},
        {".sk", 2.9},   {".info", 2.9}, {".br", 2.7}, {".site", 2.0}, {"others", 28.8}};
    for (const auto& [name, pct] : tlds) check(report.tlds, name, pct);
    check(report.platforms, "Coinhive", 81.57);
    check(report.platforms, "JSEcoin", 2.61);
    check(report.currencies, "Monero", 86.37);
    check(report.currencies, "JSEcoin", 2.61);
    check(report.currencies, std::string(cjscope::corpus::no_cryptojacking), 11.01);
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"clustering reproduction", clustering},
        {"device economics", device_economics},
        {"advertising comparison", ad_comparison},
        {"time to 1 XMR", time_to_xmr},
        {"protocol scenario", protocol_scenario},
        {"keyless sites", keyless},
        {"property suites", properties},
        {"corpus distributions", distributions},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        std::printf("%s %d %s\n", o.pass ? "PASS" : "FAIL", index, name);
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        failed += !o.pass;
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
