#include "cjscope/econ.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <charconv>
#include <cmath>
#include <limits>

#include "embedded.hpp"
#include "cjscope/jsmetrics.hpp"
#include "json.hpp"

namespace cjscope::econ {

namespace mp = boost::multiprecision;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double seconds_per_year = 365.0 * 24 * 3600;

void require_positive(double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

// Piecewise-linear through (alpha, value) pairs sorted by alpha; linear
// extrapolation from the outermost segment.
double interpolate(const std::vector<DeviceRow>& rows, double alpha, double DeviceRow::*field) {
    if (rows.empty()) throw std::invalid_argument("device has no measured rows");
    if (rows.size() == 1) return rows.front().*field;
    std::size_t hi = 1;
    while (hi + 1 < rows.size() && alpha > rows[hi].alpha) ++hi;
    const auto& a = rows[hi - 1];
    const auto& b = rows[hi];
    if (alpha == a.alpha) return a.*field;
    if (alpha == b.alpha) return b.*field;
    const double t = (alpha - a.alpha) / (b.alpha - a.alpha);
    return a.*field + t * (b.*field - a.*field);
}

}  // namespace

void EconParams::validate() const {
    require_positive(payout_rate, "payout_rate");
    require_positive(xmr_price, "xmr_price");
    require_positive(electricity_cost, "electricity_cost");
}

double DeviceProfile::cj_end_battery(double alpha) const {
    return std::clamp(interpolate(rows, alpha, &DeviceRow::cj_end_battery), 0.0, baseline_end_battery);
}

double DeviceProfile::hash_rate(double alpha) const {
    return std::max(0.0, interpolate(rows, alpha, &DeviceRow::hash_rate));
}

void DeviceProfile::validate() const {
    const auto where = "device '" + name + "': ";
    require_positive(power_draw, "power_draw");
    require_positive(recharge_time_per_percent, "recharge_time_per_percent");
    require_positive(session_minutes, "session_minutes");
    if (!(baseline_end_battery >= 0 && baseline_end_battery <= start_battery && start_battery <= 100))
        throw std::invalid_argument(where + "need 0 <= b_n <= b_s <= 100");
    if (rows.empty()) throw std::invalid_argument(where + "no measured rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.alpha < 0 || r.alpha > 1) throw std::invalid_argument(where + "alpha outside [0, 1]");
        if (r.cj_end_battery < 0 || r.cj_end_battery > baseline_end_battery)
            throw std::invalid_argument(where + "need 0 <= b_c <= b_n");
        if (r.hash_rate < 0) throw std::invalid_argument(where + "negative hash rate");
        if (i > 0) {
            const auto& p = rows[i - 1];
            if (r.alpha <= p.alpha) throw std::invalid_argument(where + "rows must ascend in alpha");
            if (r.hash_rate > p.hash_rate) throw std::invalid_argument(where + "hash rate must not grow with alpha");
            if (r.cj_end_battery < p.cj_end_battery)
                throw std::invalid_argument(where + "b_c must not shrink with alpha");
        }
    }
}

namespace {

DeviceProfile device_from_json(const json& d) {
    DeviceProfile p;
    p.name = d.at("name").get<std::string>();
    p.power_draw = d.at("power_draw").get<double>();
    p.recharge_time_per_percent = d.at("recharge_time_per_percent").get<double>();
    p.session_minutes = d.at("session_minutes").get<double>();
    p.baseline_end_battery = d.at("baseline_end_battery").get<double>();
    p.start_battery = d.value("start_battery", 100.0);
    for (const auto& r : d.at("rows")) {
        DeviceRow row;
        row.alpha = r.at("alpha").get<double>();
        row.hash_rate = r.at("hash_rate").get<double>();
        row.cj_end_battery = r.at("cj_end_battery").get<double>();
        if (auto rep = r.find("reported"); rep != r.end()) {
            row.reported.profit_usd = rep->value("profit_usd", 0.0);
            row.reported.loss_usd = rep->value("loss_usd", 0.0);
            row.reported.gap_usd = rep->value("gap_usd", 0.0);
            row.reported.years = rep->value("years", 0.0);
        }
        p.rows.push_back(row);
    }
    std::sort(p.rows.begin(), p.rows.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
    p.validate();
    return p;
}

EconConfig parse_config(std::string_view text, const EconConfig* defaults) {
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("econ config: not a JSON object");
    EconConfig c = defaults ? *defaults : EconConfig{};
    try {
        if (auto p = j.find("params"); p != j.end()) {
            c.params.payout_rate = p->value("payout_rate", c.params.payout_rate);
            c.params.xmr_price = p->value("xmr_price", c.params.xmr_price);
            c.params.electricity_cost = p->value("electricity_cost", c.params.electricity_cost);
        }
        if (auto d = j.find("devices"); d != j.end()) {
            c.devices.clear();
            for (const auto& dev : *d) c.devices.push_back(device_from_json(dev));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("econ config: ") + e.what());
    }
    c.params.validate();
    return c;
}

}  // namespace

EconConfig EconConfig::builtin() {
    static const EconConfig cfg = parse_config(embedded::lookup("devices.json"), nullptr);
    return cfg;
}

EconConfig EconConfig::from_json(std::string_view text) {
    const auto base = builtin();
    return parse_config(text, &base);
}

const DeviceProfile& EconConfig::device(std::string_view name) const {
    for (const auto& d : devices)
        if (d.name == name) return d;
    std::string known;
    for (const auto& d : devices) known += (known.empty() ? "" : ", ") + d.name;
    throw std::invalid_argument("unknown device '" + std::string(name) + "' (known: " + known + ")");
}

Profit session_profit(double hash_rate, double seconds, const EconParams& params) {
    if (hash_rate < 0 || seconds < 0) throw std::invalid_argument("hash rate and duration must be non-negative");
    Profit p;
    p.xmr = params.payout_rate * (hash_rate * seconds) / 1e6;
    p.usd = p.xmr * params.xmr_price;
    return p;
}

double session_loss(double watts, double recharge_hours_per_percent, double baseline_end, double cj_end,
                    const EconParams& params) {
    return params.electricity_cost * watts * recharge_hours_per_percent * (baseline_end - cj_end);
}

double session_loss(const DeviceProfile& device, double alpha, const EconParams& params) {
    return session_loss(device.power_draw, device.recharge_time_per_percent, device.baseline_end_battery,
                        device.cj_end_battery(alpha), params);
}

double hashes_per_xmr(const EconParams& params) { return 1e6 / params.payout_rate; }

double time_to_one_xmr(double hash_rate, const EconParams& params) {
    if (!(hash_rate > 0)) throw ZeroHashRate("time to one XMR needs a positive hash rate");
    return hashes_per_xmr(params) / (hash_rate * seconds_per_year);
}

SessionEconomics session_economics(const DeviceProfile& device, double alpha, const EconParams& params) {
    SessionEconomics e;
    const double h = device.hash_rate(alpha);
    e.profit = session_profit(h, device.session_minutes * 60.0, params);
    e.loss_usd = session_loss(device, alpha, params);
    e.gap_usd = e.loss_usd - e.profit.usd;
    e.years = h > 0 ? time_to_one_xmr(h, params) : std::numeric_limits<double>::infinity();
    return e;
}

double parse_duration(std::string_view text) {
    double total = 0;
    int parts = 0;
    while (true) {
        const auto colon = text.find(':');
        const auto field = text.substr(0, colon);
        unsigned v = 0;
        auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || ec != std::errc{} || p != field.data() + field.size())
            throw std::invalid_argument("bad duration '" + std::string(text) + "', expected mm:ss");
        total = total * 60 + v;
        ++parts;
        if (colon == std::string_view::npos) break;
        text.remove_prefix(colon + 1);
    }
    if (parts < 2 || parts > 3) throw std::invalid_argument("bad duration, expected mm:ss or hh:mm:ss");
    return total;
}

double site_monthly_revenue(double visits, double avg_duration_seconds, double visitor_hash_rate,
                            const EconParams& params) {
    if (visits < 0 || avg_duration_seconds < 0 || visitor_hash_rate < 0)
        throw std::invalid_argument("site revenue inputs must be non-negative");
    const double total_hashes = visits * avg_duration_seconds * visitor_hash_rate;
    return params.payout_rate * total_hashes / 1e6 * params.xmr_price;
}

namespace {

std::vector<Site> sites_from_json(const json& arr) {
    std::vector<Site> out;
    for (const auto& s : arr) {
        Site site;
        site.domain = s.at("domain").get<std::string>();
        site.visits = s.at("visits").get<double>();
        site.duration = s.at("duration").get<std::string>();
        site.reported_usd = s.value("reported_usd", 0.0);
        if (auto ad = s.find("ad_revenue_usd"); ad != s.end() && !ad->is_null()) site.ad_revenue_usd = ad->get<double>();
        parse_duration(site.duration);
        out.push_back(std::move(site));
    }
    return out;
}

}  // namespace

SiteTable SiteTable::from_json(std::string_view text) {
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("site table: not a JSON object");
    SiteTable t;
    try {
        t.visitor_hash_rate = j.value("visitor_hash_rate", 20.0);
        t.top_sites = sites_from_json(j.value("top_sites", json::array()));
        t.cryptojacking_sites = sites_from_json(j.value("cryptojacking_sites", json::array()));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("site table: ") + e.what());
    }
    return t;
}

SiteTable SiteTable::builtin() {
    static const SiteTable t = from_json(embedded::lookup("sites.json"));
    return t;
}

std::vector<BatterySample> simulate_battery(const DeviceProfile& device, std::optional<double> alpha,
                                            double duration_minutes, double step_seconds) {
    if (duration_minutes < 0) throw std::invalid_argument("duration must be non-negative");
    require_positive(step_seconds, "step");
    const double bs = device.start_battery;
    const double end = alpha ? device.cj_end_battery(*alpha) : device.baseline_end_battery;
    const double dt = device.session_minutes;
    // baseline (bs - bn) plus surcharge (bn - bc), both spread evenly over dt
    auto level = [&](double minutes) {
        if (minutes == dt) return end;
        return std::max(0.0, bs - (bs - end) * (minutes / dt));
    };

    std::vector<BatterySample> out;
    const double step = step_seconds / 60.0;
    for (std::size_t i = 0;; ++i) {
        const double t = static_cast<double>(i) * step;
        if (t >= duration_minutes) break;
        out.push_back({t, level(t)});
    }
    out.push_back({duration_minutes, level(duration_minutes)});
    return out;
}

std::string trajectory_csv(const std::vector<BatterySample>& samples) {
    std::string out = "minutes,battery_percent\n";
    for (const auto& s : samples)
        out += jsmetrics::format_number(s.minutes) + "," + jsmetrics::format_number(s.percent) + "\n";
    return out;
}

PowModel pow_block_model(std::string_view target, double network_hash_rate) {
    mp::cpp_int t;
    try {
        t = mp::cpp_int(std::string(target));
    } catch (const std::exception&) {
        throw std::invalid_argument("target is not an integer: '" + std::string(target) + "'");
    }
    if (t <= 0) throw ZeroTarget("target must be positive");
    const mp::cpp_int two256 = mp::cpp_int(1) << 256;
    if (t > two256) throw std::invalid_argument("target exceeds 2^256");
    require_positive(network_hash_rate, "network hash rate");

    PowModel m;
    m.target = t.str();
    // exact ratio target / 2^256 rounded once to double
    const auto bits = mp::msb(t);
    const int shift = static_cast<int>(bits) > 60 ? static_cast<int>(bits) - 60 : 0;
    const double mantissa = static_cast<double>(static_cast<std::uint64_t>(t >> shift));
    m.block_probability = std::ldexp(mantissa, shift - 256);
    m.expected_hashes = 1.0 / m.block_probability;
    m.network_hash_rate = network_hash_rate;
    m.block_time = 1.0 / (m.block_probability * network_hash_rate);
    return m;
}

PowModel pow_block_model_pow2(unsigned exponent, double network_hash_rate) {
    if (exponent > 256) throw std::invalid_argument("target exceeds 2^256");
    return pow_block_model((mp::cpp_int(1) << exponent).str(), network_hash_rate);
}

namespace {

Delta delta(std::string quantity, double computed, double reported, double tolerance) {
    Delta d{std::move(quantity), computed, reported, 0, false};
    d.relative = reported != 0 ? (computed - reported) / reported : 0;
    d.flagged = std::fabs(d.relative) > tolerance;
    return d;
}

}  // namespace

EconReport build_report(const EconConfig& config, const SiteTable& sites, std::optional<std::string> device,
                        std::optional<double> alpha) {
    config.params.validate();
    EconReport r;
    r.params = config.params;
    auto add = [&](const DeviceProfile& d, double a, const DeviceRow* row) {
        DeviceReport dr;
        dr.device = d.name;
        dr.alpha = a;
        dr.hash_rate = d.hash_rate(a);
        dr.computed = session_economics(d, a, config.params);
        if (row) {
            const double tol = r.device_tolerance;
            dr.deltas.push_back(delta("profit_usd", dr.computed.profit.usd, row->reported.profit_usd, tol));
            dr.deltas.push_back(delta("loss_usd", dr.computed.loss_usd, row->reported.loss_usd, tol));
            dr.deltas.push_back(delta("gap_usd", dr.computed.gap_usd, row->reported.gap_usd, tol));
            dr.deltas.push_back(delta("years", dr.computed.years, row->reported.years, tol));
        }
        r.devices.push_back(std::move(dr));
    };
    std::vector<const DeviceProfile*> selected;
    if (device)
        selected.push_back(&config.device(*device));
    else
        for (const auto& d : config.devices) selected.push_back(&d);
    for (const auto* d : selected) {
        if (alpha) {
            if (*alpha < 0 || *alpha > 1) throw std::invalid_argument("alpha must be in [0, 1]");
            const auto it = std::find_if(d->rows.begin(), d->rows.end(),
                                         [&](const DeviceRow& row) { return std::fabs(row.alpha - *alpha) < 1e-12; });
            add(*d, *alpha, it == d->rows.end() ? nullptr : &*it);
        } else {
            for (const auto& row : d->rows) add(*d, row.alpha, &row);
        }
    }
    auto add_sites = [&](const std::vector<Site>& list, const char* table) {
        for (const auto& s : list) {
            SiteReport sr;
            sr.domain = s.domain;
            sr.table = table;
            sr.computed_usd =
                site_monthly_revenue(s.visits, parse_duration(s.duration), sites.visitor_hash_rate, config.params);
            sr.delta = delta("revenue_usd", sr.computed_usd, s.reported_usd, r.site_tolerance);
            sr.ad_revenue_usd = s.ad_revenue_usd;
            r.sites.push_back(std::move(sr));
        }
    };
    add_sites(sites.top_sites, "top");
    add_sites(sites.cryptojacking_sites, "cryptojacking");
    return r;
}

namespace {

ordered_json delta_json(const Delta& d) {
    ordered_json j;
    j["quantity"] = d.quantity;
    j["computed"] = d.computed;
    j["reported"] = d.reported;
    j["relative"] = d.relative;
    j["flagged"] = d.flagged;
    return j;
}

}  // namespace

std::string to_json(const EconReport& r, int indent) {
    ordered_json j;
    j["params"] = {{"payout_rate", r.params.payout_rate},
                   {"xmr_price", r.params.xmr_price},
                   {"electricity_cost", r.params.electricity_cost}};
    j["hashes_per_xmr"] = hashes_per_xmr(r.params);
    j["device_tolerance"] = r.device_tolerance;
    j["site_tolerance"] = r.site_tolerance;
    auto& devices = j["devices"] = ordered_json::array();
    for (const auto& d : r.devices) {
        ordered_json dj;
        dj["device"] = d.device;
        dj["alpha"] = d.alpha;
        dj["hash_rate"] = d.hash_rate;
        dj["profit_xmr"] = d.computed.profit.xmr;
        dj["profit_usd"] = d.computed.profit.usd;
        dj["loss_usd"] = d.computed.loss_usd;
        dj["gap_usd"] = d.computed.gap_usd;
        dj["years"] = std::isfinite(d.computed.years) ? ordered_json(d.computed.years) : ordered_json(nullptr);
        auto& deltas = dj["deltas"] = ordered_json::array();
        for (const auto& x : d.deltas) deltas.push_back(delta_json(x));
        devices.push_back(std::move(dj));
    }
    auto& sites = j["sites"] = ordered_json::array();
    for (const auto& s : r.sites) {
        ordered_json sj;
        sj["domain"] = s.domain;
        sj["table"] = s.table;
        sj["computed_usd"] = s.computed_usd;
        sj["delta"] = delta_json(s.delta);
        sj["ad_revenue_usd"] = s.ad_revenue_usd ? ordered_json(*s.ad_revenue_usd) : ordered_json(nullptr);
        sites.push_back(std::move(sj));
    }
    return j.dump(indent);
}

}  // namespace cjscope::econ
