#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cjscope::econ {

struct ZeroHashRate : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ZeroTarget : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EconParams {
    double payout_rate = 2.894e-5;      // XMR per 10^6 hashes
    double xmr_price = 200.0;           // USD per XMR
    double electricity_cost = 6.418e-5; // USD per watt-hour
    void validate() const;              // all positive, else invalid_argument
};

/// One measured throttle setting of a device, with the published figures
/// kept for comparison.
struct DeviceRow {
    double alpha = 0;
    double hash_rate = 0;       // hashes/second
    double cj_end_battery = 0;  // percent after the session
    struct Reported {
        double profit_usd = 0, loss_usd = 0, gap_usd = 0, years = 0;
    } reported;
};

struct DeviceProfile {
    std::string name;
    double power_draw = 0;                 // W
    double recharge_time_per_percent = 0;  // hours per battery percent
    double session_minutes = 0;
    double baseline_end_battery = 0;  // b_n, percent, no mining
    double start_battery = 100;       // b_s
    std::vector<DeviceRow> rows;      // ascending alpha

    /// Piecewise-linear in alpha through the rows, extrapolated past the ends
    /// and clamped to [0, b_n] (battery) or [0, inf) (hash rate).
    double cj_end_battery(double alpha) const;
    double hash_rate(double alpha) const;

    /// 0 <= b_c <= b_n <= b_s <= 100, h non-increasing and b_c non-decreasing in alpha.
    void validate() const;
};

struct EconConfig {
    EconParams params;
    std::vector<DeviceProfile> devices;

    static EconConfig builtin();
    /// Same shape as the built-in config; missing "params" keys keep defaults
    /// and a config without "devices" keeps the built-in devices.
    static EconConfig from_json(std::string_view text);
    const DeviceProfile& device(std::string_view name) const;  // throws invalid_argument
};

struct Profit {
    double xmr = 0;
    double usd = 0;
};

/// h hashes/second sustained for `seconds`.
Profit session_profit(double hash_rate, double seconds, const EconParams& params);

/// C * W * t_r * (b_n - b_c): the electricity needed to recharge what mining drained.
double session_loss(double watts, double recharge_hours_per_percent, double baseline_end, double cj_end,
                    const EconParams& params);
double session_loss(const DeviceProfile& device, double alpha, const EconParams& params);

double hashes_per_xmr(const EconParams& params);
/// Years of mining at h hashes/second to earn one XMR; throws ZeroHashRate for h <= 0.
double time_to_one_xmr(double hash_rate, const EconParams& params);

struct SessionEconomics {
    Profit profit;
    double loss_usd = 0;
    double gap_usd = 0;  // loss - profit
    double years = 0;
};
SessionEconomics session_economics(const DeviceProfile& device, double alpha, const EconParams& params);

/// "mm:ss" (or "hh:mm:ss") to seconds. Seconds above 59 are taken at face value.
double parse_duration(std::string_view text);

double site_monthly_revenue(double visits, double avg_duration_seconds, double visitor_hash_rate,
                            const EconParams& params);

struct Site {
    std::string domain;
    double visits = 0;  // per month
    std::string duration;
    double reported_usd = 0;
    std::optional<double> ad_revenue_usd;
};

struct SiteTable {
    double visitor_hash_rate = 20;
    std::vector<Site> top_sites;
    std::vector<Site> cryptojacking_sites;

    static SiteTable builtin();
    static SiteTable from_json(std::string_view text);
};

struct BatterySample {
    double minutes = 0;
    double percent = 0;
};

/// Battery level every `step_seconds` from b_s: the baseline drain reaches b_n
/// at the profile's session length, and mining at `alpha` adds a surcharge
/// that reaches b_c(alpha). nullopt alpha means no mining. The level stops at
/// 0; the final sample sits exactly at `duration_minutes`.
std::vector<BatterySample> simulate_battery(const DeviceProfile& device, std::optional<double> alpha,
                                            double duration_minutes, double step_seconds = 30);
std::string trajectory_csv(const std::vector<BatterySample>& samples);

/// Block discovery for a 256-bit target given as decimal or 0x-hex.
struct PowModel {
    std::string target;  // decimal
    double block_probability = 0;  // target / 2^256
    double expected_hashes = 0;    // 1 / P_r
    double network_hash_rate = 0;
    double block_time = 0;         // seconds, 1 / (P_r * H_r)
};
PowModel pow_block_model(std::string_view target, double network_hash_rate);
/// Convenience for targets of the form 2^exponent.
PowModel pow_block_model_pow2(unsigned exponent, double network_hash_rate);

struct Delta {
    std::string quantity;  // "profit_usd", ...
    double computed = 0;
    double reported = 0;
    double relative = 0;  // (computed - reported) / reported
    bool flagged = false;
};

struct DeviceReport {
    std::string device;
    double alpha = 0;
    double hash_rate = 0;
    SessionEconomics computed;
    std::vector<Delta> deltas;
};

struct SiteReport {
    std::string domain;
    std::string table;  // "top" or "cryptojacking"
    double computed_usd = 0;
    Delta delta;
    std::optional<double> ad_revenue_usd;
};

struct EconReport {
    EconParams params;
    std::vector<DeviceReport> devices;
    std::vector<SiteReport> sites;
    double device_tolerance = 0.05;
    double site_tolerance = 0.03;
};

/// Every device row (optionally one device / one alpha) and every site, with
/// relative deltas against the published figures flagged beyond tolerance.
EconReport build_report(const EconConfig& config, const SiteTable& sites, std::optional<std::string> device = {},
                        std::optional<double> alpha = {});
std::string to_json(const EconReport& report, int indent = 2);

}  // namespace cjscope::econ
