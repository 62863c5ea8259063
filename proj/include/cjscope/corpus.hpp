#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace cjscope::corpus {

enum class TldType { Generic, Country, New };
std::string_view to_string(TldType t);

/// ".com", ".si", ... for a host name; empty for a bare label.
std::string tld_of(std::string_view domain);
/// Embedded table of the common generic and new gTLDs; any other two-letter
/// TLD is a country code, anything else falls back to generic.
TldType classify_tld(std::string_view tld);

struct SiteRecord {
    std::string domain;
    std::string tld;
    TldType tld_type = TldType::Generic;
    std::optional<std::string> platform;
    std::optional<std::string> currency;
    std::optional<std::string> site_key;
    std::optional<double> throttle;  // in [0, 1]
    bool active = false;             // a miner that has a key to authenticate with

    bool operator==(const SiteRecord&) const = default;
};

struct PlatformSignature {
    std::string platform;
    std::string currency;
    std::vector<std::string> script_src;   // case-insensitive substrings of <script src>
    std::vector<std::string> constructor;  // regexes over inline script text
    std::string key;                       // regex, first group is the key
    std::string throttle;                  // regex, first group is the value
};

/// Signatures in priority order: when several platforms match a page the
/// earliest listed wins.
class SignatureDb {
public:
    SignatureDb() = default;
    explicit SignatureDb(int version, std::vector<PlatformSignature> platforms);
    static SignatureDb builtin();
    static SignatureDb from_json(std::string_view text);  // throws invalid_argument

    int version() const { return version_; }
    const std::vector<PlatformSignature>& platforms() const { return platforms_; }
    std::optional<std::string> currency_of(std::string_view platform) const;

    struct Compiled {
        std::vector<std::regex> constructor;
        std::regex key, throttle;
    };
    const Compiled& compiled(std::size_t i) const { return compiled_[i]; }

private:
    int version_ = 0;
    std::vector<PlatformSignature> platforms_;
    std::vector<Compiled> compiled_;
};

struct ScriptTag {
    std::string attributes;  // raw text between "<script" and ">"
    std::string src;         // empty when absent
    std::string body;
};
/// Script elements in document order; tolerant of unclosed tags and case.
std::vector<ScriptTag> extract_scripts(std::string_view html);

/// Which platform a page mines for, with key and throttle when present. A page
/// whose miner has no key is recorded but inactive: it can connect, not mine.
/// The result does not depend on the order of script tags.
SiteRecord scan_html(std::string_view html, const SignatureDb& db, std::string domain = {});

/// Scans every *.html / *.htm under `dir` (recursively) on `threads` workers;
/// the domain is the file stem. Records come back sorted by path.
std::vector<SiteRecord> scan_directory(const std::filesystem::path& dir, const SignatureDb& db, unsigned threads = 0);

struct CountRow {
    std::string name;
    std::string type;  // TLD type for TLD rows, currency for platform rows
    std::size_t count = 0;
    double percent = 0;
};

struct DistributionReport {
    std::size_t total = 0;
    std::size_t active = 0;
    std::vector<CountRow> tlds;        // top N by count, then "others"
    std::vector<CountRow> platforms;   // by count, then "No CJ"
    std::vector<CountRow> currencies;  // by count, then "No CJ"
};

inline constexpr std::string_view no_cryptojacking = "No CJ";

/// Counts and percentages; ties are broken by name so the report does not
/// depend on record order.
DistributionReport aggregate(const std::vector<SiteRecord>& records, std::size_t top_tlds = 10);

/// A page using `platform`'s embed snippet (or a plain page for nullopt).
std::string synthetic_page(const std::optional<std::string>& platform, const std::string& key,
                           std::optional<double> throttle);

/// 5,703 generated pages whose scan results reproduce the published TLD and
/// platform marginals.
std::vector<SiteRecord> synthetic_corpus(std::uint64_t seed = 1);

std::string to_json(const SiteRecord& record);  // one line
SiteRecord record_from_json(std::string_view line);
std::string to_jsonl(const std::vector<SiteRecord>& records);
std::vector<SiteRecord> records_from_jsonl(std::string_view text);
std::string to_json(const DistributionReport& report, int indent = 2);

}  // namespace cjscope::corpus
