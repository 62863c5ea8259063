#include "cjscope/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "embedded.hpp"
#include "json.hpp"

namespace cjscope::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// .online is listed as generic to agree with the published TLD table.
const std::set<std::string, std::less<>> generic_tlds{"com", "net",  "org",  "info", "biz",    "edu", "gov",
                                                      "mil", "int",  "pro",  "name", "mobi",   "aero", "asia",
                                                      "cat", "coop", "jobs", "tel",  "travel", "online"};
const std::set<std::string, std::less<>> new_tlds{
    "site",  "xyz",    "top",   "club",  "win",     "stream",   "date",  "space",  "website", "tech",
    "store", "live",   "fun",   "icu",   "vip",     "shop",     "app",   "blog",   "cloud",   "download",
    "loan",  "review", "bid",   "trade", "party",   "science",  "men",   "work",   "racing",  "accountant",
    "link",  "click",  "news",  "today", "world",   "life",     "host",  "press",  "guru",    "ninja",
    "media", "email",  "games", "video", "network", "digital", "pw",    "cash",   "money",   "stream"};

}  // namespace

std::string_view to_string(TldType t) {
    switch (t) {
        case TldType::Generic: return "generic";
        case TldType::Country: return "country";
        case TldType::New: return "new";
    }
    return "?";
}

std::string tld_of(std::string_view domain) {
    while (!domain.empty() && domain.back() == '.') domain.remove_suffix(1);
    const auto dot = domain.rfind('.');
    if (dot == std::string_view::npos || dot + 1 == domain.size()) return {};
    return "." + lower(domain.substr(dot + 1));
}

TldType classify_tld(std::string_view tld) {
    if (tld.starts_with('.')) tld.remove_prefix(1);
    const auto t = lower(tld);
    if (new_tlds.contains(t)) return TldType::New;
    if (generic_tlds.contains(t)) return TldType::Generic;
    if (t.size() == 2 && std::isalpha(static_cast<unsigned char>(t[0])) && std::isalpha(static_cast<unsigned char>(t[1])))
        return TldType::Country;
    return TldType::Generic;
}

SignatureDb::SignatureDb(int version, std::vector<PlatformSignature> platforms)
    : version_(version), platforms_(std::move(platforms)) {
    constexpr auto flags = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;
    for (const auto& p : platforms_) {
        Compiled c;
        try {
            for (const auto& ctor : p.constructor) c.constructor.emplace_back(ctor, flags);
            c.key = std::regex(p.key, flags);
            c.throttle = std::regex(p.throttle, flags);
        } catch (const std::regex_error& e) {
            throw std::invalid_argument("signature for " + p.platform + ": bad regex: " + e.what());
        }
        if (c.key.mark_count() < 1 || c.throttle.mark_count() < 1)
            throw std::invalid_argument("signature for " + p.platform + ": key and throttle need a capture group");
        compiled_.push_back(std::move(c));
    }
}

SignatureDb SignatureDb::from_json(std::string_view text) {
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("signature db: not a JSON object");
    std::vector<PlatformSignature> platforms;
    int version = 0;
    try {
        version = j.at("version").get<int>();
        for (const auto& p : j.at("platforms")) {
            PlatformSignature s;
            s.platform = p.at("platform").get<std::string>();
            s.currency = p.at("currency").get<std::string>();
            s.script_src = p.value("script_src", std::vector<std::string>{});
            s.constructor = p.value("constructor", std::vector<std::string>{});
            s.key = p.at("key").get<std::string>();
            s.throttle = p.at("throttle").get<std::string>();
            platforms.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("signature db: ") + e.what());
    }
    return SignatureDb(version, std::move(platforms));
}

SignatureDb SignatureDb::builtin() {
    static const SignatureDb db = from_json(embedded::lookup("signatures.json"));
    return db;
}

std::optional<std::string> SignatureDb::currency_of(std::string_view platform) const {
    for (const auto& p : platforms_)
        if (p.platform == platform) return p.currency;
    return std::nullopt;
}

std::vector<ScriptTag> extract_scripts(std::string_view html) {
    const std::string lowered = lower(html);
    std::vector<ScriptTag> out;
    std::size_t pos = 0;
    while ((pos = lowered.find("<script", pos)) != std::string::npos) {
        const std::size_t after = pos + 7;
        if (after < lowered.size() && !std::isspace(static_cast<unsigned char>(lowered[after])) &&
            lowered[after] != '>' && lowered[after] != '/') {
            pos = after;  // e.g. <scripts>
            continue;
        }
        const auto open_end = lowered.find('>', after);
        if (open_end == std::string::npos) break;
        ScriptTag tag;
        tag.attributes = std::string(html.substr(after, open_end - after));
        auto close = lowered.find("</script", open_end + 1);
        if (close == std::string::npos) close = lowered.size();
        tag.body = std::string(html.substr(open_end + 1, close - open_end - 1));

        static const std::regex src_re(R"RE(\bsrc\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+)))RE", std::regex::icase);
        std::smatch m;
        if (std::regex_search(tag.attributes, m, src_re))
            tag.src = m[1].matched ? m[1].str() : m[2].matched ? m[2].str() : m[3].str();
        out.push_back(std::move(tag));
        pos = close;
    }
    return out;
}

namespace {

bool script_matches(const ScriptTag& s, const PlatformSignature& sig, const SignatureDb::Compiled& c) {
    if (!s.src.empty()) {
        const auto src = lower(s.src);
        for (const auto& needle : sig.script_src)
            if (src.find(lower(needle)) != std::string::npos) return true;
    }
    for (const auto& re : c.constructor)
        if (std::regex_search(s.body, re)) return true;
    return false;
}

std::vector<std::string> captures(const std::string& text, const std::regex& re) {
    std::vector<std::string> out;
    for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) out.push_back((*it)[1].str());
    return out;
}

}  // namespace

SiteRecord scan_html(std::string_view html, const SignatureDb& db, std::string domain) {
    SiteRecord r;
    r.domain = std::move(domain);
    r.tld = tld_of(r.domain);
    r.tld_type = classify_tld(r.tld);

    const auto scripts = extract_scripts(html);
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < db.platforms().size() && !hit; ++i)
        for (const auto& s : scripts)
            if (script_matches(s, db.platforms()[i], db.compiled(i))) {
                hit = i;
                break;
            }
    if (!hit) return r;

    const auto& sig = db.platforms()[*hit];
    const auto& c = db.compiled(*hit);
    r.platform = sig.platform;
    r.currency = sig.currency;
    // Candidates from every script tag; taking the smallest keeps the result
    // independent of tag order when a page embeds more than one snippet.
    std::vector<std::string> keys;
    std::vector<double> throttles;
    for (const auto& s : scripts) {
        const std::string text = "<script" + s.attributes + ">" + s.body;
        for (auto& k : captures(text, c.key)) keys.push_back(std::move(k));
        for (const auto& t : captures(text, c.throttle)) {
            double v = 0;
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec == std::errc{} && p == t.data() + t.size() && v >= 0 && v <= 1) throttles.push_back(v);
        }
    }
    if (!keys.empty()) r.site_key = *std::min_element(keys.begin(), keys.end());
    if (!throttles.empty()) r.throttle = *std::min_element(throttles.begin(), throttles.end());
    r.active = r.site_key.has_value();
    return r;
}

std::vector<SiteRecord> scan_directory(const std::filesystem::path& dir, const SignatureDb& db, unsigned threads) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = lower(e.path().extension().string());
        if (ext == ".html" || ext == ".htm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<SiteRecord> out(files.size());
    std::vector<std::string> errors(files.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < files.size();) {
            std::ifstream in(files[i], std::ios::binary);
            if (!in) {
                errors[i] = "cannot read " + files[i].string();
                continue;
            }
            std::ostringstream ss;
            ss << in.rdbuf();
            out[i] = scan_html(ss.str(), db, files[i].stem().string());
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(files.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
        work();
    }
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
    return out;
}

DistributionReport aggregate(const std::vector<SiteRecord>& records, std::size_t top_tlds) {
    DistributionReport rep;
    rep.total = records.size();
    if (records.empty()) return rep;

    std::map<std::string, std::size_t> tlds, platforms, currencies;
    std::map<std::string, std::string> platform_currency;
    std::size_t none = 0;
    for (const auto& r : records) {
        ++tlds[r.tld.empty() ? "(none)" : r.tld];
        rep.active += r.active;
        if (r.platform) {
            ++platforms[*r.platform];
            ++currencies[r.currency.value_or("?")];
            platform_currency[*r.platform] = r.currency.value_or("?");
        } else {
            ++none;
        }
    }
    const double total = static_cast<double>(rep.total);
    auto row = [&](std::string name, std::string type, std::size_t count) {
        return CountRow{std::move(name), std::move(type), count, 100.0 * static_cast<double>(count) / total};
    };
    auto ranked = [](const std::map<std::string, std::size_t>& m) {
        std::vector<std::pair<std::string, std::size_t>> v(m.begin(), m.end());
        std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        return v;  // map order already sorts ties by name
    };

    std::size_t shown = 0;
    for (const auto& [name, count] : ranked(tlds)) {
        if (rep.tlds.size() == top_tlds) break;
        rep.tlds.push_back(row(name, std::string(to_string(classify_tld(name))), count));
        shown += count;
    }
    if (shown < rep.total) rep.tlds.push_back(row("others", "", rep.total - shown));

    for (const auto& [name, count] : ranked(platforms)) rep.platforms.push_back(row(name, platform_currency[name], count));
    for (const auto& [name, count] : ranked(currencies)) rep.currencies.push_back(row(name, "", count));
    if (none) {
        rep.platforms.push_back(row(std::string(no_cryptojacking), "", none));
        rep.currencies.push_back(row(std::string(no_cryptojacking), "", none));
    }
    return rep;
}

std::string synthetic_page(const std::optional<std::string>& platform, const std::string& key,
                           std::optional<double> throttle) {
    const std::string opts = throttle ? ", {throttle: " + std::to_string(*throttle).substr(0, 3) + "}" : "";
    const std::string arg = key.empty() ? "" : "'" + key + "'";
    auto page = [](const std::string& scripts) {
        return "<!DOCTYPE html>\n<html><head><title>Welcome</title>\n"
               "<script src=\"/static/app.js\"></script>\n" +
               scripts + "</head><body><p>Hello.</p></body></html>\n";
    };
    auto snippet = [&](const std::string& src, const std::string& ctor) {
        const std::string args = arg.empty() ? (opts.empty() ? "" : opts.substr(2)) : arg + opts;
        return "<script src=\"" + src + "\"></script>\n<script>\n  var miner = new " + ctor + "(" + args +
               ");\n  miner.start();\n</script>\n";
    };
    if (!platform) return page("<script>document.title += '!';</script>\n");
    const auto& p = *platform;
    if (p == "Coinhive") return page(snippet("./Welcome_files/coinhive.min.js", "coinhive.Anonymous"));
    if (p == "Authedmine") return page(snippet("https://authedmine.com/lib/authedmine.min.js", "AuthedMine.Anonymous"));
    if (p == "Crypto-Loot") return page(snippet("https://crypto-loot.com/lib/miner.min.js", "CRLT.Anonymous"));
    if (p == "deepMiner") return page(snippet("/js/deepMiner.min.js", "deepMiner.Anonymous"));
    if (p == "Hashing") return page(snippet("https://hashing.win/scripts/min.js", "Hashing.Anonymous"));
    if (p == "Freecontent") return page(snippet("https://freecontent.stream/lib.js", "Client.Anonymous"));
    if (p == "Miner") return page(snippet("https://webminepool.com/lib/base.js", "Miner.Anonymous"));
    if (p == "JSEcoin") {
        const std::string id = key.empty() ? "" : key + "/";
        const std::string t = throttle ? " data-throttle=\"" + std::to_string(*throttle).substr(0, 3) + "\"" : "";
        return page("<script src=\"https://load.jsecoin.com/load/" + id + "example.com/0/0/\"" + t +
                    "></script>\n");
    }
    throw std::invalid_argument("no page template for platform '" + p + "'");
}

std::vector<SiteRecord> synthetic_corpus(std::uint64_t seed) {
    // published marginals; "others" is spread over TLDs rarer than .site
    std::vector<std::pair<std::string, std::size_t>> tld_counts{
        {".com", 1945}, {".net", 359}, {".si", 358}, {".online", 349}, {".ru", 242},
        {".org", 191},  {".sk", 169},  {".info", 169}, {".br", 157},  {".site", 116}};
    const std::vector<std::string> others{".de", ".fr", ".it", ".in", ".pl", ".es", ".uk", ".nl", ".io", ".me",
                                          ".co", ".xyz", ".club", ".top", ".win", ".eu", ".cz", ".ua", ".tv", ".biz",
                                          ".us", ".pro", ".cc", ".ro", ".hu", ".gr", ".pt", ".ar", ".mx", ".vn"};
    constexpr std::size_t others_total = 1648;
    for (std::size_t i = 0; i < others.size(); ++i)
        tld_counts.emplace_back(others[i], others_total / others.size() + (i < others_total % others.size()));

    const std::vector<std::pair<std::optional<std::string>, std::size_t>> platform_counts{
        {"Coinhive", 4652}, {"Hashing", 68},  {"deepMiner", 56},  {"Freecontent", 39}, {"Crypto-Loot", 38},
        {"Miner", 38},      {"Authedmine", 35}, {"JSEcoin", 149}, {std::nullopt, 628}};

    std::vector<std::string> tlds;
    for (const auto& [t, n] : tld_counts) tlds.insert(tlds.end(), n, t);
    std::vector<std::optional<std::string>> platforms;
    for (const auto& [p, n] : platform_counts) platforms.insert(platforms.end(), n, p);
    if (tlds.size() != platforms.size()) throw std::logic_error("synthetic corpus marginals disagree");

    std::mt19937_64 rng(seed);
    std::shuffle(platforms.begin(), platforms.end(), rng);
    static constexpr char alnum[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    const auto db = SignatureDb::builtin();
    std::vector<SiteRecord> out;
    out.reserve(tlds.size());
    for (std::size_t i = 0; i < tlds.size(); ++i) {
        const auto& platform = platforms[i];
        std::string key;
        if (rng() % 50 != 0) {  // ~2% of pages ship without a key
            if (platform == "JSEcoin") {
                key = std::to_string(10000 + rng() % 90000);
            } else {
                for (int c = 0; c < 32; ++c) key += alnum[rng() % 62];
            }
        }
        std::optional<double> throttle;
        if (rng() % 4 != 0) throttle = static_cast<double>(1 + rng() % 9) / 10.0;
        out.push_back(scan_html(synthetic_page(platform, key, throttle), db,
                                "site" + std::to_string(i + 1) + tlds[i]));
    }
    return out;
}

namespace {

template <class T>
ordered_json opt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

ordered_json rows_json(const std::vector<CountRow>& rows, const char* type_key) {
    auto arr = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json j;
        j["name"] = r.name;
        if (type_key && !r.type.empty()) j[type_key] = r.type;
        j["count"] = r.count;
        j["percent"] = r.percent;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace

std::string to_json(const SiteRecord& r) {
    ordered_json j;
    j["domain"] = r.domain;
    j["tld"] = r.tld;
    j["tld_type"] = to_string(r.tld_type);
    j["platform"] = opt(r.platform);
    j["currency"] = opt(r.currency);
    j["site_key"] = opt(r.site_key);
    j["throttle"] = opt(r.throttle);
    j["active"] = r.active;
    return j.dump();
}

SiteRecord record_from_json(std::string_view line) {
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("site record: not a JSON object");
    try {
        SiteRecord r;
        r.domain = j.value("domain", "");
        r.tld = j.value("tld", tld_of(r.domain));
        const auto type = j.value("tld_type", std::string(to_string(classify_tld(r.tld))));
        if (type == "generic")
            r.tld_type = TldType::Generic;
        else if (type == "country")
            r.tld_type = TldType::Country;
        else if (type == "new")
            r.tld_type = TldType::New;
        else
            throw std::invalid_argument("site record: unknown tld_type '" + type + "'");
        r.platform = get_opt<std::string>(j, "platform");
        r.currency = get_opt<std::string>(j, "currency");
        r.site_key = get_opt<std::string>(j, "site_key");
        r.throttle = get_opt<double>(j, "throttle");
        r.active = j.value("active", r.site_key.has_value());
        return r;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("site record: ") + e.what());
    }
}

std::string to_jsonl(const std::vector<SiteRecord>& records) {
    std::string out;
    for (const auto& r : records) out += to_json(r) + "\n";
    return out;
}

std::vector<SiteRecord> records_from_jsonl(std::string_view text) {
    std::vector<SiteRecord> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            out.push_back(record_from_json(line));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string to_json(const DistributionReport& r, int indent) {
    ordered_json j;
    j["total"] = r.total;
    j["active"] = r.active;
    j["tlds"] = rows_json(r.tlds, "type");
    j["platforms"] = rows_json(r.platforms, "currency");
    j["currencies"] = rows_json(r.currencies, nullptr);
    return j.dump(indent);
}

}  // namespace cjscope::corpus
