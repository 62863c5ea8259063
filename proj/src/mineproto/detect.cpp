#include <algorithm>
#include <charconv>

#include "cjscope/mineproto.hpp"
#include "json.hpp"

namespace cjscope::mineproto {

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Clean: return "Clean";
        case Verdict::Suspicious: return "Suspicious";
        case Verdict::Cryptojacking: return "Cryptojacking";
    }
    return "?";
}

std::string_view to_string(DetectorKind d) { return d == DetectorKind::Blacklist ? "blacklist" : "content"; }

const DetectionVerdict& ContentDetector::step(const ProtocolFrame& frame, std::uint64_t t_us) {
    verdict_.detector = DetectorKind::Content;
    verdict_.evidence.push_back({frame.kind(), t_us});
    switch (frame.kind()) {
        case FrameKind::Auth: auth_ = true; break;
        case FrameKind::Authed: authed_ = authed_ || auth_; break;
        case FrameKind::Job:
            // a job handed to an authenticated page means work is being done
            if (authed_) verdict_.status = Verdict::Cryptojacking;
            break;
        default: break;
    }
    if (verdict_.status == Verdict::Clean) verdict_.status = Verdict::Suspicious;
    return verdict_;
}

DetectionVerdict detect_content(const SessionLog& log) {
    ContentDetector d;
    for (const auto& e : log.entries) {
        try {
            if (auto f = classify_frame(e.payload)) d.step(*f, e.t_us);
        } catch (const Malformed&) {
        }
    }
    return d.verdict();
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Blacklist::Blacklist(std::vector<std::string> patterns) {
    for (auto& p : patterns) {
        std::string_view v = trim(p);
        if (v.starts_with("*.")) v.remove_prefix(2);
        while (v.ends_with('.')) v.remove_suffix(1);
        if (!v.empty()) patterns_.push_back(lower(v));
    }
}

Blacklist Blacklist::parse(std::string_view text) {
    std::vector<std::string> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (!trim(line).empty()) lines.emplace_back(trim(line));
    }
    return Blacklist(std::move(lines));
}

bool Blacklist::matches_host(std::string_view host) const {
    const auto h = lower(host);
    for (const auto& p : patterns_) {
        if (h == p) return true;
        if (h.size() > p.size() && h.ends_with(p) && h[h.size() - p.size() - 1] == '.') return true;
    }
    return false;
}

Endpoint parse_endpoint(std::string_view url) {
    Endpoint ep;
    const auto sep = url.find("://");
    if (sep == std::string_view::npos) throw std::invalid_argument("endpoint needs a scheme: '" + std::string(url) + "'");
    ep.scheme = lower(url.substr(0, sep));
    if (ep.scheme != "ws" && ep.scheme != "wss")
        throw std::invalid_argument("endpoint scheme must be ws or wss: '" + std::string(url) + "'");
    ep.port = ep.scheme == "wss" ? 443 : 80;
    auto rest = url.substr(sep + 3);
    const auto slash = rest.find('/');
    auto authority = rest.substr(0, slash);
    ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        const auto port = authority.substr(colon + 1);
        unsigned value = 0;
        auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
        if (ec != std::errc{} || p != port.data() + port.size() || value == 0 || value > 65535)
            throw std::invalid_argument("bad port in endpoint: '" + std::string(url) + "'");
        ep.port = static_cast<std::uint16_t>(value);
        authority = authority.substr(0, colon);
    }
    if (authority.empty()) throw std::invalid_argument("endpoint has no host: '" + std::string(url) + "'");
    ep.host = lower(authority);
    return ep;
}

DetectionVerdict blacklist_detector(std::string_view endpoint_url, const Blacklist& blacklist) {
    DetectionVerdict v;
    v.detector = DetectorKind::Blacklist;
    if (blacklist.matches_host(parse_endpoint(endpoint_url).host)) v.status = Verdict::Cryptojacking;
    return v;
}

std::string to_json(const DetectionVerdict& verdict, int indent) {
    nlohmann::ordered_json j;
    j["detector"] = to_string(verdict.detector);
    j["status"] = to_string(verdict.status);
    auto& ev = j["evidence"] = nlohmann::ordered_json::array();
    for (const auto& e : verdict.evidence) ev.push_back({{"kind", to_string(e.kind)}, {"t_us", e.t_us}});
    return j.dump(indent);
}

}  // namespace cjscope::mineproto
