#include <openssl/evp.h>

#include <cmath>
#include <limits>

#include "cjscope/mineproto.hpp"
#include "json.hpp"

namespace cjscope::mineproto {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(FrameKind kind) {
    switch (kind) {
        case FrameKind::Auth: return "auth";
        case FrameKind::Authed: return "authed";
        case FrameKind::Job: return "job";
        case FrameKind::Submit: return "submit";
        case FrameKind::HashAccept: return "hash_accept";
    }
    return "?";
}

std::optional<FrameKind> parse_kind(std::string_view name) {
    for (auto k : all_kinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

std::string_view to_string(Direction d) {
    return d == Direction::ClientToServer ? "client->server" : "server->client";
}

Direction parse_direction(std::string_view name) {
    if (name == "client->server") return Direction::ClientToServer;
    if (name == "server->client") return Direction::ServerToClient;
    throw std::invalid_argument("unknown direction '" + std::string(name) + "'");
}

Direction direction_of(FrameKind kind) {
    return kind == FrameKind::Auth || kind == FrameKind::Submit ? Direction::ClientToServer
                                                                : Direction::ServerToClient;
}

std::size_t expected_length(FrameKind kind) {
    switch (kind) {
        case FrameKind::Auth: return 112;
        case FrameKind::Authed: return 50;
        case FrameKind::Job: return 234;
        case FrameKind::Submit: return 156;
        case FrameKind::HashAccept: return 48;
    }
    return 0;
}

bool length_plausible(FrameKind kind, std::size_t bytes) {
    const double e = static_cast<double>(expected_length(kind));
    return std::fabs(static_cast<double>(bytes) - e) <= expected_length_tolerance * e;
}

ProtocolFrame::ProtocolFrame(Params p) : params(std::move(p)) { byte_length = serialize(*this).size(); }

namespace {

ordered_json params_json(const Params& p) {
    return std::visit(
        [](const auto& v) -> ordered_json {
            using T = std::decay_t<decltype(v)>;
            ordered_json j;
            if constexpr (std::is_same_v<T, Auth>) {
                j["site_key"] = v.site_key;
                j["type"] = v.type;
                j["user"] = v.user ? ordered_json(*v.user) : ordered_json(nullptr);
                j["goal"] = v.goal;
            } else if constexpr (std::is_same_v<T, Authed>) {
                j["token"] = v.token;
                j["hashes"] = v.hashes;
            } else if constexpr (std::is_same_v<T, Job>) {
                j["job_id"] = v.job_id;
                j["blob"] = v.blob;
                j["target"] = v.target;
            } else if constexpr (std::is_same_v<T, Submit>) {
                j["job_id"] = v.job_id;
                j["nonce"] = v.nonce;
                j["result"] = v.result;
            } else {
                j["hashes"] = v.hashes;
            }
            return j;
        },
        p);
}

bool is_hex(std::string_view s) {
    for (char c : s)
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

class Schema {
public:
    Schema(FrameKind kind, const json& params) : kind_(kind), params_(params) {}

    const json& field(const char* name) const {
        auto it = params_.find(name);
        if (it == params_.end()) fail(std::string("missing \"") + name + "\"");
        return *it;
    }
    std::string str(const char* name) const {
        const auto& v = field(name);
        if (!v.is_string()) fail(std::string("\"") + name + "\" is not a string");
        return v.get<std::string>();
    }
    std::string hex(const char* name, std::size_t length) const {
        auto s = str(name);
        if (s.size() != length || !is_hex(s))
            fail(std::string("\"") + name + "\" is not " + std::to_string(length) + " hex digits");
        return s;
    }
    std::int64_t integer(const char* name) const {
        const auto& v = field(name);
        if (!v.is_number_integer()) fail(std::string("\"") + name + "\" is not an integer");
        return v.get<std::int64_t>();
    }
    std::uint64_t count(const char* name) const {
        const auto& v = field(name);
        if (!v.is_number_unsigned()) fail(std::string("\"") + name + "\" is not a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::optional<std::string> nullable_str(const char* name) const {
        const auto& v = field(name);
        if (v.is_null()) return std::nullopt;
        if (!v.is_string()) fail(std::string("\"") + name + "\" is neither null nor a string");
        return v.get<std::string>();
    }
    [[noreturn]] void fail(const std::string& why) const {
        throw Malformed(std::string(to_string(kind_)) + " frame: " + why);
    }

private:
    FrameKind kind_;
    const json& params_;
};

}  // namespace

std::string serialize(const ProtocolFrame& frame) {
    ordered_json j;
    j["type"] = to_string(frame.kind());
    j["params"] = params_json(frame.params);
    return j.dump();
}

std::optional<ProtocolFrame> classify_frame(std::string_view payload) {
    const json doc = json::parse(payload, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    auto type = doc.find("type");
    if (type == doc.end() || !type->is_string()) return std::nullopt;
    const auto kind = parse_kind(type->get<std::string>());
    if (!kind) return std::nullopt;

    auto params = doc.find("params");
    if (params == doc.end() || !params->is_object())
        throw Malformed(std::string(to_string(*kind)) + " frame: \"params\" missing or not an object");
    const Schema s(*kind, *params);

    Params p;
    switch (*kind) {
        case FrameKind::Auth: p = Auth{s.str("site_key"), s.str("type"), s.nullable_str("user"), s.integer("goal")}; break;
        case FrameKind::Authed: p = Authed{s.str("token"), s.count("hashes")}; break;
        case FrameKind::Job: {
            auto blob = s.str("blob");
            if (!is_hex(blob) || blob.size() % 2) s.fail("\"blob\" is not a hex byte string");
            p = Job{s.str("job_id"), std::move(blob), s.hex("target", 8)};
            break;
        }
        case FrameKind::Submit: p = Submit{s.str("job_id"), s.hex("nonce", 8), s.hex("result", 64)}; break;
        case FrameKind::HashAccept: p = HashAccept{s.count("hashes")}; break;
    }
    return ProtocolFrame(std::move(p), payload.size());
}

Digest sha256(std::span<const std::uint8_t> data) {
    Digest out{};
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) || len != out.size())
        throw std::runtime_error("sha256: digest failed");
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 0xf];
    }
    return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 || !is_hex(hex)) throw std::invalid_argument("not a hex byte string: '" + std::string(hex) + "'");
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        return static_cast<std::uint8_t>(std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
    };
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

namespace {

std::uint32_t le32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::string le32_hex(std::uint32_t v) {
    const std::array<std::uint8_t, 4> b{static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                                        static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    return to_hex(b);
}

}  // namespace

std::uint32_t parse_target(std::string_view hex8) {
    if (hex8.size() != 8) throw std::invalid_argument("target must be 8 hex digits: '" + std::string(hex8) + "'");
    return le32(from_hex(hex8).data());
}

std::string format_target(std::uint32_t target) { return le32_hex(target); }

std::uint64_t credit_per_share(std::uint32_t target) {
    if (target == 0) throw std::invalid_argument("target 0 admits no share");
    return (std::uint64_t{1} << 32) / target;
}

std::uint64_t credit_per_share(std::string_view target_hex) { return credit_per_share(parse_target(target_hex)); }

std::string nonce_hex(std::uint32_t nonce) { return le32_hex(nonce); }

Digest share_digest(const DigestFn& digest, std::string_view blob_hex, std::string_view nonce) {
    auto bytes = from_hex(blob_hex);
    const auto n = from_hex(nonce);
    bytes.insert(bytes.end(), n.begin(), n.end());
    return digest ? digest(bytes) : sha256(bytes);
}

bool meets_target(const Digest& d, std::uint32_t target) { return le32(d.data()) <= target; }

}  // namespace cjscope::mineproto
