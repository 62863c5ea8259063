#include <optional>

#include "cjscope/mineproto.hpp"
#include "embedded.hpp"
#include "json.hpp"

namespace cjscope::mineproto {

std::vector<std::string> WebSocketTap::feed(std::span<const char> bytes) {
    std::vector<std::string> out;
    buffer_.append(bytes.data(), bytes.size());
    if (!handshake_done_) {
        const auto end = buffer_.find("\r\n\r\n");
        if (end == std::string::npos) return out;
        buffer_.erase(0, end + 4);
        handshake_done_ = true;
    }
    for (;;) {
        if (buffer_.size() < 2) break;
        const auto b0 = static_cast<std::uint8_t>(buffer_[0]);
        const auto b1 = static_cast<std::uint8_t>(buffer_[1]);
        const bool fin = b0 & 0x80;
        const unsigned opcode = b0 & 0x0f;
        const bool masked = b1 & 0x80;
        std::uint64_t length = b1 & 0x7f;
        std::size_t header = 2;
        if (length == 126 || length == 127) {
            const std::size_t extra = length == 126 ? 2 : 8;
            if (buffer_.size() < header + extra) break;
            length = 0;
            for (std::size_t i = 0; i < extra; ++i) length = length << 8 | static_cast<std::uint8_t>(buffer_[2 + i]);
            header += extra;
        }
        const std::size_t mask_at = header;
        if (masked) header += 4;
        if (buffer_.size() < header || buffer_.size() - header < length) break;

        std::string payload = buffer_.substr(header, length);
        if (masked)
            for (std::size_t i = 0; i < payload.size(); ++i) payload[i] ^= buffer_[mask_at + i % 4];
        buffer_.erase(0, header + length);

        if (opcode >= 0x8) continue;  // close / ping / pong
        if (opcode == 0x0) {
            if (!in_message_) continue;
            message_ += payload;
        } else {
            message_ = std::move(payload);
            in_message_ = true;
        }
        if (fin && in_message_) {
            out.push_back(std::move(message_));
            message_.clear();
            in_message_ = false;
        }
    }
    return out;
}

std::string encode_ws_frame(std::string_view payload, bool masked, std::uint32_t mask_key, std::uint8_t opcode,
                            bool fin) {
    std::string out;
    out += static_cast<char>((fin ? 0x80 : 0x00) | (opcode & 0x0f));
    const std::uint8_t mask_bit = masked ? 0x80 : 0x00;
    const std::uint64_t n = payload.size();
    if (n < 126) {
        out += static_cast<char>(mask_bit | n);
    } else if (n <= 0xffff) {
        out += static_cast<char>(mask_bit | 126);
        out += static_cast<char>(n >> 8);
        out += static_cast<char>(n & 0xff);
    } else {
        out += static_cast<char>(mask_bit | 127);
        for (int shift = 56; shift >= 0; shift -= 8) out += static_cast<char>((n >> shift) & 0xff);
    }
    const char key[4] = {static_cast<char>(mask_key >> 24), static_cast<char>(mask_key >> 16),
                         static_cast<char>(mask_key >> 8), static_cast<char>(mask_key)};
    if (masked) out.append(key, 4);
    for (std::size_t i = 0; i < payload.size(); ++i) out += masked ? static_cast<char>(payload[i] ^ key[i % 4]) : payload[i];
    return out;
}

Scenario Scenario::from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("scenario: not a JSON object");
    Scenario s;
    try {
        s.name = j.value("name", "");
        const auto topology = j.value("topology", "direct");
        if (topology == "direct")
            s.topology = Topology::Direct;
        else if (topology == "relay")
            s.topology = Topology::Relay;
        else
            throw std::invalid_argument("unknown topology '" + topology + "'");
        s.dropzone_host = j.value("dropzone_host", s.dropzone_host);
        s.relay_host = j.value("relay_host", s.relay_host);
        s.site_key = j.value("site_key", "");
        s.throttle = j.value("throttle", s.throttle);
        s.hash_budget = j.value("hash_budget", s.hash_budget);
        s.max_shares = j.value("max_shares", s.max_shares);
        s.target = j.value("target", s.target);
        s.seed = j.value("seed", s.seed);
        s.blacklist = j.value("blacklist", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
    if (s.throttle < 0 || s.throttle > 1) throw std::invalid_argument("scenario: throttle must be in [0, 1]");
    parse_target(s.target);
    return s;
}

Scenario Scenario::builtin(std::string_view name) {
    try {
        return from_json(embedded::lookup(std::string(name) + ".json"));
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("no built-in scenario '" + std::string(name) + "' (direct, relay, keyless)");
    }
}

ScenarioResult run_scenario(const Scenario& scenario) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult r;
    r.scenario = scenario;

    ServerConfig sc;
    sc.target = scenario.target;
    sc.seed = scenario.seed;
    DropzoneServer server(sc);
    std::optional<RelayProxy> relay;

    MinerConfig mc;
    mc.site_key = scenario.site_key;
    mc.throttle = scenario.throttle;
    mc.hash_budget = scenario.hash_budget;
    mc.max_shares = scenario.max_shares;
    std::uint16_t port = server.port();
    std::string host = scenario.dropzone_host;
    if (scenario.topology == Topology::Relay) {
        relay.emplace(RelayConfig{"127.0.0.1", 0, "127.0.0.1", server.port()});
        port = relay->port();
        host = scenario.relay_host;
    }
    // the page believes it talks to `host`; locally everything is loopback
    mc.endpoint = "ws://127.0.0.1:" + std::to_string(port) + "/";
    mc.host_header = host;
    r.observed_endpoint = "wss://" + host + "/";

    r.client = run_miner_client(mc);
    constexpr std::chrono::seconds grace{5};
    if (relay) {
        relay->wait_for_sessions(1, grace);
        r.proxy_logs = relay->logs();
    }
    server.wait_for_sessions(1, grace);
    r.server_logs = server.logs();
    r.server_balance = server.balance(scenario.site_key);
    if (relay) relay->stop();
    server.stop();

    if (!r.server_logs.empty()) r.replay = replay(r.server_logs.front(), sha256);
    const SessionLog& observed =
        relay && !r.proxy_logs.empty() ? r.proxy_logs.front() : r.client.log;
    r.content = detect_content(observed);
    r.blacklist = blacklist_detector(r.observed_endpoint, Blacklist(scenario.blacklist));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string to_json(const ScenarioResult& r, int indent) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["scenario"] = r.scenario.name;
    j["topology"] = r.scenario.topology == Topology::Relay ? "relay" : "direct";
    j["observed_endpoint"] = r.observed_endpoint;
    j["throttle"] = r.scenario.throttle;
    j["target"] = r.scenario.target;
    j["credit_per_share"] = credit_per_share(r.scenario.target);
    ordered_json client;
    client["hashes_computed"] = r.client.hashes_computed;
    client["shares_submitted"] = r.client.shares_submitted;
    client["accepted_hashes"] = r.client.accepted_hashes;
    client["busy_fraction"] = r.client.busy_fraction();
    client["error"] = r.client.error ? ordered_json(*r.client.error) : ordered_json(nullptr);
    auto& frames = client["frames"] = ordered_json::array();
    for (const auto& e : r.client.log.entries) {
        std::string kind = "other";
        try {
            if (auto f = classify_frame(e.payload)) kind = to_string(f->kind());
        } catch (const Malformed&) {
            kind = "malformed";
        }
        frames.push_back(kind);
    }
    j["client"] = std::move(client);
    ordered_json rep;
    rep["ok"] = r.replay.ok;
    rep["error"] = r.replay.error;
    rep["frames"] = r.replay.frames;
    rep["accepted_shares"] = r.replay.accepted_shares;
    rep["credited_hashes"] = r.replay.credited_hashes;
    rep["expected_hashes"] = r.replay.expected_hashes;
    rep["final_phase"] = to_string(r.replay.final_phase);
    j["server_replay"] = std::move(rep);
    j["server_balance"] = r.server_balance;
    j["verdicts"] = ordered_json::array(
        {ordered_json::parse(to_json(r.content, -1)), ordered_json::parse(to_json(r.blacklist, -1))});
    return j.dump(indent);
}

}  // namespace cjscope::mineproto
