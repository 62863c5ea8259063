#include "doctest.h"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "cjscope/mineproto.hpp"

using namespace cjscope::mineproto;

namespace {

const std::string key32 = "k4Xq9TnB2vLm8RzW5cYp1HsJ7dFgQ3eA";

std::string random_hex(std::mt19937_64& rng, std::size_t n) {
    static constexpr char d[] = "0123456789abcdef";
    std::string s(n, '0');
    for (auto& c : s) c = d[rng() % 16];
    return s;
}

std::string random_text(std::mt19937_64& rng) {
    // includes characters JSON must escape
    static const std::string alphabet = "abcXYZ019 _-\"\\/\t\n\xc3\xa9";
    std::string s;
    const auto n = rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
        const char c = alphabet[rng() % alphabet.size()];
        if (static_cast<unsigned char>(c) == 0xc3) {
            s += "\xc3\xa9";
        } else if (static_cast<unsigned char>(c) != 0xa9) {
            s += c;
        }
    }
    return s;
}

ProtocolFrame random_frame(std::mt19937_64& rng, FrameKind kind) {
    switch (kind) {
        case FrameKind::Auth: {
            Auth a{random_text(rng), random_text(rng), std::nullopt, static_cast<std::int64_t>(rng()) };
            if (rng() % 2) a.user = random_text(rng);
            return a;
        }
        case FrameKind::Authed: return Authed{random_text(rng), rng() >> (rng() % 64)};
        case FrameKind::Job: return Job{random_text(rng), random_hex(rng, 2 * (rng() % 100)), random_hex(rng, 8)};
        case FrameKind::Submit: return Submit{random_text(rng), random_hex(rng, 8), random_hex(rng, 64)};
        case FrameKind::HashAccept: return HashAccept{rng() >> (rng() % 64)};
    }
    return {};
}

std::vector<std::pair<Direction, std::string>> multiset(const SessionLog& log) {
    std::vector<std::pair<Direction, std::string>> v;
    for (const auto& e : log.entries) v.emplace_back(e.direction, e.payload);
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<FrameKind> kinds(const SessionLog& log) {
    std::vector<FrameKind> v;
    for (const auto& e : log.entries) v.push_back(classify_frame(e.payload)->kind());
    return v;
}

MinerConfig miner_for(std::uint16_t port, double alpha, std::uint64_t shares) {
    MinerConfig mc;
    mc.endpoint = "ws://127.0.0.1:" + std::to_string(port) + "/";
    mc.site_key = key32;
    mc.throttle = alpha;
    mc.max_shares = shares;
    mc.hash_budget = 1'000'000;
    mc.slice = std::chrono::milliseconds(2);
    return mc;
}

}  // namespace

TEST_CASE("classify the listing frames") {
    const auto auth = classify_frame(R"({"type": "auth",
        "params": {
        "site_key": "0123456789abcdefghijklmnopqrstuv",
        "type": "anonymous", "user": null, "goal": 0 }})");
    REQUIRE(auth);
    CHECK(auth->kind() == FrameKind::Auth);
    CHECK(auth->direction() == Direction::ClientToServer);
    CHECK(auth->as<Auth>().site_key.size() == 32);
    CHECK_FALSE(auth->as<Auth>().user.has_value());

    const auto job = classify_frame(R"({ "type": "job", "params": { "job_id": "164698158344253",
        "blob": "0707", "target": "ffffff00" }})");
    REQUIRE(job);
    CHECK(job->direction() == Direction::ServerToClient);
    CHECK(job->as<Job>().target == "ffffff00");

    const auto accept = classify_frame(R"({ "type": "hash_accept", "params": { "hashes": 256 }})");
    REQUIRE(accept);
    CHECK(accept->as<HashAccept>().hashes == 256);
}

TEST_CASE("non-protocol and malformed payloads") {
    for (const char* p : {"", "hello", "[1,2]", "42", R"({"type":"ping"})", R"({"kind":"auth"})",
                          R"({"type":7,"params":{}})"})
        CHECK_FALSE(classify_frame(p).has_value());

    CHECK_THROWS_AS(classify_frame(R"({"type":"job","params":{"job_id":"1","blob":"00"}})"), Malformed);
    CHECK_THROWS_AS(classify_frame(R"({"type":"job","params":{"job_id":"1","blob":"00","target":"fff"}})"), Malformed);
    CHECK_THROWS_AS(classify_frame(R"({"type":"authed","params":{"token":"","hashes":-1}})"), Malformed);
    CHECK_THROWS_AS(classify_frame(R"({"type":"authed","params":{"token":3,"hashes":0}})"), Malformed);
    CHECK_THROWS_AS(classify_frame(R"({"type":"auth","params":{"site_key":"k","type":"anonymous","goal":0}})"),
                    Malformed);
    CHECK_THROWS_AS(classify_frame(R"({"type":"submit","params":{"job_id":"1","nonce":"zz000000","result":""}})"),
                    Malformed);
    CHECK_THROWS_AS(classify_frame(R"({"type":"hash_accept"})"), Malformed);
    CHECK_THROWS_AS(classify_frame(R"({"type":"hash_accept","params":[]})"), Malformed);
}

TEST_CASE("canonical frames are close to the observed sizes") {
    const std::vector<ProtocolFrame> canonical{
        Auth{key32, "anonymous", std::nullopt, 0},
        Authed{"", 0},
        Job{"164698158344253", std::string(152, 'a'), "ffffff00"},
        Submit{"164698158344253", "cfe539d3", std::string(64, 'b')},
        HashAccept{256},
    };
    for (const auto& f : canonical) {
        CAPTURE(to_string(f.kind()));
        CAPTURE(f.byte_length);
        CHECK(f.byte_length == serialize(f).size());
        CHECK(length_plausible(f.kind(), f.byte_length));
    }
    CHECK(serialize(canonical[4]) == R"({"type":"hash_accept","params":{"hashes":256}})");
    CHECK_FALSE(length_plausible(FrameKind::Authed, 80));
}

TEST_CASE("share credit and target encoding") {
    CHECK(parse_target("ffffff00") == 0x00ffffffu);
    CHECK(credit_per_share("ffffff00") == 256);
    CHECK(credit_per_share("00000080") == 2);
    CHECK(credit_per_share("80000000") == 33554432);
    CHECK(credit_per_share("ffffffff") == 1);
    CHECK(credit_per_share("00000001") == 4294967296ULL / 0x01000000u);
    CHECK_THROWS_AS(credit_per_share("00000000"), std::invalid_argument);
    CHECK_THROWS_AS(parse_target("ffff"), std::invalid_argument);
    CHECK(format_target(0x00ffffffu) == "ffffff00");
    CHECK(nonce_hex(0xd339e5cf) == "cfe539d3");

    // FIPS 180-2 test vector
    const std::string abc = "abc";
    CHECK(to_hex(sha256({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()})) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

    Digest d{};
    d[0] = 0xff;
    d[1] = 0xff;
    d[2] = 0xff;
    d[3] = 0x00;
    CHECK(meets_target(d, 0x00ffffff));
    d[0] = 0x00;
    d[3] = 0x01;
    CHECK_FALSE(meets_target(d, 0x00ffffff));

    // over many nonces, ~1 in 256 digests meets ffffff00
    std::size_t hits = 0;
    const std::string blob(152, '7');
    for (std::uint32_t n = 0; n < 65536; ++n)
        hits += meets_target(share_digest({}, blob, nonce_hex(n)), 0x00ffffff);
    CHECK(hits > 200);
    CHECK(hits < 320);
}

TEST_CASE("serialization round-trips for every frame kind") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const auto kind = all_kinds[i % all_kinds.size()];
        const auto f = random_frame(rng, kind);
        const auto text = serialize(f);
        const auto back = classify_frame(text);
        REQUIRE(back.has_value());
        CHECK(*back == f);
        CHECK(serialize(*back) == text);
    }
}

TEST_CASE("session state machine") {
    const Job job{"1", "00", "ffffff00"};
    const std::vector<ProtocolFrame> legal{Auth{key32}, Authed{"", 0}, job, Submit{"1", "00000000", std::string(64, '0')},
                                           HashAccept{256}, job, Submit{"1", "01000000", std::string(64, '0')},
                                           HashAccept{512}};
    SessionState s;
    for (const auto& f : legal) s.apply(f);
    CHECK(s.phase == Phase::Credited);
    CHECK(s.accepted_hashes == 512);
    CHECK(s.site_key == key32);

    SUBCASE("job before authed") {
        SessionState t;
        t.apply(Auth{key32});
        CHECK_THROWS_AS(t.apply(job), ProtocolViolation);
    }
    SUBCASE("hash_accept before submit") {
        SessionState t;
        for (int i = 0; i < 3; ++i) t.apply(legal[i]);
        CHECK_THROWS_AS(t.apply(HashAccept{256}), ProtocolViolation);
    }
    SUBCASE("hashes cannot go down") {
        SessionState t;
        for (int i = 0; i < 7; ++i) t.apply(legal[i]);
        CHECK_THROWS_AS(t.apply(HashAccept{10}), ProtocolViolation);
    }
    SUBCASE("second auth") {
        SessionState t;
        t.apply(Auth{key32});
        CHECK_THROWS_AS(t.apply(Auth{key32}), ProtocolViolation);
    }
}

TEST_CASE("session logs: JSONL and replay") {
    SessionLog log;
    const Job job{"9", "abcd", "ffffffff"};
    std::uint64_t t = 0;
    auto add = [&](ProtocolFrame f) { log.entries.push_back({t += 10, f.direction(), serialize(f)}); };
    add(Auth{key32});
    add(Authed{"", 0});
    add(job);
    const auto n = nonce_hex(0);
    add(Submit{"9", n, to_hex(share_digest({}, "abcd", n))});
    add(HashAccept{1});

    const auto back = SessionLog::from_jsonl(log.to_jsonl());
    CHECK(back.entries == log.entries);

    auto r = replay(log, sha256);
    CHECK(r.ok);
    CHECK(r.accepted_shares == 1);
    CHECK(r.credited_hashes == 1);
    CHECK(r.final_phase == Phase::Credited);

    SUBCASE("wrong credit") {
        log.entries.back().payload = serialize(HashAccept{2});
        CHECK_FALSE(replay(log).ok);
    }
    SUBCASE("forged result") {
        log.entries[3].payload = serialize(Submit{"9", n, std::string(64, 'f')});
        CHECK(replay(log).ok);  // without a digest only structure is checked
        CHECK_FALSE(replay(log, sha256).ok);
    }
    SUBCASE("wrong direction") {
        log.entries[1].direction = Direction::ClientToServer;
        CHECK_FALSE(replay(log).ok);
    }
    CHECK_THROWS_AS(SessionLog::from_jsonl("{\"t_us\":5,\"direction\":\"up\",\"payload\":\"\"}"), std::invalid_argument);
    CHECK_THROWS_AS(SessionLog::from_jsonl("{\"t_us\":5,\"direction\":\"client->server\",\"payload\":\"\"}\n"
                                           "{\"t_us\":4,\"direction\":\"client->server\",\"payload\":\"\"}"),
                    std::invalid_argument);
}

TEST_CASE("content detector") {
    const std::vector<ProtocolFrame> full{Auth{key32}, Authed{"", 0}, Job{"1", "00", "ffffff00"},
                                          Submit{"1", "00000000", std::string(64, '0')}, HashAccept{256}};
    SUBCASE("auth alone is only suspicious") {
        ContentDetector d;
        CHECK(d.verdict().status == Verdict::Clean);
        CHECK(d.step(full[0], 1).status == Verdict::Suspicious);
    }
    SUBCASE("full exchange") {
        ContentDetector d;
        for (std::size_t i = 0; i < full.size(); ++i) d.step(full[i], i);
        CHECK(d.verdict().status == Verdict::Cryptojacking);
        REQUIRE(d.verdict().evidence.size() == 5);
        CHECK(d.verdict().evidence[4] == Evidence{FrameKind::HashAccept, 4});
        CHECK(d.verdict().detector == DetectorKind::Content);
    }
    SUBCASE("out of order does not convict") {
        ContentDetector d;
        d.step(full[1], 0);
        d.step(full[0], 1);
        d.step(full[2], 2);
        CHECK(d.verdict().status == Verdict::Suspicious);
    }
    SUBCASE("non-frames are ignored in logs") {
        SessionLog log;
        log.entries.push_back({0, Direction::ClientToServer, "hello"});
        log.entries.push_back({1, Direction::ClientToServer, R"({"type":"job"})"});
        CHECK(detect_content(log).status == Verdict::Clean);
    }
}

TEST_CASE("blacklist detector") {
    const auto bl = Blacklist::parse("# miners\ndropzone.test\n  *.coinminer.test  \n\nexample.org # trailing\n");
    CHECK(bl.patterns() == std::vector<std::string>{"dropzone.test", "coinminer.test", "example.org"});
    CHECK(blacklist_detector("wss://ws.dropzone.test/", bl).status == Verdict::Cryptojacking);
    CHECK(blacklist_detector("ws://DROPZONE.test:8080/proxy", bl).status == Verdict::Cryptojacking);
    CHECK(blacklist_detector("ws://a.b.coinminer.test", bl).status == Verdict::Cryptojacking);
    CHECK(blacklist_detector("ws://notdropzone.test/", bl).status == Verdict::Clean);
    CHECK(blacklist_detector("wss://static.cdn-relay.test/", bl).status == Verdict::Clean);
    CHECK(blacklist_detector("wss://ws.dropzone.test/", Blacklist{}).status == Verdict::Clean);
    CHECK(blacklist_detector("wss://ws.dropzone.test/", bl).detector == DetectorKind::Blacklist);
    CHECK_THROWS_AS(parse_endpoint("http://x/"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("ws://x:99999/"), std::invalid_argument);
    const auto ep = parse_endpoint("ws://127.0.0.1:9000/a/b");
    CHECK(ep.host == "127.0.0.1");
    CHECK(ep.port == 9000);
    CHECK(ep.path == "/a/b");
}

TEST_CASE("websocket tap reassembles frames under arbitrary chunking") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const bool masked = trial % 2;
        std::string stream = "GET / HTTP/1.1\r\nUpgrade: websocket\r\n\r\n";
        std::vector<std::string> expected;
        for (int m = 0; m < 6; ++m) {
            std::string msg = random_hex(rng, rng() % 3 == 0 ? 70000 + rng() % 100 : rng() % 300);
            expected.push_back(msg);
            if (rng() % 3 == 0 && msg.size() > 2) {
                const auto cut = msg.size() / 2;
                stream += encode_ws_frame(msg.substr(0, cut), masked, static_cast<std::uint32_t>(rng()), 0x1, false);
                stream += encode_ws_frame("", masked, 1, 0x9);  // interleaved ping
                stream += encode_ws_frame(msg.substr(cut), masked, static_cast<std::uint32_t>(rng()), 0x0, true);
            } else {
                stream += encode_ws_frame(msg, masked, static_cast<std::uint32_t>(rng()));
            }
        }
        stream += encode_ws_frame("\x03\xe8", masked, 7, 0x8);  // close
        WebSocketTap tap;
        std::vector<std::string> got;
        std::size_t pos = 0;
        while (pos < stream.size()) {
            const std::size_t n = std::min<std::size_t>(stream.size() - pos, 1 + rng() % 5000);
            for (auto& s : tap.feed({stream.data() + pos, n})) got.push_back(std::move(s));
            pos += n;
        }
        CHECK(got == expected);
    }
}

TEST_CASE("dropzone and miner: full session") {
    DropzoneServer server(ServerConfig{});
    const auto result = run_miner_client(miner_for(server.port(), 0.5, 3));
    REQUIRE_MESSAGE(!result.error, *result.error);
    CHECK(result.shares_submitted == 3);
    CHECK(result.accepted_hashes == 3 * 256);
    REQUIRE(server.wait_for_sessions(1, std::chrono::seconds(5)));
    const auto logs = server.logs();
    REQUIRE(logs.size() == 1);

    using K = FrameKind;
    const std::vector<K> expected{K::Auth, K::Authed, K::Job, K::Submit, K::HashAccept, K::Job, K::Submit,
                                  K::HashAccept, K::Job, K::Submit, K::HashAccept, K::Job};
    CHECK(kinds(logs[0]) == expected);
    CHECK(kinds(result.log) == expected);
    CHECK(multiset(logs[0]) == multiset(result.log));
    CHECK(classify_frame(logs[0].entries[1].payload)->as<Authed>().hashes == 0);

    const auto r = replay(logs[0], sha256);
    CHECK_MESSAGE(r.ok, r.error);
    CHECK(r.credited_hashes == r.accepted_shares * 256);
    CHECK(server.balance(key32) == 768);
    for (std::size_t i = 1; i < logs[0].entries.size(); ++i)
        CHECK(logs[0].entries[i].t_us >= logs[0].entries[i - 1].t_us);
    for (const auto& e : logs[0].entries) {
        const auto f = classify_frame(e.payload);
        if (f->kind() == K::Job) CHECK(f->as<Job>().blob.size() == 152);
    }
}

TEST_CASE("dropzone: balances persist per key across sessions") {
    DropzoneServer server(ServerConfig{});
    REQUIRE_FALSE(run_miner_client(miner_for(server.port(), 0.0, 2)).error);
    const auto second = run_miner_client(miner_for(server.port(), 0.0, 1));
    REQUIRE_FALSE(second.error);
    CHECK(classify_frame(second.log.entries[1].payload)->as<Authed>().hashes == 512);
    CHECK(second.accepted_hashes == 256);  // hash_accept counts the session
    REQUIRE(server.wait_for_sessions(2, std::chrono::seconds(5)));
    CHECK(server.balance(key32) == 768);
}

TEST_CASE("miner edge cases") {
    SUBCASE("full throttle computes nothing") {
        DropzoneServer server(ServerConfig{});
        const auto r = run_miner_client(miner_for(server.port(), 1.0, 0));
        CHECK_FALSE(r.error);
        CHECK(r.hashes_computed == 0);
        CHECK(r.shares_submitted == 0);
        CHECK(kinds(r.log) == std::vector<FrameKind>{FrameKind::Auth, FrameKind::Authed, FrameKind::Job});
    }
    SUBCASE("maximal target accepts every nonce") {
        ServerConfig sc;
        sc.target = "ffffffff";
        DropzoneServer server(sc);
        const auto r = run_miner_client(miner_for(server.port(), 0.0, 5));
        CHECK_FALSE(r.error);
        CHECK(r.hashes_computed == 5);
        CHECK(r.accepted_hashes == 5);
    }
    SUBCASE("bad key closes the session after auth") {
        DropzoneServer server(ServerConfig{});
        auto mc = miner_for(server.port(), 0.5, 1);
        mc.site_key = "";
        const auto r = run_miner_client(mc);
        REQUIRE(r.error);
        CHECK(r.error->find("invalid site key") != std::string::npos);
        REQUIRE(server.wait_for_sessions(1, std::chrono::seconds(5)));
        CHECK(kinds(server.logs()[0]) == std::vector<FrameKind>{FrameKind::Auth});
        CHECK(detect_content(server.logs()[0]).status == Verdict::Suspicious);
    }
    SUBCASE("unknown key is refused when the server has a key list") {
        ServerConfig sc;
        sc.site_keys = {std::string(32, 'z')};
        DropzoneServer server(sc);
        CHECK(run_miner_client(miner_for(server.port(), 0.5, 1)).error);
    }
    SUBCASE("unreachable endpoint") {
        std::uint16_t port;
        {
            DropzoneServer s(ServerConfig{});
            port = s.port();
        }
        CHECK(run_miner_client(miner_for(port, 0.5, 1)).error);
    }
}

TEST_CASE("throttle sets the busy fraction") {
    DropzoneServer server(ServerConfig{});
    auto measure = [&](double alpha) {
        auto mc = miner_for(server.port(), alpha, 0);
        mc.hash_budget = 60000;
        // never finds a share, so every hash is work between network events
        mc.digest = [](std::span<const std::uint8_t> b) {
            auto d = sha256(b);
            d[3] = 0xff;
            return d;
        };
        const auto r = run_miner_client(mc);
        REQUIRE_FALSE(r.error);
        return r.busy_fraction();
    };
    const double hi = measure(0.1), lo = measure(0.9);
    CAPTURE(hi);
    CAPTURE(lo);
    CHECK(hi / lo == doctest::Approx(9.0).epsilon(0.10));
}

TEST_CASE("relay is transparent") {
    std::mt19937_64 rng(99);
    DropzoneServer server(ServerConfig{});
    RelayProxy relay(RelayConfig{"127.0.0.1", 0, "127.0.0.1", server.port()});
    std::size_t sessions = 0;
    for (int trial = 0; trial < 12; ++trial) {
        auto mc = miner_for(relay.port(), static_cast<double>(rng() % 10) / 10.0, 1 + rng() % 4);
        if (trial % 5 == 4) mc.site_key = "short";  // refused sessions must relay too
        run_miner_client(mc);
        ++sessions;
        REQUIRE(server.wait_for_sessions(sessions, std::chrono::seconds(5)));
        REQUIRE(relay.wait_for_sessions(sessions, std::chrono::seconds(5)));
    }
    const auto at_server = server.logs();
    const auto at_proxy = relay.logs();
    REQUIRE(at_server.size() == at_proxy.size());
    // sessions are sequential, so completion order pairs them up
    for (std::size_t i = 0; i < at_server.size(); ++i) {
        CHECK(multiset(at_server[i]) == multiset(at_proxy[i]));
        CHECK(kinds(at_server[i]) == kinds(at_proxy[i]));
        CHECK(detect_content(at_server[i]).status == detect_content(at_proxy[i]).status);
    }
}

TEST_CASE("relay reports an unreachable upstream") {
    std::uint16_t dead;
    {
        DropzoneServer s(ServerConfig{});
        dead = s.port();
    }
    RelayProxy relay(RelayConfig{"127.0.0.1", 0, "127.0.0.1", dead});
    const auto r = run_miner_client(miner_for(relay.port(), 0.5, 1));
    CHECK(r.error);
    REQUIRE(relay.wait_for_sessions(1, std::chrono::seconds(5)));
    REQUIRE(relay.errors().size() == 1);
    CHECK(relay.errors()[0].find("unreachable") != std::string::npos);
}

TEST_CASE("built-in scenarios") {
    SUBCASE("direct") {
        const auto r = run_scenario(Scenario::builtin("direct"));
        CHECK_FALSE(r.client.error);
        CHECK(r.replay.ok);
        CHECK(r.content.status == Verdict::Cryptojacking);
        CHECK(r.blacklist.status == Verdict::Cryptojacking);
        CHECK(r.server_balance == r.scenario.max_shares * 256);
    }
    SUBCASE("relay evades the blacklist but not the content detector") {
        const auto r = run_scenario(Scenario::builtin("relay"));
        CHECK_FALSE(r.client.error);
        CHECK(r.content.status == Verdict::Cryptojacking);
        CHECK(r.blacklist.status == Verdict::Clean);
        REQUIRE(r.proxy_logs.size() == 1);
        CHECK(multiset(r.proxy_logs[0]) == multiset(r.server_logs[0]));
    }
    SUBCASE("keyless page connects but never mines") {
        const auto r = run_scenario(Scenario::builtin("keyless"));
        CHECK(r.client.error);
        CHECK(r.content.status == Verdict::Suspicious);
        CHECK(r.server_balance == 0);
    }
    CHECK_THROWS_AS(Scenario::builtin("nope"), std::invalid_argument);
    CHECK_THROWS_AS(Scenario::from_json(R"({"topology":"mesh"})"), std::invalid_argument);
}
