#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace cjscope::mineproto {

enum class FrameKind { Auth, Authed, Job, Submit, HashAccept };
enum class Direction { ClientToServer, ServerToClient };

inline constexpr std::array<FrameKind, 5> all_kinds{FrameKind::Auth, FrameKind::Authed, FrameKind::Job,
                                                    FrameKind::Submit, FrameKind::HashAccept};

std::string_view to_string(FrameKind kind);  // wire name: "auth", "hash_accept", ...
std::optional<FrameKind> parse_kind(std::string_view name);
std::string_view to_string(Direction d);  // "client->server" / "server->client"
Direction parse_direction(std::string_view name);

/// Fixed by the protocol: auth and submit go upstream, the rest downstream.
Direction direction_of(FrameKind kind);

/// Observed wire sizes of the canonical frames, in bytes. Actual sizes vary
/// with key/token/id lengths, so these are checked with a tolerance.
std::size_t expected_length(FrameKind kind);
inline constexpr double expected_length_tolerance = 0.15;
bool length_plausible(FrameKind kind, std::size_t bytes);

struct Auth {
    std::string site_key;
    std::string type = "anonymous";
    std::optional<std::string> user;
    std::int64_t goal = 0;  // carried opaquely
    bool operator==(const Auth&) const = default;
};
struct Authed {
    std::string token;
    std::uint64_t hashes = 0;
    bool operator==(const Authed&) const = default;
};
struct Job {
    std::string job_id;
    std::string blob;    // hex
    std::string target;  // 8 hex chars, 4 little-endian bytes
    bool operator==(const Job&) const = default;
};
struct Submit {
    std::string job_id;
    std::string nonce;   // 8 hex chars
    std::string result;  // 64 hex chars
    bool operator==(const Submit&) const = default;
};
struct HashAccept {
    std::uint64_t hashes = 0;
    bool operator==(const HashAccept&) const = default;
};

using Params = std::variant<Auth, Authed, Job, Submit, HashAccept>;

struct ProtocolFrame {
    Params params;
    std::size_t byte_length = 0;  // size of the payload it was parsed from

    ProtocolFrame() = default;
    /// byte_length becomes the size of the canonical serialization.
    ProtocolFrame(Params p);  // NOLINT: implicit on purpose
    template <class T>
        requires(std::is_same_v<std::remove_cvref_t<T>, Auth> || std::is_same_v<std::remove_cvref_t<T>, Authed> ||
                 std::is_same_v<std::remove_cvref_t<T>, Job> || std::is_same_v<std::remove_cvref_t<T>, Submit> ||
                 std::is_same_v<std::remove_cvref_t<T>, HashAccept>)
    ProtocolFrame(T&& p) : ProtocolFrame(Params(std::forward<T>(p))) {}  // NOLINT
    ProtocolFrame(Params p, std::size_t length) : params(std::move(p)), byte_length(length) {}

    FrameKind kind() const { return static_cast<FrameKind>(params.index()); }
    Direction direction() const { return direction_of(kind()); }
    template <class T>
    const T& as() const { return std::get<T>(params); }
    bool operator==(const ProtocolFrame&) const = default;
};

/// Recognized "type" whose params do not match the schema.
struct Malformed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ProtocolViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Compact JSON: {"type": ..., "params": {...}} with keys in schema order.
std::string serialize(const ProtocolFrame& frame);

/// nullopt for anything that is not a protocol frame (empty, not JSON, not an
/// object, unknown type). Throws Malformed for a known type with bad params.
std::optional<ProtocolFrame> classify_frame(std::string_view payload);

// ---- shares ----------------------------------------------------------------

using Digest = std::array<std::uint8_t, 32>;
using DigestFn = std::function<Digest(std::span<const std::uint8_t>)>;

Digest sha256(std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);  // throws invalid_argument

/// "ffffff00" -> 0x00ffffff (little-endian byte order). Throws invalid_argument.
std::uint32_t parse_target(std::string_view hex8);
std::string format_target(std::uint32_t target);
/// floor(2^32 / target); throws invalid_argument for target 0.
std::uint64_t credit_per_share(std::uint32_t target);
std::uint64_t credit_per_share(std::string_view target_hex);

std::string nonce_hex(std::uint32_t nonce);  // 4 little-endian bytes
Digest share_digest(const DigestFn& digest, std::string_view blob_hex, std::string_view nonce_hex);
/// Leading four digest bytes as a little-endian integer, compared to target.
bool meets_target(const Digest& d, std::uint32_t target);

// ---- sessions ----------------------------------------------------------------

enum class Phase { Idle, AuthSent, Authed, JobIssued, Mining, Credited };
std::string_view to_string(Phase p);

/// Legal order: Idle -> AuthSent -> Authed -> JobIssued -> Mining -> Credited
/// -> JobIssued -> ...  apply() throws ProtocolViolation on anything else.
struct SessionState {
    Phase phase = Phase::Idle;
    std::uint64_t accepted_hashes = 0;  // last hash_accept total for this session
    std::string site_key;
    double throttle = 0.0;

    void apply(const ProtocolFrame& frame);
};

struct LogEntry {
    std::uint64_t t_us = 0;  // monotonic, microseconds since the session started
    Direction direction = Direction::ClientToServer;
    std::string payload;
    bool operator==(const LogEntry&) const = default;
};

struct SessionLog {
    std::vector<LogEntry> entries;

    /// One JSON object per line: {"t_us":..,"direction":..,"payload":..}.
    std::string to_jsonl() const;
    static SessionLog from_jsonl(std::string_view text);  // throws invalid_argument
};

struct ReplayReport {
    bool ok = true;
    std::string error;  // first problem, if any
    std::size_t frames = 0;
    std::size_t accepted_shares = 0;
    std::uint64_t credited_hashes = 0;  // last hash_accept value
    std::uint64_t expected_hashes = 0;  // sum of credit_per_share over accepted shares
    Phase final_phase = Phase::Idle;
};

/// Re-checks a session log: every payload is a frame flowing in its fixed
/// direction, the state machine is respected, and each hash_accept grows by
/// exactly the credit of the job's target. With a digest, submitted results
/// are recomputed too.
ReplayReport replay(const SessionLog& log, const DigestFn& digest = {});

// ---- detection ---------------------------------------------------------------

enum class Verdict { Clean, Suspicious, Cryptojacking };
enum class DetectorKind { Blacklist, Content };
std::string_view to_string(Verdict v);
std::string_view to_string(DetectorKind d);

struct Evidence {
    FrameKind kind;
    std::uint64_t t_us = 0;
    bool operator==(const Evidence&) const = default;
};

struct DetectionVerdict {
    Verdict status = Verdict::Clean;
    std::vector<Evidence> evidence;
    DetectorKind detector = DetectorKind::Content;
};

/// Per-session fold over observed frames. Any protocol frame makes the
/// session Suspicious; auth followed by authed and then job makes it
/// Cryptojacking. Looks at frame content only.
class ContentDetector {
public:
    const DetectionVerdict& step(const ProtocolFrame& frame, std::uint64_t t_us);
    const DetectionVerdict& verdict() const { return verdict_; }

private:
    DetectionVerdict verdict_;
    bool auth_ = false, authed_ = false;
};

/// Runs the content detector over a log; payloads that are not well-formed
/// frames are skipped.
DetectionVerdict detect_content(const SessionLog& log);

/// Host patterns, one per line; blank lines and '#' comments ignored. A
/// pattern matches the host itself and any subdomain ("*." prefix optional).
class Blacklist {
public:
    Blacklist() = default;
    explicit Blacklist(std::vector<std::string> patterns);
    static Blacklist parse(std::string_view text);

    bool matches_host(std::string_view host) const;
    const std::vector<std::string>& patterns() const { return patterns_; }

private:
    std::vector<std::string> patterns_;
};

DetectionVerdict blacklist_detector(std::string_view endpoint_url, const Blacklist& blacklist);

struct Endpoint {
    std::string scheme = "ws";
    std::string host;
    std::uint16_t port = 80;
    std::string path = "/";
};
/// ws://host[:port][/path]; throws invalid_argument.
Endpoint parse_endpoint(std::string_view url);

// ---- network actors ------------------------------------------------------------

struct ServerConfig {
    std::string bind_address = "127.0.0.1";
    std::uint16_t port = 0;  // 0 = ephemeral
    std::string target = "ffffff00";
    std::uint64_t seed = 1;  // job ids and blobs
    DigestFn digest;         // defaults to sha256
    /// Keys the server will credit; empty accepts any 32-character key.
    std::vector<std::string> site_keys;
};

/// WebSocket dropzone: authenticates, hands out jobs, credits shares. One
/// thread per session; balances are kept per site key across sessions.
class DropzoneServer {
public:
    explicit DropzoneServer(ServerConfig config);  // throws system_error on bind failure
    ~DropzoneServer();
    DropzoneServer(const DropzoneServer&) = delete;
    DropzoneServer& operator=(const DropzoneServer&) = delete;

    std::uint16_t port() const;
    std::uint64_t balance(const std::string& site_key) const;
    /// Logs of finished sessions, in completion order.
    std::vector<SessionLog> logs() const;
    /// Blocks until `count` sessions have finished; false on timeout.
    bool wait_for_sessions(std::size_t count, std::chrono::milliseconds timeout) const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct MinerConfig {
    std::string endpoint;  // ws://127.0.0.1:port/
    /// Host header to present; defaults to the endpoint's host.
    std::string host_header;
    std::string site_key;
    double throttle = 0.0;  // fraction of each slice left idle
    std::uint64_t hash_budget = 4096;
    std::uint64_t max_shares = 0;  // 0 = until the budget runs out
    std::chrono::microseconds slice{10000};
    DigestFn digest;  // defaults to sha256
};

struct MinerResult {
    SessionLog log;
    std::uint64_t hashes_computed = 0;
    std::uint64_t shares_submitted = 0;
    std::uint64_t accepted_hashes = 0;
    double busy_seconds = 0;
    double idle_seconds = 0;
    std::optional<std::string> error;

    double busy_fraction() const;
};

/// Runs one session to completion. Failures are reported in `error`, never thrown.
MinerResult run_miner_client(const MinerConfig& config);

struct RelayConfig {
    std::string listen_address = "127.0.0.1";
    std::uint16_t listen_port = 0;
    std::string upstream_host = "127.0.0.1";
    std::uint16_t upstream_port = 0;
};

/// Byte-transparent TCP relay with a passive WebSocket tap that records the
/// text frames flowing through each connection.
class RelayProxy {
public:
    explicit RelayProxy(RelayConfig config);
    ~RelayProxy();
    RelayProxy(const RelayProxy&) = delete;
    RelayProxy& operator=(const RelayProxy&) = delete;

    std::uint16_t port() const;
    std::vector<SessionLog> logs() const;
    std::vector<std::string> errors() const;
    bool wait_for_sessions(std::size_t count, std::chrono::milliseconds timeout) const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Incremental RFC 6455 decoder for one direction of a connection: skips the
/// HTTP upgrade, then yields complete text/binary messages.
class WebSocketTap {
public:
    std::vector<std::string> feed(std::span<const char> bytes);

private:
    std::string buffer_;
    std::string message_;
    bool handshake_done_ = false;
    bool in_message_ = false;
};

/// Client-side frame encoding (masked), used by tests and the tap's oracle.
std::string encode_ws_frame(std::string_view payload, bool masked, std::uint32_t mask_key = 0x1234abcd,
                            std::uint8_t opcode = 0x1, bool fin = true);

// ---- scenarios -------------------------------------------------------------------

enum class Topology { Direct, Relay };

struct Scenario {
    std::string name;
    Topology topology = Topology::Direct;
    std::string dropzone_host = "ws.dropzone.test";
    std::string relay_host = "relay.example.test";
    std::string site_key;
    double throttle = 0.5;
    std::uint64_t hash_budget = 4096;
    std::uint64_t max_shares = 4;
    std::string target = "ffffff00";
    std::uint64_t seed = 1;
    std::vector<std::string> blacklist;

    static Scenario from_json(std::string_view text);  // throws invalid_argument
    static Scenario builtin(std::string_view name);    // direct | relay | keyless
};

struct ScenarioResult {
    Scenario scenario;
    std::string observed_endpoint;  // URL the page connects to
    MinerResult client;
    std::vector<SessionLog> server_logs;
    std::vector<SessionLog> proxy_logs;
    ReplayReport replay;  // of the server-side log
    std::uint64_t server_balance = 0;
    DetectionVerdict content;    // over the frames seen by the page
    DetectionVerdict blacklist;  // over observed_endpoint
    double seconds = 0;
};

/// Spins up the dropzone (and relay), runs one miner session, tears down.
ScenarioResult run_scenario(const Scenario& scenario);
std::string to_json(const ScenarioResult& result, int indent = 2);
std::string to_json(const DetectionVerdict& verdict, int indent = 2);

}  // namespace cjscope::mineproto
