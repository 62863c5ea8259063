#include <sys/socket.h>

#include <atomic>
#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/write.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <condition_variable>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "cjscope/mineproto.hpp"

namespace cjscope::mineproto {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

class Stopwatch {
public:
    std::uint64_t us() const {
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start_).count());
    }

private:
    Clock::time_point start_ = Clock::now();
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Shared bookkeeping for the two listeners: the accept loop, live sockets
// that stop() must interrupt, and finished-session logs.
class Listener {
public:
    Listener(const std::string& address, std::uint16_t port)
        : acceptor_(ioc_, tcp::endpoint(net::ip::make_address(address), port)) {}

    std::uint16_t port() const { return acceptor_.local_endpoint().port(); }
    net::io_context& ioc() { return ioc_; }

    template <class Handler>
    void start(Handler handler) {
        accept_thread_ = std::thread([this, handler] {
            for (std::uint64_t id = 0;; ++id) {
                tcp::socket sock(ioc_);
                boost::system::error_code ec;
                acceptor_.accept(sock, ec);
                if (stopping_) break;
                if (ec) continue;
                std::lock_guard lock(mu_);
                workers_.emplace_back(handler, std::move(sock), id);
            }
        });
    }

    void track(int fd) {
        std::lock_guard lock(mu_);
        live_.insert(fd);
        if (stopping_) ::shutdown(fd, SHUT_RDWR);
    }
    void untrack(int fd) {
        std::lock_guard lock(mu_);
        live_.erase(fd);
    }

    void finish(SessionLog log) {
        std::lock_guard lock(mu_);
        logs_.push_back(std::move(log));
        ++finished_;
        cv_.notify_all();
    }
    void fail(std::string error) {
        std::lock_guard lock(mu_);
        errors_.push_back(std::move(error));
        ++finished_;
        cv_.notify_all();
    }

    std::vector<SessionLog> logs() const {
        std::lock_guard lock(mu_);
        return logs_;
    }
    std::vector<std::string> errors() const {
        std::lock_guard lock(mu_);
        return errors_;
    }
    bool wait_for(std::size_t count, std::chrono::milliseconds timeout) const {
        std::unique_lock lock(mu_);
        return cv_.wait_for(lock, timeout, [&] { return finished_ >= count; });
    }

    void stop() {
        if (stopping_.exchange(true)) return;
        {
            // wake the blocking accept with a throwaway connection
            tcp::endpoint self(acceptor_.local_endpoint());
            if (self.address().is_unspecified())
                self.address(self.address().is_v6() ? net::ip::address(net::ip::address_v6::loopback())
                                                    : net::ip::address(net::ip::address_v4::loopback()));
            net::io_context tmp;
            tcp::socket s(tmp);
            boost::system::error_code ec;
            s.connect(self, ec);
        }
        if (accept_thread_.joinable()) accept_thread_.join();
        std::vector<std::thread> workers;
        {
            std::lock_guard lock(mu_);
            for (int fd : live_) ::shutdown(fd, SHUT_RDWR);
            workers.swap(workers_);
        }
        for (auto& t : workers) t.join();
        boost::system::error_code ec;
        acceptor_.close(ec);
    }

private:
    net::io_context ioc_;
    tcp::acceptor acceptor_;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::vector<std::thread> workers_;
    std::set<int> live_;
    std::vector<SessionLog> logs_;
    std::vector<std::string> errors_;
    std::size_t finished_ = 0;
};

}  // namespace

// ---- dropzone ------------------------------------------------------------------

struct DropzoneServer::Impl {
    ServerConfig config;
    std::uint32_t target = 0;
    std::uint64_t credit = 0;
    mutable std::mutex ledger_mu;
    std::map<std::string, std::uint64_t> ledger;
    Listener listener;

    explicit Impl(ServerConfig c)
        : config(std::move(c)),
          target(parse_target(config.target)),
          credit(credit_per_share(target)),
          listener(config.bind_address, config.port) {
        if (!config.digest) config.digest = sha256;
    }

    bool key_accepted(const std::string& key) const {
        if (key.size() != 32) return false;
        return config.site_keys.empty() ||
               std::find(config.site_keys.begin(), config.site_keys.end(), key) != config.site_keys.end();
    }

    Job new_job(std::mt19937_64& rng) const {
        Job j;
        j.job_id = std::to_string(100000000000000ULL + rng() % 900000000000000ULL);
        std::vector<std::uint8_t> blob(76);
        for (auto& b : blob) b = static_cast<std::uint8_t>(rng());
        j.blob = to_hex(blob);
        j.target = config.target;
        return j;
    }

    void session(tcp::socket sock, std::uint64_t id) {
        const int fd = sock.native_handle();
        listener.track(fd);
        SessionLog log;
        Stopwatch clock;
        try {
            websocket::stream<tcp::socket> ws(std::move(sock));
            ws.accept();
            ws.text(true);

            std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(id)));
            SessionState state;
            Job job;
            std::set<std::string> nonces;
            std::uint64_t session_hashes = 0;

            auto send = [&](ProtocolFrame f) {
                const auto text = serialize(f);
                state.apply(f);
                log.entries.push_back({clock.us(), Direction::ServerToClient, text});
                ws.write(net::buffer(text));
            };
            auto reject = [&](const std::string& why) {
                boost::system::error_code ec;
                ws.close(websocket::close_reason(websocket::close_code::policy_error, why.substr(0, 120)), ec);
            };
            auto issue_job = [&] {
                job = new_job(rng);
                nonces.clear();
                send(job);
            };

            for (;;) {
                beast::flat_buffer buffer;
                ws.read(buffer);
                auto payload = beast::buffers_to_string(buffer.data());
                log.entries.push_back({clock.us(), Direction::ClientToServer, payload});

                std::optional<ProtocolFrame> frame;
                try {
                    frame = classify_frame(payload);
                } catch (const Malformed& e) {
                    reject(e.what());
                    break;
                }
                if (!frame || frame->direction() != Direction::ClientToServer) {
                    reject("unexpected message");
                    break;
                }
                try {
                    state.apply(*frame);
                } catch (const ProtocolViolation& e) {
                    reject(e.what());
                    break;
                }

                if (frame->kind() == FrameKind::Auth) {
                    const auto& key = frame->as<Auth>().site_key;
                    if (!key_accepted(key)) {
                        reject("invalid site key");
                        break;
                    }
                    std::uint64_t so_far;
                    {
                        std::lock_guard lock(ledger_mu);
                        so_far = ledger[key];
                    }
                    send(Authed{"", so_far});
                    issue_job();
                } else {  // submit
                    const auto& s = frame->as<Submit>();
                    if (s.job_id != job.job_id || !nonces.insert(s.nonce).second) {
                        reject("stale job or duplicate nonce");
                        break;
                    }
                    const auto d = share_digest(config.digest, job.blob, s.nonce);
                    if (to_hex(d) != s.result || !meets_target(d, target)) {
                        reject("share does not verify");
                        break;
                    }
                    session_hashes += credit;
                    {
                        std::lock_guard lock(ledger_mu);
                        ledger[state.site_key] += credit;
                    }
                    send(HashAccept{session_hashes});
                    issue_job();
                }
            }
        } catch (const std::exception&) {
            // peer went away or closed; the log holds what happened
        }
        listener.untrack(fd);
        listener.finish(std::move(log));
    }
};

DropzoneServer::DropzoneServer(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    impl_->listener.start([impl = impl_.get()](tcp::socket s, std::uint64_t id) { impl->session(std::move(s), id); });
}

DropzoneServer::~DropzoneServer() { stop(); }

std::uint16_t DropzoneServer::port() const { return impl_->listener.port(); }

std::uint64_t DropzoneServer::balance(const std::string& site_key) const {
    std::lock_guard lock(impl_->ledger_mu);
    auto it = impl_->ledger.find(site_key);
    return it == impl_->ledger.end() ? 0 : it->second;
}

std::vector<SessionLog> DropzoneServer::logs() const { return impl_->listener.logs(); }

bool DropzoneServer::wait_for_sessions(std::size_t count, std::chrono::milliseconds timeout) const {
    return impl_->listener.wait_for(count, timeout);
}

void DropzoneServer::stop() { impl_->listener.stop(); }

// ---- miner -----------------------------------------------------------------------

double MinerResult::busy_fraction() const {
    const double total = busy_seconds + idle_seconds;
    return total > 0 ? busy_seconds / total : 0.0;
}

MinerResult run_miner_client(const MinerConfig& config) {
    MinerResult r;
    Stopwatch clock;
    const DigestFn digest = config.digest ? config.digest : DigestFn(sha256);
    try {
        if (config.throttle < 0 || config.throttle > 1) throw std::invalid_argument("throttle must be in [0, 1]");
        const auto ep = parse_endpoint(config.endpoint);
        if (ep.scheme != "ws") throw std::invalid_argument("only ws:// endpoints are supported");

        net::io_context ioc;
        tcp::resolver resolver(ioc);
        websocket::stream<tcp::socket> ws(ioc);
        net::connect(ws.next_layer(), resolver.resolve(ep.host, std::to_string(ep.port)));
        ws.handshake(config.host_header.empty() ? ep.host + ":" + std::to_string(ep.port) : config.host_header,
                     ep.path);
        ws.text(true);

        SessionState state;
        state.throttle = config.throttle;
        auto send = [&](ProtocolFrame f) {
            const auto text = serialize(f);
            state.apply(f);
            r.log.entries.push_back({clock.us(), Direction::ClientToServer, text});
            ws.write(net::buffer(text));
        };
        auto receive = [&](FrameKind want) {
            beast::flat_buffer buffer;
            try {
                ws.read(buffer);
            } catch (const boost::system::system_error& e) {
                if (e.code() == websocket::error::closed)
                    throw std::runtime_error("server closed the session: " + std::string(ws.reason().reason.c_str()));
                throw;
            }
            auto payload = beast::buffers_to_string(buffer.data());
            r.log.entries.push_back({clock.us(), Direction::ServerToClient, payload});
            auto f = classify_frame(payload);
            if (!f || f->kind() != want)
                throw ProtocolViolation("expected " + std::string(to_string(want)) + ", got: " + payload);
            state.apply(*f);
            return *f;
        };

        send(Auth{config.site_key, "anonymous", std::nullopt, 0});
        receive(FrameKind::Authed);
        Job job = receive(FrameKind::Job).as<Job>();

        const double alpha = config.throttle;
        const auto busy_slice = std::chrono::duration<double>(config.slice) * (1.0 - alpha);
        std::uint32_t nonce = 0;
        std::uint32_t target = parse_target(job.target);
        auto budget_left = [&] {
            return r.hashes_computed < config.hash_budget &&
                   (config.max_shares == 0 || r.shares_submitted < config.max_shares);
        };

        while (alpha < 1.0 && budget_left()) {
            const auto busy_start = Clock::now();
            std::optional<Submit> share;
            while (budget_left() && Clock::now() - busy_start < busy_slice) {
                const auto n = nonce_hex(nonce++);
                const auto d = share_digest(digest, job.blob, n);
                ++r.hashes_computed;
                if (meets_target(d, target)) {
                    share = Submit{job.job_id, n, to_hex(d)};
                    break;
                }
            }
            r.busy_seconds += std::chrono::duration<double>(Clock::now() - busy_start).count();

            if (share) {
                send(*share);
                ++r.shares_submitted;
                r.accepted_hashes = receive(FrameKind::HashAccept).as<HashAccept>().hashes;
                job = receive(FrameKind::Job).as<Job>();
                target = parse_target(job.target);
                nonce = 0;
            }

            // Idle long enough that idle / (busy + idle) tracks alpha overall;
            // oversleeping in one slice is paid back in the next.
            const double owed = r.busy_seconds * alpha / (1.0 - alpha) - r.idle_seconds;
            if (owed > 0) {
                const auto idle_start = Clock::now();
                std::this_thread::sleep_for(std::chrono::duration<double>(owed));
                r.idle_seconds += std::chrono::duration<double>(Clock::now() - idle_start).count();
            }
        }
        boost::system::error_code ec;
        ws.close(websocket::close_code::normal, ec);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

// ---- relay -------------------------------------------------------------------------

struct RelayProxy::Impl {
    RelayConfig config;
    Listener listener;

    explicit Impl(RelayConfig c) : config(std::move(c)), listener(config.listen_address, config.listen_port) {}

    void connection(tcp::socket client, std::uint64_t) {
        const int client_fd = client.native_handle();
        listener.track(client_fd);
        tcp::socket upstream(client.get_executor());
        try {
            tcp::resolver resolver(client.get_executor());
            net::connect(upstream, resolver.resolve(config.upstream_host, std::to_string(config.upstream_port)));
        } catch (const std::exception& e) {
            listener.untrack(client_fd);
            listener.fail("upstream " + config.upstream_host + ":" + std::to_string(config.upstream_port) +
                                    " unreachable: " + e.what());
            return;
        }
        const int upstream_fd = upstream.native_handle();
        listener.track(upstream_fd);

        SessionLog log;
        std::mutex log_mu;
        Stopwatch clock;
        auto pump = [&](tcp::socket& from, tcp::socket& to, Direction dir) {
            WebSocketTap tap;
            std::array<char, 16384> buf;
            for (;;) {
                boost::system::error_code ec;
                const auto n = from.read_some(net::buffer(buf), ec);
                if (ec) break;
                // record before forwarding so a reply can never be logged first
                for (auto& msg : tap.feed(std::span<const char>(buf.data(), n))) {
                    std::lock_guard lock(log_mu);
                    log.entries.push_back({clock.us(), dir, std::move(msg)});
                }
                net::write(to, net::buffer(buf.data(), n), ec);
                if (ec) break;
            }
            ::shutdown(to.native_handle(), SHUT_WR);
        };
        std::thread down([&] { pump(upstream, client, Direction::ServerToClient); });
        pump(client, upstream, Direction::ClientToServer);
        down.join();

        listener.untrack(client_fd);
        listener.untrack(upstream_fd);
        listener.finish(std::move(log));
    }
};

RelayProxy::RelayProxy(RelayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
    impl_->listener.start([impl = impl_.get()](tcp::socket s, std::uint64_t id) { impl->connection(std::move(s), id); });
}

RelayProxy::~RelayProxy() { stop(); }
std::uint16_t RelayProxy::port() const { return impl_->listener.port(); }
std::vector<SessionLog> RelayProxy::logs() const { return impl_->listener.logs(); }
std::vector<std::string> RelayProxy::errors() const { return impl_->listener.errors(); }
bool RelayProxy::wait_for_sessions(std::size_t count, std::chrono::milliseconds timeout) const {
    return impl_->listener.wait_for(count, timeout);
}
void RelayProxy::stop() { impl_->listener.stop(); }

}  // namespace cjscope::mineproto
