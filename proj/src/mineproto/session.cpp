#include <charconv>

#include "cjscope/mineproto.hpp"
#include "json.hpp"

namespace cjscope::mineproto {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Idle: return "Idle";
        case Phase::AuthSent: return "AuthSent";
        case Phase::Authed: return "Authed";
        case Phase::JobIssued: return "JobIssued";
        case Phase::Mining: return "Mining";
        case Phase::Credited: return "Credited";
    }
    return "?";
}

void SessionState::apply(const ProtocolFrame& frame) {
    const FrameKind k = frame.kind();
    auto illegal = [&] {
        throw ProtocolViolation(std::string(to_string(k)) + " is not allowed in phase " + std::string(to_string(phase)));
    };
    switch (k) {
        case FrameKind::Auth:
            if (phase != Phase::Idle) illegal();
            site_key = frame.as<Auth>().site_key;
            phase = Phase::AuthSent;
            break;
        case FrameKind::Authed:
            if (phase != Phase::AuthSent) illegal();
            phase = Phase::Authed;
            break;
        case FrameKind::Job:
            if (phase != Phase::Authed && phase != Phase::Credited) illegal();
            phase = Phase::JobIssued;
            break;
        case FrameKind::Submit:
            if (phase != Phase::JobIssued) illegal();
            phase = Phase::Mining;
            break;
        case FrameKind::HashAccept: {
            if (phase != Phase::Mining) illegal();
            const auto h = frame.as<HashAccept>().hashes;
            if (h < accepted_hashes)
                throw ProtocolViolation("hash_accept total went down from " + std::to_string(accepted_hashes) +
                                        " to " + std::to_string(h));
            accepted_hashes = h;
            phase = Phase::Credited;
            break;
        }
    }
}

std::string SessionLog::to_jsonl() const {
    std::string out;
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["t_us"] = e.t_us;
        j["direction"] = to_string(e.direction);
        j["payload"] = e.payload;
        out += j.dump();
        out += '\n';
    }
    return out;
}

SessionLog SessionLog::from_jsonl(std::string_view text) {
    SessionLog log;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        const auto where = "session log line " + std::to_string(line_no) + ": ";
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw std::invalid_argument(where + "not a JSON object");
        try {
            LogEntry e;
            e.t_us = j.at("t_us").get<std::uint64_t>();
            e.direction = parse_direction(j.at("direction").get<std::string>());
            e.payload = j.at("payload").get<std::string>();
            if (!log.entries.empty() && e.t_us < log.entries.back().t_us)
                throw std::invalid_argument("timestamps go backwards");
            log.entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw std::invalid_argument(where + ex.what());
        } catch (const std::invalid_argument& ex) {
            throw std::invalid_argument(where + ex.what());
        }
    }
    return log;
}

ReplayReport replay(const SessionLog& log, const DigestFn& digest) {
    ReplayReport r;
    SessionState state;
    std::optional<Job> job;
    std::optional<Submit> pending;
    auto fail = [&](std::size_t i, const std::string& why) {
        r.ok = false;
        r.error = "entry " + std::to_string(i) + ": " + why;
    };
    for (std::size_t i = 0; i < log.entries.size(); ++i) {
        const auto& e = log.entries[i];
        std::optional<ProtocolFrame> f;
        try {
            f = classify_frame(e.payload);
        } catch (const Malformed& ex) {
            fail(i, ex.what());
            break;
        }
        if (!f) {
            fail(i, "not a protocol frame");
            break;
        }
        ++r.frames;
        if (f->direction() != e.direction) {
            fail(i, std::string(to_string(f->kind())) + " logged as " + std::string(to_string(e.direction)));
            break;
        }
        try {
            state.apply(*f);
        } catch (const ProtocolViolation& ex) {
            fail(i, ex.what());
            break;
        }
        if (f->kind() == FrameKind::Job) {
            job = f->as<Job>();
        } else if (f->kind() == FrameKind::Submit) {
            pending = f->as<Submit>();
            if (pending->job_id != job->job_id) {
                fail(i, "submit for unknown job " + pending->job_id);
                break;
            }
            if (digest) {
                const auto d = share_digest(digest, job->blob, pending->nonce);
                if (to_hex(d) != pending->result || !meets_target(d, parse_target(job->target))) {
                    fail(i, "submitted result does not verify");
                    break;
                }
            }
        } else if (f->kind() == FrameKind::HashAccept) {
            const auto credit = credit_per_share(job->target);
            const auto h = f->as<HashAccept>().hashes;
            if (h != r.expected_hashes + credit) {
                fail(i, "hash_accept total " + std::to_string(h) + ", expected " +
                            std::to_string(r.expected_hashes + credit));
                break;
            }
            ++r.accepted_shares;
            r.expected_hashes += credit;
            r.credited_hashes = h;
        }
    }
    r.final_phase = state.phase;
    return r;
}

}  // namespace cjscope::mineproto
