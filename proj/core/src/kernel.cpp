#include "mbsim/kernel.hpp"

#include <string>

namespace mbsim {

std::string to_string(SimTime t) {
    return std::to_string(t.count()) + "ns";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::TxEnd: return "TxEnd";
        case EventKind::RxBegin: return "RxBegin";
        case EventKind::RxEnd: return "RxEnd";
        case EventKind::BackoffExpired: return "BackoffExpired";
        case EventKind::DeferExpired: return "DeferExpired";
        case EventKind::FrameTimeout: return "FrameTimeout";
        case EventKind::SourceGenerate: return "SourceGenerate";
        case EventKind::StatSample: return "StatSample";
        case EventKind::Delivery: return "Delivery";
        case EventKind::MacTimer: return "MacTimer";
    }
    return "?";
}

Kernel::Kernel(std::uint64_t seed) : seed_(seed) {}

EventHandle Kernel::schedule(SimTime at, EventKind kind, EventTarget target, Action action) {
    if (at < now_) {
        throw SchedulingError("event scheduled in the past: " + to_string(at) + " < now " +
                              to_string(now_));
    }
    const std::uint64_t seq = next_seq_++;
    queue_.emplace(Key{at.count(), seq}, Entry{kind, target, std::move(action)});
    ++scheduled_;
    return EventHandle{at, seq};
}

bool Kernel::cancel(const EventHandle& h) {
    if (!h.valid()) {
        return false;
    }
    if (queue_.erase(Key{h.at.count(), h.seq}) == 0) {
        return false;
    }
    ++cancelled_;
    return true;
}

bool Kernel::is_pending(const EventHandle& h) const {
    return h.valid() && queue_.count(Key{h.at.count(), h.seq}) != 0;
}

std::uint64_t Kernel::run_until(SimTime end) {
    std::uint64_t n = 0;
    while (!queue_.empty()) {
        auto it = queue_.begin();
        if (it->first.first > end.count()) {
            break;
        }
        const SimTime at = SimTime::ns(it->first.first);
        const std::uint64_t seq = it->first.second;
        Entry entry = std::move(it->second);
        queue_.erase(it);
        now_ = at;
        ++dispatched_;
        ++n;
        if (observer_) {
            observer_(DispatchRecord{at, seq, entry.kind, entry.target});
        }
        if (entry.action) {
            entry.action();
        }
    }
    return n;
}

std::mt19937_64& Kernel::rng(NodeId node) {
    auto it = streams_.find(node);
    if (it == streams_.end()) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                          static_cast<std::uint32_t>(node), 0x6d62u};
        it = streams_.emplace(node, std::mt19937_64(seq)).first;
    }
    return it->second;
}

}  // namespace mbsim
