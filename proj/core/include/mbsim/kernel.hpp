#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "mbsim/time.hpp"

namespace mbsim {

using NodeId = std::uint32_t;

enum class EventKind : std::uint8_t {
    TxEnd,
    RxBegin,
    RxEnd,
    BackoffExpired,
    DeferExpired,
    FrameTimeout,
    SourceGenerate,
    StatSample,
    Delivery,
    MacTimer,
};

const char* to_string(EventKind k);

struct EventTarget {
    std::optional<NodeId> node;
    std::optional<std::uint32_t> port;
};

/// Identifies a scheduled event for later cancellation. Default-constructed
/// handles refer to nothing.
struct EventHandle {
    SimTime at;
    std::uint64_t seq = 0;

    bool valid() const { return seq != 0; }
    friend bool operator==(const EventHandle&, const EventHandle&) = default;
};

struct DispatchRecord {
    SimTime at;
    std::uint64_t seq;
    EventKind kind;
    EventTarget target;
};

/// Thrown on kernel misuse, e.g. scheduling into the past.
class SchedulingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Single-threaded discrete-event engine. Events are totally ordered by
/// (fire time, insertion sequence).
class Kernel {
public:
    using Action = std::function<void()>;
    using Observer = std::function<void(const DispatchRecord&)>;

    explicit Kernel(std::uint64_t seed = 0);

    Kernel(const Kernel&) = delete;
    Kernel& operator=(const Kernel&) = delete;

    EventHandle schedule(SimTime at, EventKind kind, EventTarget target, Action action);
    EventHandle schedule_in(SimTime delay, EventKind kind, EventTarget target, Action action) {
        return schedule(now_ + delay, kind, target, std::move(action));
    }

    /// True iff the event was still pending and has now been removed.
    bool cancel(const EventHandle& h);
    bool is_pending(const EventHandle& h) const;

    /// Dispatches events in order until the queue is empty or the next event
    /// lies beyond `end`. Returns the number of events dispatched.
    std::uint64_t run_until(SimTime end);

    SimTime now() const { return now_; }
    std::uint64_t seed() const { return seed_; }

    std::uint64_t scheduled_count() const { return scheduled_; }
    std::uint64_t dispatched_count() const { return dispatched_; }
    std::uint64_t cancelled_count() const { return cancelled_; }
    std::size_t pending_count() const { return queue_.size(); }

    /// Stream derived from (seed, node) only; independent of other nodes.
    std::mt19937_64& rng(NodeId node);

    void set_observer(Observer obs) { observer_ = std::move(obs); }

private:
    struct Entry {
        EventKind kind;
        EventTarget target;
        Action action;
    };
    using Key = std::pair<std::int64_t, std::uint64_t>;

    std::uint64_t seed_;
    SimTime now_{};
    std::uint64_t next_seq_ = 1;
    std::uint64_t scheduled_ = 0;
    std::uint64_t dispatched_ = 0;
    std::uint64_t cancelled_ = 0;
    std::map<Key, Entry> queue_;
    std::unordered_map<NodeId, std::mt19937_64> streams_;
    Observer observer_;
};

}  // namespace mbsim
