#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "mbsim/frame.hpp"
#include "mbsim/kernel.hpp"

namespace mbsim {

struct SourceConfig {
    NodeId node = 0;
    std::uint8_t queue_index = 1;
    NodeId dest = 0;
    std::uint32_t packet_bytes = 512;
    SimTime interarrival = SimTime::ms(4);
    SimTime start_at;
    std::optional<SimTime> stop_at;
    double jitter_fraction = 0.0;  ///< uniform +/- fraction of interarrival, 0 = CBR

    friend bool operator==(const SourceConfig&, const SourceConfig&) = default;
};

class RoutingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr NodeId kAnyOrigin = 0xffffffffu;

struct RouteKey {
    NodeId node;
    NodeId dest;
    NodeId origin = kAnyOrigin;
    auto operator<=>(const RouteKey&) const = default;
};

/// Static next-hop table keyed by (node, final destination), optionally
/// narrowed to one originating node.
class RouteTable {
public:
    void set(NodeId node, NodeId dest, NodeId next, NodeId origin = kAnyOrigin);
    /// Origin-specific entry first, then the generic one; empty when neither
    /// exists. Throws RoutingError if node == dest.
    std::optional<NodeId> next_hop(NodeId node, NodeId dest, NodeId origin = kAnyOrigin) const;
    /// Throws RoutingError if following next hops from any entry loops or
    /// dead-ends before reaching the destination.
    void validate(std::size_t node_count) const;

    const std::map<RouteKey, NodeId>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    friend bool operator==(const RouteTable&, const RouteTable&) = default;

private:
    std::map<RouteKey, NodeId> entries_;
};

class TreeIdAllocator {
public:
    std::uint64_t allocate() { return next_++; }
    std::uint64_t issued() const { return next_ - 1; }

private:
    std::uint64_t next_ = 1;
};

/// CBR packet generator feeding one MAC queue.
class TrafficSource {
public:
    using Emit = std::function<void(Frame)>;

    TrafficSource(Kernel& kernel, SourceConfig cfg, Address own_addr, Address dest_addr, TreeIdAllocator& ids,
                  Emit emit);

    void start();
    std::uint64_t generated() const { return generated_; }
    const SourceConfig& config() const { return cfg_; }

private:
    void tick();
    SimTime next_gap();

    Kernel& kernel_;
    SourceConfig cfg_;
    Address own_;
    Address dest_;
    TreeIdAllocator& ids_;
    Emit emit_;
    std::uint64_t generated_ = 0;
    std::uint32_t seq_ = 0;
};

struct LatencyStats {
    std::uint64_t count = 0;
    SimTime min = SimTime::max();
    SimTime max;
    SimTime total;

    void add(SimTime v);
    double mean_us() const;
};

class Sink {
public:
    /// Returns false for a tree id that already reached this sink.
    bool accept(const Frame& f, SimTime now);

    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t duplicates() const { return duplicates_; }
    const std::map<Address, std::uint64_t>& per_origin() const { return per_origin_; }
    const LatencyStats& latency() const { return latency_; }

private:
    std::uint64_t delivered_ = 0;
    std::uint64_t duplicates_ = 0;
    std::unordered_set<std::uint64_t> seen_;
    std::map<Address, std::uint64_t> per_origin_;
    LatencyStats latency_;
};

}  // namespace mbsim
