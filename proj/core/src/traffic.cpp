#include "mbsim/traffic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>

namespace mbsim {

void RouteTable::set(NodeId node, NodeId dest, NodeId next, NodeId origin) {
    if (node == dest) {
        throw RoutingError("route for node " + std::to_string(node) + " to itself");
    }
    if (next == node) {
        throw RoutingError("route for node " + std::to_string(node) + " points at itself");
    }
    entries_[RouteKey{node, dest, origin}] = next;
}

std::optional<NodeId> RouteTable::next_hop(NodeId node, NodeId dest, NodeId origin) const {
    if (node == dest) {
        throw RoutingError("next hop requested for node " + std::to_string(node) + " to itself");
    }
    if (origin != kAnyOrigin) {
        auto it = entries_.find(RouteKey{node, dest, origin});
        if (it != entries_.end()) return it->second;
    }
    auto it = entries_.find(RouteKey{node, dest, kAnyOrigin});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void RouteTable::validate(std::size_t node_count) const {
    for (const auto& [key, next] : entries_) {
        const NodeId start = key.node;
        const NodeId dest = key.dest;
        NodeId at = next;
        std::size_t steps = 1;
        std::set<NodeId> seen{start};
        while (at != dest) {
            if (!seen.insert(at).second || steps > node_count) {
                throw RoutingError("routing loop from node " + std::to_string(start) + " to " + std::to_string(dest));
            }
            auto hop = next_hop(at, dest, key.origin == kAnyOrigin ? start : key.origin);
            if (!hop) {
                throw RoutingError("route from node " + std::to_string(start) + " to " + std::to_string(dest) +
                                   " dead-ends at node " + std::to_string(at));
            }
            at = *hop;
            ++steps;
        }
    }
}

TrafficSource::TrafficSource(Kernel& kernel, SourceConfig cfg, Address own_addr, Address dest_addr,
                             TreeIdAllocator& ids, Emit emit)
    : kernel_(kernel), cfg_(cfg), own_(own_addr), dest_(dest_addr), ids_(ids), emit_(std::move(emit)) {
    if (cfg_.interarrival <= SimTime{}) {
        throw std::invalid_argument("source interarrival must be positive");
    }
    if (cfg_.queue_index < 1 || cfg_.queue_index > 4) {
        throw std::invalid_argument("source queue index must be in 1..4");
    }
}

void TrafficSource::start() {
    if (cfg_.stop_at && *cfg_.stop_at <= cfg_.start_at) return;
    kernel_.schedule(cfg_.start_at, EventKind::SourceGenerate, EventTarget{cfg_.node, std::nullopt},
                     [this] { tick(); });
}

SimTime TrafficSource::next_gap() {
    if (cfg_.jitter_fraction <= 0.0) return cfg_.interarrival;
    std::uniform_real_distribution<double> u(-cfg_.jitter_fraction, cfg_.jitter_fraction);
    const double ns = static_cast<double>(cfg_.interarrival.count()) * (1.0 + u(kernel_.rng(cfg_.node)));
    return SimTime::ns(std::max<std::int64_t>(1, static_cast<std::int64_t>(ns)));
}

void TrafficSource::tick() {
    const SimTime now = kernel_.now();
    if (cfg_.stop_at && now >= *cfg_.stop_at) return;
    Frame f;
    f.kind = FrameKind::Data;
    f.tx_addr = own_;
    f.origin_addr = own_;
    f.final_dest_addr = dest_;
    f.size_bytes = cfg_.packet_bytes;
    f.seq_no = seq_++;
    f.tree_id = ids_.allocate();
    f.queue_index = cfg_.queue_index;
    f.created_ns = now.count();
    ++generated_;
    emit_(f);
    kernel_.schedule(now + next_gap(), EventKind::SourceGenerate, EventTarget{cfg_.node, std::nullopt},
                     [this] { tick(); });
}

void LatencyStats::add(SimTime v) {
    ++count;
    min = std::min(min, v);
    max = std::max(max, v);
    total += v;
}

double LatencyStats::mean_us() const {
    return count == 0 ? 0.0 : total.to_us() / static_cast<double>(count);
}

bool Sink::accept(const Frame& f, SimTime now) {
    if (!seen_.insert(f.tree_id).second) {
        ++duplicates_;
        return false;
    }
    ++delivered_;
    ++per_origin_[f.origin_addr];
    latency_.add(now - SimTime::ns(f.created_ns));
    return true;
}

}  // namespace mbsim
