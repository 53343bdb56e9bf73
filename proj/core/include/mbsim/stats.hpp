#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "mbsim/kernel.hpp"
#include "mbsim/mac.hpp"
#include "mbsim/traffic.hpp"

namespace mbsim {

/// Point-in-time view of one node.
struct NodeRow {
    NodeId node = 0;
    Address address = 0;
    std::size_t queued = 0;  ///< packets waiting in the four queues
    std::size_t held = 0;    ///< queued plus staged and transmit copies
    MacCounters counters;
    std::uint64_t sink_delivered = 0;
    std::uint64_t sink_duplicates = 0;
    double sink_latency_mean_us = 0.0;
    std::map<Address, std::uint64_t> data_received_from;
};

struct Sample {
    SimTime at;
    std::vector<NodeRow> rows;
};

/// Counter names in export order; values for a row.
const std::vector<std::string>& counter_names();
std::vector<std::uint64_t> counter_values(const NodeRow& r);

/// Periodic sampling of all nodes plus a snapshot at the end of warm-up.
class StatsRecorder {
public:
    using Probe = std::function<std::vector<NodeRow>()>;

    StatsRecorder(Kernel& kernel, SimTime interval, SimTime warmup, Probe probe);

    void start(SimTime horizon);
    std::vector<NodeRow> snapshot() const { return probe_(); }

    const std::vector<Sample>& samples() const { return samples_; }
    const std::vector<NodeRow>& warmup_rows() const { return warmup_rows_; }
    SimTime interval() const { return interval_; }
    SimTime warmup() const { return warmup_; }

private:
    void take(SimTime horizon);

    Kernel& kernel_;
    SimTime interval_;
    SimTime warmup_;
    Probe probe_;
    std::vector<Sample> samples_;
    std::vector<NodeRow> warmup_rows_;
};

struct MetricSummary {
    std::string name;
    double total = 0.0;
    double steady_rate = 0.0;  ///< per second, warm-up excluded
};

struct NodeSummary {
    NodeId node = 0;
    Address address = 0;
    std::vector<MetricSummary> metrics;

    const MetricSummary& metric(const std::string& name) const;
    double rate(const std::string& name) const { return metric(name).steady_rate; }
    double total(const std::string& name) const { return metric(name).total; }
};

struct StatsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    double warmup_s = 0.0;
    std::vector<NodeSummary> nodes;

    const NodeSummary& node(NodeId id) const;
};

StatsReport build_report(const std::string& scenario, std::uint64_t seed, SimTime duration,
                         const StatsRecorder& rec, const std::vector<NodeRow>& final_rows);

void write_summary_csv(std::ostream& os, const StatsReport& r);
void write_summary_json(std::ostream& os, const StatsReport& r);
void write_series_csv(std::ostream& os, const StatsRecorder& rec);
/// summary.csv, summary.json and series.csv; throws std::runtime_error on I/O failure.
void export_stats(const std::filesystem::path& dir, const StatsReport& r, const StatsRecorder& rec);

std::string format_number(double v);

}  // namespace mbsim
