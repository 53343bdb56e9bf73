#include "mbsim/stats.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace mbsim {

const std::vector<std::string>& counter_names() {
    static const std::vector<std::string> names{
        "generated",        "received_for_forwarding", "mac_sent_data",  "data_tx",
        "dropped_overflow", "dropped_retry",           "dropped_no_route", "retransmissions",
        "rts_sent",         "cts_sent",                "ack_sent",       "sch_sent",
        "control_received", "duplicates_discarded",    "sink_delivered", "collisions",
        "timeouts",         "cycles",
    };
    return names;
}

std::vector<std::uint64_t> counter_values(const NodeRow& r) {
    const auto& c = r.counters;
    return {c.generated,        c.received_for_forwarding, c.mac_sent_data,   c.data_tx,
            c.dropped_overflow, c.dropped_retry,           c.dropped_no_route, c.retransmissions,
            c.rts_sent,         c.cts_sent,                c.ack_sent,        c.sch_sent,
            c.control_received, c.duplicates_discarded,    c.sink_delivered,  c.collisions,
            c.timeouts,         c.cycles};
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

StatsRecorder::StatsRecorder(Kernel& kernel, SimTime interval, SimTime warmup, Probe probe)
    : kernel_(kernel), interval_(interval), warmup_(warmup), probe_(std::move(probe)) {
    if (interval_ <= SimTime{}) throw std::invalid_argument("sample interval must be positive");
}

void StatsRecorder::start(SimTime horizon) {
    if (warmup_ <= SimTime{}) {
        warmup_rows_ = probe_();
    } else if (warmup_ <= horizon) {
        kernel_.schedule(warmup_, EventKind::StatSample, EventTarget{}, [this] { warmup_rows_ = probe_(); });
    }
    if (interval_ <= horizon) {
        kernel_.schedule(interval_, EventKind::StatSample, EventTarget{}, [this, horizon] { take(horizon); });
    }
}

void StatsRecorder::take(SimTime horizon) {
    samples_.push_back(Sample{kernel_.now(), probe_()});
    const SimTime next = kernel_.now() + interval_;
    if (next <= horizon) {
        kernel_.schedule(next, EventKind::StatSample, EventTarget{}, [this, horizon] { take(horizon); });
    }
}

const MetricSummary& NodeSummary::metric(const std::string& name) const {
    for (const auto& m : metrics) {
        if (m.name == name) return m;
    }
    throw std::out_of_range("no metric " + name);
}

const NodeSummary& StatsReport::node(NodeId id) const {
    for (const auto& n : nodes) {
        if (n.node == id) return n;
    }
    throw std::out_of_range("no node " + std::to_string(id));
}

StatsReport build_report(const std::string& scenario, std::uint64_t seed, SimTime duration,
                         const StatsRecorder& rec, const std::vector<NodeRow>& final_rows) {
    StatsReport r;
    r.scenario = scenario;
    r.seed = seed;
    r.duration_s = duration.to_seconds();
    r.warmup_s = rec.warmup().to_seconds();
    const double window = (duration - rec.warmup()).to_seconds();
    const auto& names = counter_names();
    for (std::size_t i = 0; i < final_rows.size(); ++i) {
        const auto& row = final_rows[i];
        NodeSummary ns;
        ns.node = row.node;
        ns.address = row.address;
        const auto end = counter_values(row);
        std::vector<std::uint64_t> start(end.size(), 0);
        if (i < rec.warmup_rows().size()) start = counter_values(rec.warmup_rows()[i]);
        for (std::size_t k = 0; k < names.size(); ++k) {
            const double delta = static_cast<double>(end[k] - start[k]);
            ns.metrics.push_back({names[k], static_cast<double>(end[k]), window > 0 ? delta / window : 0.0});
        }
        double q_sum = 0.0;
        double q_max = 0.0;
        std::size_t q_n = 0;
        for (const auto& s : rec.samples()) {
            if (s.at <= rec.warmup() || i >= s.rows.size()) continue;
            const double q = static_cast<double>(s.rows[i].held);
            q_sum += q;
            q_max = std::max(q_max, q);
            ++q_n;
        }
        const double q_mean = q_n ? q_sum / static_cast<double>(q_n) : 0.0;
        ns.metrics.push_back({"buffer_packets_final", static_cast<double>(row.held), q_mean});
        ns.metrics.push_back({"buffer_packets_max", q_max, q_max});
        ns.metrics.push_back({"queued_final", static_cast<double>(row.queued), 0.0});
        ns.metrics.push_back({"in_flight_final", static_cast<double>(row.held - row.queued), 0.0});
        ns.metrics.push_back({"sink_duplicates", static_cast<double>(row.sink_duplicates), 0.0});
        ns.metrics.push_back({"sink_latency_mean_us", row.sink_latency_mean_us, 0.0});
        std::map<Address, std::uint64_t> from_start;
        if (i < rec.warmup_rows().size()) from_start = rec.warmup_rows()[i].data_received_from;
        for (const auto& [addr, count] : row.data_received_from) {
            const double delta = static_cast<double>(count - from_start[addr]);
            ns.metrics.push_back({"data_from_" + std::to_string(addr), static_cast<double>(count),
                                  window > 0 ? delta / window : 0.0});
        }
        r.nodes.push_back(std::move(ns));
    }
    return r;
}

void write_summary_csv(std::ostream& os, const StatsReport& r) {
    os << "node,address,metric,total,steady_rate_per_s\n";
    for (const auto& n : r.nodes) {
        for (const auto& m : n.metrics) {
            os << n.node << ',' << n.address << ',' << m.name << ',' << format_number(m.total) << ','
               << format_number(m.steady_rate) << '\n';
        }
    }
}

void write_summary_json(std::ostream& os, const StatsReport& r) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["duration_s"] = r.duration_s;
    j["warmup_s"] = r.warmup_s;
    j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : r.nodes) {
        nlohmann::ordered_json node;
        node["node"] = n.node;
        node["address"] = n.address;
        nlohmann::ordered_json metrics;
        for (const auto& m : n.metrics) {
            metrics[m.name] = {{"total", m.total}, {"steady_rate_per_s", m.steady_rate}};
        }
        node["metrics"] = metrics;
        j["nodes"].push_back(node);
    }
    os << j.dump(2) << '\n';
}

void write_series_csv(std::ostream& os, const StatsRecorder& rec) {
    const auto& names = counter_names();
    os << "time_s,node,queued,buffer_packets";
    for (const auto& n : names) os << ',' << n << "_per_s";
    os << '\n';
    std::vector<std::vector<std::uint64_t>> prev;
    SimTime prev_at;
    for (const auto& s : rec.samples()) {
        const double dt = (s.at - prev_at).to_seconds();
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            const auto& row = s.rows[i];
            const auto cur = counter_values(row);
            os << format_number(s.at.to_seconds()) << ',' << row.node << ',' << row.queued << ',' << row.held;
            for (std::size_t k = 0; k < cur.size(); ++k) {
                const std::uint64_t before = i < prev.size() ? prev[i][k] : 0;
                os << ',' << format_number(static_cast<double>(cur[k] - before) / dt);
            }
            os << '\n';
        }
        prev.clear();
        for (const auto& row : s.rows) prev.push_back(counter_values(row));
        prev_at = s.at;
    }
}

void export_stats(const std::filesystem::path& dir, const StatsReport& r, const StatsRecorder& rec) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("summary.csv");
        write_summary_csv(f, r);
    }
    {
        auto f = open("summary.json");
        write_summary_json(f, r);
    }
    {
        auto f = open("series.csv");
        write_series_csv(f, rec);
    }
}

}  // namespace mbsim
