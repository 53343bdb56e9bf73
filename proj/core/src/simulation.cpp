#include "mbsim/simulation.hpp"

#include <algorithm>
#include <sstream>

namespace mbsim {

Simulation::Simulation(Scenario scenario, SimOptions opts)
    : scenario_(std::move(scenario)), opts_(opts), kernel_(scenario_.seed) {
    validate_scenario(scenario_);
    trace_.keep_records(opts_.keep_trace);
    trace_.stream_to(opts_.trace_stream);
    trace_.on_record(opts_.trace_callback);
    Trace* tr = trace_.enabled() ? &trace_ : nullptr;

    std::vector<RadioConfig> radios;
    for (const auto& n : scenario_.nodes) {
        RadioConfig rc;
        rc.node = n.id;
        rc.position = n.position;
        for (std::size_t b = 0; b < n.beam_boresights_deg.size(); ++b) {
            rc.beams.push_back(Beam{b, n.beam_boresights_deg[b], scenario_.antenna.hpbw_az_deg});
        }
        rc.tx_power_w = n.tx_power_w;
        rc.rx_threshold_dbm = n.rx_threshold_dbm;
        radios.push_back(std::move(rc));
        ids_.push_back(n.id);
        dir_.node_of[n.address] = n.id;
        dir_.address_of[n.id] = n.address;
    }
    std::sort(ids_.begin(), ids_.end());
    dir_.routes = &scenario_.routes;

    double boresight = 0.0;
    GainTable table = scenario_gain_table(scenario_, &boresight);
    ChannelParams cp;
    cp.freq_hz = scenario_.freq_hz;
    cp.data_rate_bps = scenario_.mac.data_rate_bps;
    cp.batch_epsilon = scenario_.batch_epsilon;
    cp.audit = opts_.audit;
    channel_ = std::make_unique<Channel>(kernel_, cp, std::move(radios), BeamPattern{std::move(table), boresight}, tr);

    for (const auto& n : scenario_.nodes) {
        MacConfig mc;
        mc.address = n.address;
        mc.bottleneck = n.bottleneck;
        mc.bottleneck_capacity = n.bottleneck_capacity;
        mc.buffer_bytes = n.buffer_bytes;
        mc.params = scenario_.mac;
        mc.duplicate_memory = scenario_.duplicate_memory;
        mc.max_range_m = scenario_.max_range_m;
        mc.role_switch = scenario_.role_switch;
        mc.shared_buffer = scenario_.shared_buffer;
        auto mac = std::make_unique<Mac>(kernel_, *channel_, n.id, mc, dir_, tr);
        Sink& sink = sinks_[n.id];
        mac->set_sink([this, &sink](const Frame& f) { sink.accept(f, kernel_.now()); });
        macs_.emplace(n.id, std::move(mac));
    }
    for (const auto& sc : scenario_.sources) {
        Mac* mac = macs_.at(sc.node).get();
        const std::uint8_t q = sc.queue_index;
        sources_.push_back(std::make_unique<TrafficSource>(
            kernel_, sc, dir_.address_of.at(sc.node), dir_.address_of.at(sc.dest), tree_ids_,
            [mac, q](Frame f) { mac->on_higher_layer_packet(std::move(f), q); }));
    }
    recorder_ = std::make_unique<StatsRecorder>(kernel_, scenario_.stat_sample_interval, scenario_.warmup,
                                                [this] { return rows(); });
}

Simulation::~Simulation() = default;

void Simulation::run_until(SimTime t) {
    if (!started_) {
        started_ = true;
        for (auto& s : sources_) s->start();
        recorder_->start(scenario_.duration);
    }
    kernel_.run_until(t);
}

void Simulation::run() { run_until(scenario_.duration); }

Mac& Simulation::mac(NodeId id) { return *macs_.at(id); }
const Mac& Simulation::mac(NodeId id) const { return *macs_.at(id); }
Sink& Simulation::sink(NodeId id) { return sinks_.at(id); }

std::vector<TrafficSource*> Simulation::sources() {
    std::vector<TrafficSource*> out;
    for (auto& s : sources_) out.push_back(s.get());
    return out;
}

std::vector<NodeRow> Simulation::rows() const {
    std::vector<NodeRow> out;
    for (NodeId id : ids_) {
        const Mac& m = *macs_.at(id);
        const Sink& s = sinks_.at(id);
        NodeRow r;
        r.node = id;
        r.address = m.address();
        r.queued = m.queued_packets();
        r.held = m.held_packets();
        r.counters = m.counters();
        r.sink_delivered = s.delivered();
        r.sink_duplicates = s.duplicates();
        r.sink_latency_mean_us = s.latency().mean_us();
        r.data_received_from = m.data_received_from();
        out.push_back(std::move(r));
    }
    return out;
}

StatsReport Simulation::report() const {
    return build_report(scenario_.name, scenario_.seed, scenario_.duration, *recorder_, rows());
}

std::vector<std::string> Simulation::conservation_violations() const {
    std::vector<std::string> out;
    for (NodeId id : ids_) {
        const Mac& m = *macs_.at(id);
        const auto& c = m.counters();
        const std::uint64_t in = c.generated + c.received_for_forwarding;
        const std::uint64_t accounted =
            c.mac_sent_data + c.dropped_overflow + c.dropped_retry + c.dropped_no_route + m.held_packets();
        if (in != accounted) {
            std::ostringstream os;
            os << "node " << id << ": in=" << in << " accounted=" << accounted;
            out.push_back(os.str());
        }
    }
    return out;
}

std::vector<std::string> Simulation::half_duplex_violations() const {
    std::vector<std::string> out;
    for (NodeId id : ids_) {
        const auto& tx = channel_->tx_intervals(id);
        const auto& rx = channel_->delivered_intervals(id);
        for (const auto& r : rx) {
            for (const auto& t : tx) {
                if (t.begin < r.end && r.begin < t.end) {
                    std::ostringstream os;
                    os << "node " << id << ": tx [" << t.begin.count() << "," << t.end.count() << ") overlaps rx ["
                       << r.begin.count() << "," << r.end.count() << ")";
                    out.push_back(os.str());
                }
            }
        }
    }
    return out;
}

}  // namespace mbsim
