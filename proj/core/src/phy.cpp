#include "mbsim/phy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbsim {

const char* to_string(ReceptionStatus s) {
    switch (s) {
        case ReceptionStatus::Valid: return "valid";
        case ReceptionStatus::Noise: return "noise";
        case ReceptionStatus::Ignored: return "ignored";
    }
    return "?";
}

void resolve_port_contention(std::span<Reception> active) {
    if (active.empty()) {
        return;
    }
    auto stronger = [](const Reception& a, const Reception& b) {
        if (a.power_dbm != b.power_dbm) return a.power_dbm > b.power_dbm;
        if (a.start != b.start) return a.start < b.start;
        return a.id < b.id;
    };
    std::size_t winner = 0;
    for (std::size_t i = 1; i < active.size(); ++i) {
        if (stronger(active[i], active[winner])) winner = i;
    }
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (i != winner) active[i].status = ReceptionStatus::Ignored;
    }
}

Channel::Channel(Kernel& kernel, ChannelParams params, std::vector<RadioConfig> radios, BeamPattern pattern,
                 Trace* trace)
    : kernel_(kernel), params_(params), pattern_(std::move(pattern)), trace_(trace) {
    for (auto& cfg : radios) {
        NodeRadio r;
        for (std::size_t b = 0; b < cfg.beams.size(); ++b) {
            r.ports.push_back(PortState{cfg.node, b, SimTime{}, {}});
        }
        const NodeId id = cfg.node;
        r.cfg = std::move(cfg);
        if (!nodes_.emplace(id, std::move(r)).second) {
            throw InvalidParameter("duplicate radio for node " + std::to_string(id));
        }
    }
    for (auto& [tx_id, tx] : nodes_) {
        tx.links.resize(tx.cfg.beams.size());
        for (std::size_t tb = 0; tb < tx.cfg.beams.size(); ++tb) {
            for (auto& [rx_id, rx] : nodes_) {
                if (rx_id == tx_id) continue;
                const auto dir = direction_between(tx.cfg.position, rx.cfg.position);
                const SimTime delay = SimTime::ns(std::llround(dir.range_m / kSpeedOfLight * 1e9));
                for (std::size_t rb = 0; rb < rx.cfg.beams.size(); ++rb) {
                    const double p = compute_rx_power(tx_id, tb, rx_id, rb);
                    if (p >= rx.cfg.rx_threshold_dbm) {
                        tx.links[tb].push_back(Link{rx_id, rb, p, delay});
                    }
                }
            }
        }
    }
}

Channel::NodeRadio& Channel::at(NodeId node) {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) throw InvalidParameter("unknown node " + std::to_string(node));
    return it->second;
}

const Channel::NodeRadio& Channel::at(NodeId node) const {
    auto it = nodes_.find(node);
    if (it == nodes_.end()) throw InvalidParameter("unknown node " + std::to_string(node));
    return it->second;
}

void Channel::attach(NodeId node, PhyListener* listener) { at(node).listener = listener; }

double Channel::beam_gain_db(const NodeRadio& r, std::size_t beam, Position toward) const {
    const auto dir = direction_between(r.cfg.position, toward);
    return pattern_.gain_db(r.cfg.beams.at(beam).boresight_azimuth_deg, dir.azimuth_deg);
}

double Channel::compute_rx_power(NodeId tx, std::size_t tx_beam, NodeId rx, std::size_t rx_beam) const {
    const auto& t = at(tx);
    const auto& r = at(rx);
    const double gt = beam_gain_db(t, tx_beam, r.cfg.position);
    const double gr = beam_gain_db(r, rx_beam, t.cfg.position);
    const double range = direction_between(t.cfg.position, r.cfg.position).range_m;
    return friis_received_power_dbm(t.cfg.tx_power_w, gt, gr, params_.freq_hz, range);
}

SimTime Channel::propagation_delay(NodeId a, NodeId b) const {
    const double range = direction_between(at(a).cfg.position, at(b).cfg.position).range_m;
    return SimTime::ns(std::llround(range / kSpeedOfLight * 1e9));
}

std::optional<std::size_t> Channel::beam_toward(NodeId from, NodeId to) const {
    const auto& f = at(from);
    const auto dir = direction_between(f.cfg.position, at(to).cfg.position);
    return beam_for_arrival(f.cfg.beams, dir.azimuth_deg);
}

bool Channel::is_transmitting(NodeId node) const { return kernel_.now() < at(node).tx_until; }

bool Channel::port_busy(NodeId node, std::size_t beam) const { return !at(node).ports.at(beam).active.empty(); }

bool Channel::port_has_valid(NodeId node, std::size_t beam) const {
    const auto& act = at(node).ports.at(beam).active;
    return std::any_of(act.begin(), act.end(), [](const Reception& r) { return r.status == ReceptionStatus::Valid; });
}

const PortState& Channel::port(NodeId node, std::size_t beam) const { return at(node).ports.at(beam); }
std::size_t Channel::beam_count(NodeId node) const { return at(node).cfg.beams.size(); }
const RadioConfig& Channel::radio(NodeId node) const { return at(node).cfg; }
const std::vector<Interval>& Channel::tx_intervals(NodeId node) const { return at(node).tx_log; }
const std::vector<Interval>& Channel::delivered_intervals(NodeId node) const { return at(node).rx_log; }
const std::vector<Channel::Link>& Channel::links(NodeId tx, std::size_t tx_beam) const {
    return at(tx).links.at(tx_beam);
}

SimTime Channel::begin_transmission(NodeId node, std::span<const BeamFrame> frames) {
    auto& r = at(node);
    const SimTime now = kernel_.now();
    if (frames.empty()) {
        return now;
    }
    if (r.tx_until > now) {
        throw HalfDuplexViolation("node " + std::to_string(node) + " is already transmitting");
    }
    for (const auto& bf : frames) {
        if (bf.beam >= r.ports.size()) {
            throw InvalidParameter("node " + std::to_string(node) + " has no beam " + std::to_string(bf.beam));
        }
        if (port_has_valid(node, bf.beam)) {
            throw HalfDuplexViolation("node " + std::to_string(node) + " transmits on beam " +
                                      std::to_string(bf.beam) + " during a valid reception");
        }
    }
    // Half-duplex: everything still arriving on other beams is lost.
    for (auto& port : r.ports) {
        for (auto& rec : port.active) {
            rec.status = ReceptionStatus::Ignored;
            ++aborted_;
            emit(node, TraceKind::RxStatus, static_cast<int>(port.beam), &rec, 0, "aborted-by-tx");
        }
        port.active.clear();
    }

    SimTime longest;
    for (const auto& bf : frames) {
        const SimTime dur = tx_duration(bf.frame, params_.data_rate_bps);
        longest = std::max(longest, dur);
        for (const auto& link : r.links[bf.beam]) {
            Reception rec;
            rec.id = next_reception_id_++;
            rec.frame = bf.frame;
            rec.tx_node = node;
            rec.tx_beam = bf.beam;
            rec.rx_node = link.rx_node;
            rec.port = link.rx_beam;
            rec.power_dbm = link.power_dbm;
            rec.start = now + link.delay;
            rec.end = rec.start + dur;
            rec.frame.antenna_index = static_cast<std::uint8_t>(link.rx_beam);
            const EventTarget target{link.rx_node, static_cast<std::uint32_t>(link.rx_beam)};
            const NodeId rx_node = link.rx_node;
            const std::size_t rx_port = link.rx_beam;
            const std::uint64_t id = rec.id;
            const SimTime end = rec.end;
            kernel_.schedule(rec.start, EventKind::RxBegin, target,
                             [this, rec = std::move(rec)]() mutable { on_rx_begin(std::move(rec)); });
            kernel_.schedule(end, EventKind::RxEnd, target,
                             [this, rx_node, rx_port, id] { on_rx_end(rx_node, rx_port, id); });
        }
    }
    const SimTime end = now + longest;
    r.tx_until = end;
    if (params_.audit) {
        r.tx_log.push_back(Interval{now, end});
    }
    kernel_.schedule(end, EventKind::TxEnd, EventTarget{node, std::nullopt}, [this, node] {
        auto& radio = at(node);
        if (radio.listener != nullptr) radio.listener->on_tx_end();
    });
    return end;
}

void Channel::on_rx_begin(Reception rec) {
    auto& r = at(rec.rx_node);
    const std::size_t port_id = rec.port;
    if (is_transmitting(rec.rx_node)) {
        rec.status = ReceptionStatus::Ignored;
        ++ignored_;
        emit(rec.rx_node, TraceKind::RxStatus, static_cast<int>(port_id), &rec, 0, "ignored-while-tx");
        return;
    }
    auto& port = r.ports[port_id];
    emit(rec.rx_node, TraceKind::RxBegin, static_cast<int>(port_id), &rec, std::llround(rec.power_dbm * 1000));
    port.active.push_back(std::move(rec));
    port.busy_until = std::max(port.busy_until, port.active.back().end);
    std::vector<ReceptionStatus> before;
    for (const auto& a : port.active) before.push_back(a.status);
    resolve_port_contention(port.active);
    for (std::size_t i = 0; i < port.active.size(); ++i) {
        if (i + 1 < port.active.size() && before[i] != port.active[i].status) {
            emit(port.node, TraceKind::RxStatus, static_cast<int>(port_id), &port.active[i], 0,
                 to_string(port.active[i].status));
        }
    }
    if (port.active.back().status != ReceptionStatus::Valid) {
        emit(port.node, TraceKind::RxStatus, static_cast<int>(port_id), &port.active.back(), 0,
             to_string(port.active.back().status));
    }
    if (r.listener != nullptr) {
        r.listener->on_carrier_busy(port_id, port.active.back().power_dbm);
    }
}

void Channel::on_rx_end(NodeId node, std::size_t port_id, std::uint64_t id) {
    auto& r = at(node);
    auto& port = r.ports[port_id];
    auto it = std::find_if(port.active.begin(), port.active.end(), [id](const Reception& x) { return x.id == id; });
    if (it == port.active.end()) {
        return;  // aborted by our own transmission
    }
    Reception rec = std::move(*it);
    port.active.erase(it);
    emit(node, TraceKind::RxEnd, static_cast<int>(port_id), &rec, 0, to_string(rec.status));
    if (rec.status == ReceptionStatus::Valid) {
        r.pending_batch.push_back(std::move(rec));
    } else {
        ++ignored_;
    }
    if (port.active.empty()) {
        r.pending_idle.push_back(port_id);
    }
    if (!kernel_.is_pending(r.delivery)) {
        r.delivery = kernel_.schedule(kernel_.now() + params_.batch_epsilon, EventKind::Delivery,
                                      EventTarget{node, std::nullopt}, [this, node] { deliver(node); });
    }
}

void Channel::deliver(NodeId node) {
    auto& r = at(node);
    std::vector<Reception> batch = std::move(r.pending_batch);
    std::vector<std::size_t> idle = std::move(r.pending_idle);
    r.pending_batch.clear();
    r.pending_idle.clear();
    std::stable_sort(batch.begin(), batch.end(),
                     [](const Reception& a, const Reception& b) { return a.port < b.port; });
    if (params_.audit) {
        for (const auto& rec : batch) r.rx_log.push_back(Interval{rec.start, rec.end});
    }
    delivered_ += batch.size();
    if (r.listener != nullptr && !batch.empty()) {
        r.listener->on_batch(batch);
    }
    std::sort(idle.begin(), idle.end());
    idle.erase(std::unique(idle.begin(), idle.end()), idle.end());
    for (std::size_t p : idle) {
        if (r.ports[p].active.empty() && r.listener != nullptr) {
            r.listener->on_carrier_idle(p);
        }
    }
}

void Channel::emit(NodeId node, TraceKind kind, int beam, const Reception* rec, std::int64_t value,
                   std::string detail) {
    if (trace_ == nullptr || !trace_->enabled()) return;
    TraceRecord t;
    t.at = kernel_.now();
    t.node = node;
    t.kind = kind;
    t.beam = beam;
    if (rec != nullptr) {
        t.has_frame = true;
        t.frame_kind = rec->frame.kind;
        t.peer = rec->frame.tx_addr;
    }
    t.value = value;
    t.detail = std::move(detail);
    trace_->emit(std::move(t));
}

}  // namespace mbsim
