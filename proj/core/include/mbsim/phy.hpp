#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mbsim/antenna.hpp"
#include "mbsim/frame.hpp"
#include "mbsim/kernel.hpp"
#include "mbsim/trace.hpp"

namespace mbsim {

enum class ReceptionStatus : std::uint8_t { Valid, Noise, Ignored };

const char* to_string(ReceptionStatus s);

struct Reception {
    std::uint64_t id = 0;
    Frame frame;
    NodeId tx_node = 0;
    std::size_t tx_beam = 0;
    NodeId rx_node = 0;
    std::size_t port = 0;
    double power_dbm = 0.0;
    SimTime start;
    SimTime end;
    ReceptionStatus status = ReceptionStatus::Valid;
};

/// Max-power capture among receptions overlapping on one port: the strongest
/// keeps (or acquires) Valid, every other one becomes Ignored. A reception
/// already Ignored is never revived. Ties go to the earlier start, then to the
/// lower reception id.
void resolve_port_contention(std::span<Reception> active);

struct PortState {
    NodeId node = 0;
    std::size_t beam = 0;
    SimTime busy_until;
    std::vector<Reception> active;
};

/// Shared single-lobe pattern, rotated onto each beam's boresight.
struct BeamPattern {
    GainTable table;
    double table_boresight_deg;

    double gain_db(double beam_boresight_deg, double azimuth_deg) const {
        return table.lookup(90.0, azimuth_deg - beam_boresight_deg + table_boresight_deg);
    }
};

struct RadioConfig {
    NodeId node = 0;
    Position position;
    std::vector<Beam> beams;
    double tx_power_w = 2.3e-5;
    double rx_threshold_dbm = -76.0;
};

struct BeamFrame {
    std::size_t beam;
    Frame frame;
};

class PhyListener {
public:
    virtual ~PhyListener() = default;
    /// Every above-threshold reception start on `beam`.
    virtual void on_carrier_busy(std::size_t beam, double power_dbm) = 0;
    /// The last reception on `beam` ended.
    virtual void on_carrier_idle(std::size_t beam) = 0;
    /// Valid receptions ending at the same instant, sorted by port.
    virtual void on_batch(std::span<const Reception> batch) = 0;
    virtual void on_tx_end() = 0;
};

class HalfDuplexViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct ChannelParams {
    double freq_hz = 2.437e9;
    std::uint64_t data_rate_bps = 1000000;
    SimTime batch_epsilon = SimTime::ns(0);
    bool audit = false;  ///< keep tx/delivery intervals for half-duplex checks
};

struct Interval {
    SimTime begin;
    SimTime end;
};

/// Directional free-space medium plus per-port receive pipeline.
class Channel {
public:
    Channel(Kernel& kernel, ChannelParams params, std::vector<RadioConfig> radios, BeamPattern pattern,
            Trace* trace = nullptr);

    void attach(NodeId node, PhyListener* listener);

    /// Starts one frame per beam at the current instant; returns the time the
    /// longest of them ends.
    SimTime begin_transmission(NodeId node, std::span<const BeamFrame> frames);

    double compute_rx_power(NodeId tx, std::size_t tx_beam, NodeId rx, std::size_t rx_beam) const;
    SimTime propagation_delay(NodeId a, NodeId b) const;
    std::optional<std::size_t> beam_toward(NodeId from, NodeId to) const;

    bool is_transmitting(NodeId node) const;
    bool port_busy(NodeId node, std::size_t beam) const;
    bool port_has_valid(NodeId node, std::size_t beam) const;
    const PortState& port(NodeId node, std::size_t beam) const;
    std::size_t beam_count(NodeId node) const;
    const RadioConfig& radio(NodeId node) const;

    const std::vector<Interval>& tx_intervals(NodeId node) const;
    const std::vector<Interval>& delivered_intervals(NodeId node) const;

    std::uint64_t delivered_count() const { return delivered_; }
    std::uint64_t ignored_count() const { return ignored_; }
    std::uint64_t aborted_count() const { return aborted_; }

    struct Link {
        NodeId rx_node;
        std::size_t rx_beam;
        double power_dbm;
        SimTime delay;
    };
    const std::vector<Link>& links(NodeId tx, std::size_t tx_beam) const;

private:
    struct NodeRadio {
        RadioConfig cfg;
        std::vector<PortState> ports;
        std::vector<std::vector<Link>> links;  // per tx beam
        PhyListener* listener = nullptr;
        SimTime tx_until;
        std::vector<Reception> pending_batch;
        std::vector<std::size_t> pending_idle;
        EventHandle delivery;
        std::vector<Interval> tx_log;
        std::vector<Interval> rx_log;
    };

    NodeRadio& at(NodeId node);
    const NodeRadio& at(NodeId node) const;
    double beam_gain_db(const NodeRadio& r, std::size_t beam, Position toward) const;

    void on_rx_begin(Reception rec);
    void on_rx_end(NodeId node, std::size_t port, std::uint64_t id);
    void deliver(NodeId node);
    void emit(NodeId node, TraceKind kind, int beam, const Reception* rec, std::int64_t value,
              std::string detail = {});

    Kernel& kernel_;
    ChannelParams params_;
    BeamPattern pattern_;
    Trace* trace_;
    std::map<NodeId, NodeRadio> nodes_;
    std::uint64_t next_reception_id_ = 1;
    std::uint64_t delivered_ = 0;
    std::uint64_t ignored_ = 0;
    std::uint64_t aborted_ = 0;
};

}  // namespace mbsim
