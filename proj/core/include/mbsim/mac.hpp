#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "mbsim/frame.hpp"
#include "mbsim/kernel.hpp"
#include "mbsim/phy.hpp"
#include "mbsim/trace.hpp"
#include "mbsim/traffic.hpp"

namespace mbsim {

inline constexpr std::size_t kQueueCount = 4;

enum class MacState : std::uint8_t { Idle, Defer, Backoff, Transmit, WaitForResponse, Respond, AwaitData };

const char* to_string(MacState s);

struct HnavEntry {
    std::optional<Address> neighbor_addr;
    SimTime nav_expiry;
    bool is_valid_rts_received = false;
    bool is_invalid_cts_received = false;
    bool to_send = false;
};

struct MacConfig {
    Address address = 0;
    bool bottleneck = false;
    std::size_t bottleneck_capacity = 1;
    std::uint32_t buffer_bytes = 32 * 1024;
    bool shared_buffer = false;  ///< otherwise each queue owns buffer_bytes / 4
    MacParams params;
    std::size_t duplicate_memory = 1;
    double max_range_m = 3000.0;
    bool role_switch = true;
};

struct MacCounters {
    std::uint64_t generated = 0;
    std::uint64_t received_for_forwarding = 0;
    std::uint64_t mac_sent_data = 0;
    std::uint64_t data_tx = 0;
    std::uint64_t dropped_overflow = 0;
    std::uint64_t dropped_retry = 0;
    std::uint64_t dropped_no_route = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t rts_sent = 0;
    std::uint64_t cts_sent = 0;
    std::uint64_t ack_sent = 0;
    std::uint64_t sch_sent = 0;
    std::uint64_t control_received = 0;
    std::uint64_t duplicates_discarded = 0;
    std::uint64_t sink_delivered = 0;
    std::uint64_t collisions = 0;
    std::uint64_t timeouts = 0;
    std::uint64_t cycles = 0;

    friend bool operator==(const MacCounters&, const MacCounters&) = default;
};

/// Maps addresses to nodes and resolves next hops.
struct Directory {
    std::map<Address, NodeId> node_of;
    std::map<NodeId, Address> address_of;
    const RouteTable* routes = nullptr;
};

/// Multi-beam CSMA/CA MAC of one node.
class Mac : public PhyListener {
public:
    using SinkFn = std::function<void(const Frame&)>;

    Mac(Kernel& kernel, Channel& channel, NodeId node, MacConfig cfg, const Directory& dir, Trace* trace = nullptr);

    Mac(const Mac&) = delete;
    Mac& operator=(const Mac&) = delete;

    void set_sink(SinkFn fn) { sink_ = std::move(fn); }

    /// Locally generated packet. Returns false on overflow or missing route.
    bool on_higher_layer_packet(Frame f, std::uint8_t queue_index);

    // PhyListener
    void on_carrier_busy(std::size_t beam, double power_dbm) override;
    void on_carrier_idle(std::size_t beam) override;
    void on_batch(std::span<const Reception> batch) override;
    void on_tx_end() override;

    /// Next backoff in slots; consumes the pending outcome.
    std::int64_t compute_backoff_slots();
    /// Records the outcome of a response-collection phase.
    void node_based_cw_reset(bool any_beam_succeeded);
    bool medium_is_idle(std::span<const std::size_t> beams) const;
    /// Retry accounting for a beam whose last non-SCH frame got no response.
    /// With `to_head` the frame returns to the head of its queue, otherwise it
    /// stays staged for replay. Returns true if the frame was dropped.
    bool requeue_unsuccessful_beam(std::size_t beam, bool to_head = true);

    NodeId node() const { return node_; }
    Address address() const { return cfg_.address; }
    const MacConfig& config() const { return cfg_; }
    MacState state() const { return state_; }
    const HnavEntry& hnav(std::size_t beam) const { return beams_.at(beam).hnav; }
    SimTime own_nav(std::size_t beam) const { return beams_.at(beam).own_nav; }
    bool receiver_busy(std::size_t beam) const { return beams_.at(beam).receiver_busy; }
    std::uint32_t max_backoff() const { return max_backoff_; }
    bool collision() const { return collision_; }
    bool can_send_more_packets() const { return can_send_more_; }
    std::size_t total_desired_frame() const { return total_desired_; }
    std::size_t no_of_frame() const { return no_of_frame_; }
    const std::set<std::size_t>& expected_beams() const { return expected_; }
    const std::set<std::size_t>& replay_beams() const { return replay_; }
    bool timeout_pending() const { return kernel_.is_pending(timeout_); }
    const std::deque<Frame>& queue(std::size_t q) const { return queues_.at(q - 1); }
    const std::optional<Frame>& frag_staging(std::size_t beam) const { return beams_.at(beam).frag_staging; }
    const std::optional<Frame>& tx_copy(std::size_t beam) const { return beams_.at(beam).tx_copy; }
    const std::vector<std::int64_t>& backoff_history() const { return backoff_history_; }
    std::size_t beam_count() const { return beams_.size(); }

    std::size_t queued_packets() const;
    std::size_t held_packets() const;
    std::uint32_t buffer_occupancy_bytes() const;
    /// Bytes held for queue `q` (1..4), including staged and in-flight copies.
    std::uint32_t queue_occupancy_bytes(std::size_t q) const;
    const MacCounters& counters() const { return counters_; }
    /// Accepted data frames per previous-hop address.
    const std::map<Address, std::uint64_t>& data_received_from() const { return rx_from_; }

    /// Queue index for a data frame arriving on `antenna_index`.
    static std::uint8_t queue_for_antenna(std::size_t antenna_index, std::size_t queue_count = kQueueCount);

private:
    enum class Phase : std::uint8_t { None, Rts, Data };

    struct BeamState {
        HnavEntry hnav;
        SimTime own_nav;
        bool receiver_busy = false;
        std::optional<Frame> frag_staging;
        std::optional<Frame> tx_copy;
        std::optional<FrameKind> last_tx;
        bool last_tx_set_nav = false;
        std::optional<Address> peer;  ///< addressee of the last non-SCH frame
    };

    struct Candidate {
        std::size_t queue;
        std::size_t beam;
    };

    SimTime us(std::int64_t v) const { return SimTime::us(v); }
    SimTime slot() const { return us(cfg_.params.slot_us); }
    SimTime effective_nav(std::size_t beam) const;
    bool nav_free(std::size_t beam) const;
    bool any_receiver_busy() const;
    bool has_pending_data() const;
    std::vector<Candidate> candidates() const;
    std::optional<std::size_t> beam_for_next_hop(const Frame& f, Address* next_addr) const;
    bool admit(Frame f, std::uint8_t queue_index, bool forwarded);

    void set_state(MacState s);
    void reevaluate();
    void freeze();
    void start_defer();
    void on_defer_done();
    void on_backoff_done();
    void cancel_timer(EventHandle& h);

    void initiate_cpt();
    SimTime send(std::vector<BeamFrame>& frames);
    void on_timeout();
    void on_response_batch(std::span<const Reception> batch);
    void send_data(std::vector<std::size_t> beams);
    void finish_cycle(bool success);

    void respond_to_rts(std::span<const Reception> batch);
    void on_await_timeout();
    void on_data_batch(std::span<const Reception> batch);
    void on_data_arrival(const Frame& f, std::size_t beam);

    void update_hnav(const Reception& r);
    void set_nav(std::size_t beam, SimTime expiry, Address from);
    SimTime response_timeout(FrameKind response) const;

    void trace(TraceKind kind, int beam = -1, const Frame* f = nullptr, std::int64_t value = 0,
               std::string detail = {});

    Kernel& kernel_;
    Channel& channel_;
    NodeId node_;
    MacConfig cfg_;
    const Directory& dir_;
    Trace* trace_;
    SinkFn sink_;

    MacState state_ = MacState::Idle;
    std::vector<BeamState> beams_;
    std::array<std::deque<Frame>, kQueueCount> queues_;

    std::uint32_t max_backoff_;
    enum class Outcome : std::uint8_t { None, Success, Failure } outcome_ = Outcome::None;
    std::optional<std::int64_t> backoff_remaining_;
    std::vector<std::int64_t> backoff_history_;
    SimTime backoff_started_;
    SimTime yield_;
    bool collision_ = false;
    bool update_collision_ = false;

    Phase phase_ = Phase::None;
    std::set<std::size_t> expected_;
    std::set<std::size_t> replay_;
    std::set<std::size_t> cycle_beams_;
    std::size_t total_desired_ = 0;
    std::size_t no_of_frame_ = 0;
    bool can_send_more_ = true;
    MacState after_tx_ = MacState::Idle;

    std::set<std::size_t> awaited_;

    EventHandle defer_timer_;
    EventHandle backoff_timer_;
    EventHandle nav_wake_;
    EventHandle timeout_;
    EventHandle guard_;
    EventHandle sifs_timer_;
    EventHandle await_timer_;

    std::deque<std::uint64_t> recent_trees_;
    MacCounters counters_;
    std::map<Address, std::uint64_t> rx_from_;
};

}  // namespace mbsim
