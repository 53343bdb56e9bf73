#include "mbsim/mac.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mbsim {

const char* to_string(MacState s) {
    switch (s) {
        case MacState::Idle: return "IDLE";
        case MacState::Defer: return "DEFER";
        case MacState::Backoff: return "BACKOFF";
        case MacState::Transmit: return "TRANSMIT";
        case MacState::WaitForResponse: return "WAIT_FOR_RESPONSE";
        case MacState::Respond: return "RESPOND";
        case MacState::AwaitData: return "AWAIT_DATA";
    }
    return "?";
}

Mac::Mac(Kernel& kernel, Channel& channel, NodeId node, MacConfig cfg, const Directory& dir, Trace* trace)
    : kernel_(kernel),
      channel_(channel),
      node_(node),
      cfg_(cfg),
      dir_(dir),
      trace_(trace),
      beams_(channel.beam_count(node)),
      max_backoff_(cfg.params.cw_min) {
    if (cfg_.bottleneck_capacity == 0) {
        throw std::invalid_argument("bottleneck capacity must be positive");
    }
    channel_.attach(node_, this);
}

std::uint8_t Mac::queue_for_antenna(std::size_t antenna_index, std::size_t queue_count) {
    return static_cast<std::uint8_t>(antenna_index % queue_count + 1);
}

std::size_t Mac::queued_packets() const {
    std::size_t n = 0;
    for (const auto& q : queues_) n += q.size();
    return n;
}

std::size_t Mac::held_packets() const {
    std::size_t n = queued_packets();
    for (const auto& b : beams_) {
        n += b.frag_staging.has_value() + b.tx_copy.has_value();
    }
    return n;
}

std::uint32_t Mac::buffer_occupancy_bytes() const {
    std::uint32_t n = 0;
    for (const auto& q : queues_) {
        for (const auto& f : q) n += f.size_bytes;
    }
    for (const auto& b : beams_) {
        if (b.frag_staging) n += b.frag_staging->size_bytes;
        if (b.tx_copy) n += b.tx_copy->size_bytes;
    }
    return n;
}

std::uint32_t Mac::queue_occupancy_bytes(std::size_t q) const {
    std::uint32_t n = 0;
    for (const auto& f : queues_.at(q - 1)) n += f.size_bytes;
    for (const auto& b : beams_) {
        if (b.frag_staging && b.frag_staging->queue_index == q) n += b.frag_staging->size_bytes;
        if (b.tx_copy && b.tx_copy->queue_index == q) n += b.tx_copy->size_bytes;
    }
    return n;
}

SimTime Mac::effective_nav(std::size_t beam) const {
    return std::max(beams_[beam].hnav.nav_expiry, beams_[beam].own_nav);
}

bool Mac::nav_free(std::size_t beam) const { return effective_nav(beam) <= kernel_.now(); }

bool Mac::any_receiver_busy() const {
    return std::any_of(beams_.begin(), beams_.end(), [](const BeamState& b) { return b.receiver_busy; });
}

bool Mac::medium_is_idle(std::span<const std::size_t> beams) const {
    return std::all_of(beams.begin(), beams.end(),
                       [this](std::size_t b) { return !beams_.at(b).receiver_busy && nav_free(b); });
}

bool Mac::has_pending_data() const {
    if (queued_packets() > 0) return true;
    return std::any_of(beams_.begin(), beams_.end(), [](const BeamState& b) { return b.frag_staging.has_value(); });
}

std::optional<std::size_t> Mac::beam_for_next_hop(const Frame& f, Address* next_addr) const {
    auto dest = dir_.node_of.find(f.final_dest_addr);
    if (dest == dir_.node_of.end() || dir_.routes == nullptr || dest->second == node_) return std::nullopt;
    auto origin = dir_.node_of.find(f.origin_addr);
    auto next = dir_.routes->next_hop(node_, dest->second,
                                      origin == dir_.node_of.end() ? kAnyOrigin : origin->second);
    if (!next) return std::nullopt;
    auto addr = dir_.address_of.find(*next);
    if (addr == dir_.address_of.end()) return std::nullopt;
    if (next_addr != nullptr) *next_addr = addr->second;
    return channel_.beam_toward(node_, *next);
}

std::vector<Mac::Candidate> Mac::candidates() const {
    std::vector<Candidate> out;
    std::vector<bool> used(beams_.size(), false);
    const bool replay = std::any_of(beams_.begin(), beams_.end(),
                                    [](const BeamState& b) { return b.frag_staging.has_value(); });
    if (replay) {
        for (std::size_t b = 0; b < beams_.size(); ++b) {
            if (beams_[b].frag_staging) out.push_back({beams_[b].frag_staging->queue_index, b});
        }
        return out;
    }
    for (std::size_t q = 0; q < kQueueCount; ++q) {
        if (queues_[q].empty()) continue;
        const Frame& head = queues_[q].front();
        auto addr = dir_.node_of.find(head.rx_addr);
        if (addr == dir_.node_of.end()) continue;
        auto beam = channel_.beam_toward(node_, addr->second);
        if (!beam || used[*beam]) continue;
        used[*beam] = true;
        out.push_back({q + 1, *beam});
    }
    return out;
}

bool Mac::admit(Frame f, std::uint8_t queue_index, bool forwarded) {
    if (queue_index < 1 || queue_index > kQueueCount) {
        throw std::invalid_argument("queue index must be in 1..4");
    }
    if (forwarded) {
        ++counters_.received_for_forwarding;
    } else {
        ++counters_.generated;
    }
    Address next = kNoAddress;
    if (!beam_for_next_hop(f, &next)) {
        ++counters_.dropped_no_route;
        trace(TraceKind::Drop, -1, &f, 0, "no-route");
        return false;
    }
    const bool full = cfg_.shared_buffer
                          ? buffer_occupancy_bytes() + f.size_bytes > cfg_.buffer_bytes
                          : queue_occupancy_bytes(queue_index) + f.size_bytes > cfg_.buffer_bytes / kQueueCount;
    if (full) {
        ++counters_.dropped_overflow;
        trace(TraceKind::Drop, -1, &f, queue_index, "overflow");
        return false;
    }
    f.tx_addr = cfg_.address;
    f.rx_addr = next;
    f.queue_index = queue_index;
    f.short_retry_count = 0;
    f.long_retry_count = 0;
    queues_[queue_index - 1].push_back(f);
    trace(TraceKind::Enqueue, -1, &f, queue_index);
    reevaluate();
    return true;
}

bool Mac::on_higher_layer_packet(Frame f, std::uint8_t queue_index) { return admit(f, queue_index, false); }

void Mac::set_state(MacState s) {
    if (s == state_) return;
    state_ = s;
    trace(TraceKind::State, -1, nullptr, static_cast<std::int64_t>(s), to_string(s));
}

void Mac::cancel_timer(EventHandle& h) {
    kernel_.cancel(h);
    h = EventHandle{};
}

std::int64_t Mac::compute_backoff_slots() {
    if (outcome_ == Outcome::Failure) {
        max_backoff_ = std::min(2 * max_backoff_ + 1, cfg_.params.cw_max);
    } else {
        max_backoff_ = cfg_.params.cw_min;
    }
    outcome_ = Outcome::None;
    const std::int64_t slots = static_cast<std::int64_t>(max_backoff_) + 1;
    backoff_history_.push_back(slots);
    return slots;
}

void Mac::node_based_cw_reset(bool any_beam_succeeded) {
    if (any_beam_succeeded) {
        max_backoff_ = cfg_.params.cw_min;
        outcome_ = Outcome::Success;
    } else {
        outcome_ = Outcome::Failure;
    }
}

void Mac::reevaluate() {
    if (state_ != MacState::Idle && state_ != MacState::Defer && state_ != MacState::Backoff) return;
    cancel_timer(nav_wake_);
    if (!has_pending_data()) {
        freeze();
        return;
    }
    if (any_receiver_busy() || channel_.is_transmitting(node_)) {
        freeze();
        return;
    }
    const auto cands = candidates();
    SimTime wake = SimTime::max();
    bool ready = false;
    for (const auto& c : cands) {
        if (nav_free(c.beam)) {
            ready = true;
            break;
        }
        wake = std::min(wake, effective_nav(c.beam));
    }
    if (!ready) {
        freeze();
        if (wake != SimTime::max()) {
            nav_wake_ = kernel_.schedule(wake, EventKind::MacTimer, EventTarget{node_, std::nullopt},
                                         [this] { reevaluate(); });
        }
        return;
    }
    if (state_ == MacState::Idle) start_defer();
}

void Mac::freeze() {
    if (state_ == MacState::Defer) {
        cancel_timer(defer_timer_);
        yield_ = SimTime{};
        set_state(MacState::Idle);
    } else if (state_ == MacState::Backoff) {
        cancel_timer(backoff_timer_);
        const std::int64_t elapsed = (kernel_.now() - backoff_started_) / slot();
        backoff_remaining_ = std::max<std::int64_t>(0, *backoff_remaining_ - elapsed);
        set_state(MacState::Idle);
    }
}

void Mac::start_defer() {
    if (!backoff_remaining_) backoff_remaining_ = compute_backoff_slots();
    SimTime ifs = collision_ ? us(cfg_.params.eifs_us()) : us(cfg_.params.difs_us);
    ifs += yield_;
    set_state(MacState::Defer);
    defer_timer_ = kernel_.schedule(kernel_.now() + ifs, EventKind::DeferExpired, EventTarget{node_, std::nullopt},
                                    [this] { on_defer_done(); });
}

void Mac::on_defer_done() {
    defer_timer_ = EventHandle{};
    collision_ = false;
    yield_ = SimTime{};
    set_state(MacState::Backoff);
    backoff_started_ = kernel_.now();
    backoff_timer_ = kernel_.schedule(kernel_.now() + slot() * *backoff_remaining_, EventKind::BackoffExpired,
                                      EventTarget{node_, std::nullopt}, [this] { on_backoff_done(); });
}

void Mac::on_backoff_done() {
    backoff_timer_ = EventHandle{};
    backoff_remaining_ = 0;
    initiate_cpt();
}

SimTime Mac::response_timeout(FrameKind response) const {
    const SimTime maxprop = SimTime::ns(static_cast<std::int64_t>(std::ceil(cfg_.max_range_m / kSpeedOfLight * 1e9)));
    return us(cfg_.params.sifs_us) + tx_duration(cfg_.params.sizes.of(response), cfg_.params.data_rate_bps) +
           maxprop * 2 + slot();
}

SimTime Mac::send(std::vector<BeamFrame>& frames) {
    const SimTime end = channel_.begin_transmission(node_, frames);
    for (auto& b : beams_) b.receiver_busy = false;
    for (const auto& bf : frames) {
        auto& bs = beams_[bf.beam];
        bs.last_tx = bf.frame.kind;
        trace(TraceKind::TxFrame, static_cast<int>(bf.beam), &bf.frame, bf.frame.duration_us);
    }
    set_state(MacState::Transmit);
    return end;
}

void Mac::initiate_cpt() {
    const auto& p = cfg_.params;
    const std::size_t capacity = cfg_.bottleneck ? cfg_.bottleneck_capacity : 1;
    std::vector<BeamFrame> out;
    std::set<std::size_t> rts_beams;
    for (auto& b : beams_) {
        b.last_tx.reset();
        b.last_tx_set_nav = false;
    }
    for (const auto& c : candidates()) {
        if (rts_beams.size() >= capacity) break;
        if (!nav_free(c.beam)) continue;
        auto& bs = beams_[c.beam];
        if (!bs.frag_staging) {
            bs.frag_staging = queues_[c.queue - 1].front();
            queues_[c.queue - 1].pop_front();
        }
        const Frame& data = *bs.frag_staging;
        bs.hnav.to_send = true;
        bs.peer = data.rx_addr;
        Frame rts = data;
        rts.kind = FrameKind::Rts;
        rts.tx_addr = cfg_.address;
        rts.size_bytes = p.sizes.rts_bytes;
        rts.duration_us = nav_duration_us(FrameKind::Rts, p);
        out.push_back({c.beam, rts});
        rts_beams.insert(c.beam);
        ++counters_.rts_sent;
        if (data.short_retry_count > 0 || data.long_retry_count > 0) ++counters_.retransmissions;
    }
    if (out.empty()) {
        backoff_remaining_.reset();
        set_state(MacState::Idle);
        reevaluate();
        return;
    }
    std::vector<std::size_t> sch;
    for (std::size_t b = 0; b < beams_.size(); ++b) {
        const auto& h = beams_[b].hnav;
        if (rts_beams.count(b) || !h.neighbor_addr) continue;
        if (!(h.is_valid_rts_received || h.is_invalid_cts_received)) continue;
        if (channel_.port_busy(node_, b) || !nav_free(b)) continue;
        Frame s = out.front().frame;
        s.kind = FrameKind::SchRts;
        s.rx_addr = *h.neighbor_addr;
        out.push_back({b, s});
        sch.push_back(b);
        ++counters_.sch_sent;
    }
    const SimTime end = send(out);
    for (std::size_t b : sch) {
        beams_[b].own_nav = end + us(nav_duration_us(FrameKind::SchRts, p));
        beams_[b].last_tx_set_nav = true;
        trace(TraceKind::NavSet, static_cast<int>(b), nullptr, beams_[b].own_nav.count(), "own");
    }
    cycle_beams_ = rts_beams;
    expected_ = rts_beams;
    replay_.clear();
    total_desired_ = rts_beams.size();
    no_of_frame_ = 0;
    phase_ = Phase::Rts;
    after_tx_ = MacState::WaitForResponse;
}

void Mac::on_tx_end() {
    switch (after_tx_) {
        case MacState::WaitForResponse: {
            set_state(MacState::WaitForResponse);
            const FrameKind resp = phase_ == Phase::Rts ? FrameKind::Cts : FrameKind::Ack;
            timeout_ = kernel_.schedule(kernel_.now() + response_timeout(resp), EventKind::FrameTimeout,
                                        EventTarget{node_, std::nullopt}, [this] { on_timeout(); });
            break;
        }
        case MacState::AwaitData: {
            set_state(MacState::AwaitData);
            const SimTime maxprop =
                SimTime::ns(static_cast<std::int64_t>(std::ceil(cfg_.max_range_m / kSpeedOfLight * 1e9)));
            await_timer_ = kernel_.schedule(kernel_.now() + us(cfg_.params.sifs_us) + maxprop * 2 + slot(),
                                            EventKind::MacTimer, EventTarget{node_, std::nullopt},
                                            [this] { on_await_timeout(); });
            break;
        }
        default:
            set_state(MacState::Idle);
            reevaluate();
            break;
    }
}

bool Mac::requeue_unsuccessful_beam(std::size_t beam, bool to_head) {
    auto& bs = beams_.at(beam);
    const SimTime now = kernel_.now();
    if (bs.last_tx_set_nav && bs.own_nav > now) {
        bs.own_nav = now;
        trace(TraceKind::NavSet, static_cast<int>(beam), nullptr, now.count(), "own-reset");
    }
    if (!bs.last_tx || is_sch(*bs.last_tx)) return false;
    const bool data_phase = *bs.last_tx == FrameKind::Data;
    std::optional<Frame> held = data_phase ? bs.tx_copy : bs.frag_staging;
    bs.tx_copy.reset();
    bs.frag_staging.reset();
    bs.hnav.to_send = false;
    if (!held) return false;
    Frame f = *held;
    std::uint32_t count;
    std::uint32_t limit;
    if (data_phase) {
        count = ++f.long_retry_count;
        limit = cfg_.params.long_retry_limit;
    } else {
        count = ++f.short_retry_count;
        limit = cfg_.params.short_retry_limit;
    }
    if (count >= limit) {
        ++counters_.dropped_retry;
        trace(TraceKind::Drop, static_cast<int>(beam), &f, count, data_phase ? "long-retry" : "short-retry");
        return true;
    }
    if (to_head) {
        queues_[f.queue_index - 1].push_front(f);
    } else {
        bs.frag_staging = f;
        bs.hnav.to_send = true;
        replay_.insert(beam);
    }
    return false;
}

void Mac::on_timeout() {
    timeout_ = EventHandle{};
    cancel_timer(guard_);
    ++counters_.timeouts;
    trace(TraceKind::TimeoutFire, -1, nullptr, static_cast<std::int64_t>(expected_.size()));
    const std::size_t capacity = cfg_.bottleneck ? cfg_.bottleneck_capacity : 1;
    bool drop_predicted = false;
    for (std::size_t b : expected_) {
        const auto& bs = beams_[b];
        if (!bs.last_tx) continue;
        const bool data_phase = *bs.last_tx == FrameKind::Data;
        const auto& held = data_phase ? bs.tx_copy : bs.frag_staging;
        if (!held) continue;
        const std::uint32_t next = data_phase ? held->long_retry_count + 1u : held->short_retry_count + 1u;
        const std::uint32_t limit = data_phase ? cfg_.params.long_retry_limit : cfg_.params.short_retry_limit;
        if (next >= limit) drop_predicted = true;
    }
    can_send_more_ = total_desired_ < capacity || drop_predicted;
    no_of_frame_ = 0;
    for (std::size_t b = 0; b < beams_.size(); ++b) {
        if (expected_.count(b)) {
            requeue_unsuccessful_beam(b, can_send_more_);
        } else if (beams_[b].last_tx_set_nav) {
            requeue_unsuccessful_beam(b, true);
        }
    }
    node_based_cw_reset(false);
    finish_cycle(false);
}

void Mac::on_response_batch(std::span<const Reception> batch) {
    const bool relevant = std::any_of(batch.begin(), batch.end(),
                                      [this](const Reception& r) { return expected_.count(r.port) > 0; });
    if (!relevant) return;
    if (kernel_.is_pending(timeout_)) {
        cancel_timer(timeout_);
        trace(TraceKind::TimeoutCancel, static_cast<int>(batch.front().port));
    }
    cancel_timer(guard_);
    const FrameKind want = phase_ == Phase::Rts ? FrameKind::Cts : FrameKind::Ack;
    std::set<std::size_t> ok;
    for (const auto& r : batch) {
        if (!expected_.count(r.port)) continue;
        const auto& f = r.frame;
        if (f.kind == want && f.rx_addr == cfg_.address && beams_[r.port].peer == f.tx_addr) ok.insert(r.port);
    }
    no_of_frame_ = ok.size();
    counters_.control_received += ok.size();
    const bool partial = ok.size() != expected_.size();
    for (std::size_t b = 0; b < beams_.size(); ++b) {
        if (expected_.count(b) && !ok.count(b)) {
            requeue_unsuccessful_beam(b, true);
        } else if (partial && beams_[b].last_tx_set_nav) {
            requeue_unsuccessful_beam(b, true);
        }
    }
    if (phase_ == Phase::Rts) {
        if (ok.empty()) {
            node_based_cw_reset(false);
            finish_cycle(false);
            return;
        }
        for (std::size_t b : ok) beams_[b].frag_staging->short_retry_count = 0;
        set_state(MacState::Respond);
        std::vector<std::size_t> beams(ok.begin(), ok.end());
        sifs_timer_ = kernel_.schedule(kernel_.now() + us(cfg_.params.sifs_us), EventKind::MacTimer,
                                       EventTarget{node_, std::nullopt}, [this, beams] { send_data(beams); });
        return;
    }
    for (std::size_t b : ok) {
        ++counters_.mac_sent_data;
        trace(TraceKind::Flag, static_cast<int>(b), &*beams_[b].tx_copy, 1, "acked");
        beams_[b].tx_copy.reset();
        beams_[b].hnav.to_send = false;
    }
    node_based_cw_reset(!ok.empty());
    finish_cycle(!ok.empty());
}

void Mac::send_data(std::vector<std::size_t> beams) {
    sifs_timer_ = EventHandle{};
    std::vector<BeamFrame> out;
    std::set<std::size_t> sent;
    for (std::size_t b : beams) {
        auto& bs = beams_[b];
        bs.tx_copy = std::move(bs.frag_staging);
        bs.frag_staging.reset();
        if (channel_.port_has_valid(node_, b)) {
            bs.last_tx = FrameKind::Data;
            requeue_unsuccessful_beam(b, true);
            continue;
        }
        Frame d = *bs.tx_copy;
        d.tx_addr = cfg_.address;
        d.duration_us = nav_duration_us(FrameKind::Data, cfg_.params);
        out.push_back({b, d});
        sent.insert(b);
        ++counters_.data_tx;
    }
    for (auto& b : beams_) b.last_tx_set_nav = false;
    if (out.empty()) {
        node_based_cw_reset(false);
        finish_cycle(false);
        return;
    }
    send(out);
    expected_ = sent;
    total_desired_ = sent.size();
    no_of_frame_ = 0;
    phase_ = Phase::Data;
    after_tx_ = MacState::WaitForResponse;
}

void Mac::finish_cycle(bool success) {
    ++counters_.cycles;
    phase_ = Phase::None;
    expected_.clear();
    cycle_beams_.clear();
    backoff_remaining_.reset();
    if (success && cfg_.role_switch && has_pending_data()) {
        yield_ = us(cfg_.params.difs_us + cfg_.params.slot_us);
    }
    set_state(MacState::Idle);
    reevaluate();
}

void Mac::respond_to_rts(std::span<const Reception> batch) {
    std::vector<Frame> rts;
    std::vector<std::size_t> beams;
    const std::size_t capacity = cfg_.bottleneck ? cfg_.bottleneck_capacity : 1;
    for (const auto& r : batch) {
        if (r.frame.kind != FrameKind::Rts || r.frame.rx_addr != cfg_.address) continue;
        if (!nav_free(r.port) || rts.size() >= capacity) continue;
        rts.push_back(r.frame);
        beams.push_back(r.port);
    }
    if (rts.empty()) return;
    freeze();
    set_state(MacState::Respond);
    sifs_timer_ = kernel_.schedule(kernel_.now() + us(cfg_.params.sifs_us), EventKind::MacTimer,
                                   EventTarget{node_, std::nullopt}, [this, rts, beams] {
                                       sifs_timer_ = EventHandle{};
                                       const auto& p = cfg_.params;
                                       bool will_have_data = has_pending_data();
                                       std::vector<BeamFrame> out;
                                       awaited_.clear();
                                       for (std::size_t i = 0; i < rts.size(); ++i) {
                                           if (rts[i].final_dest_addr != cfg_.address) will_have_data = true;
                                           if (channel_.port_has_valid(node_, beams[i])) continue;
                                           Frame cts = rts[i];
                                           cts.kind = FrameKind::Cts;
                                           cts.tx_addr = cfg_.address;
                                           cts.rx_addr = rts[i].tx_addr;
                                           cts.size_bytes = p.sizes.cts_bytes;
                                           cts.duration_us = nav_duration_us(FrameKind::Cts, p);
                                           out.push_back({beams[i], cts});
                                           awaited_.insert(beams[i]);
                                           beams_[beams[i]].peer = rts[i].tx_addr;
                                           ++counters_.cts_sent;
                                       }
                                       if (out.empty()) {
                                           set_state(MacState::Idle);
                                           reevaluate();
                                           return;
                                       }
                                       std::vector<std::size_t> sch;
                                       const Frame base = out.front().frame;
                                       for (std::size_t b = 0; b < beams_.size(); ++b) {
                                           const auto& h = beams_[b].hnav;
                                           if (awaited_.count(b) || !h.neighbor_addr) continue;
                                           if (!(h.is_valid_rts_received || h.is_invalid_cts_received)) continue;
                                           if (channel_.port_busy(node_, b) || !nav_free(b)) continue;
                                           Frame s = base;
                                           s.kind = FrameKind::SchCts;
                                           s.rx_addr = *h.neighbor_addr;
                                           s.duration_us = nav_duration_us(FrameKind::SchCts, p, will_have_data);
                                           out.push_back({b, s});
                                           sch.push_back(b);
                                           ++counters_.sch_sent;
                                       }
                                       const SimTime end = send(out);
                                       for (std::size_t b : sch) {
                                           beams_[b].own_nav = end + us(nav_duration_us(FrameKind::SchCts, p));
                                           trace(TraceKind::NavSet, static_cast<int>(b), nullptr,
                                                 beams_[b].own_nav.count(), "own");
                                       }
                                       after_tx_ = MacState::AwaitData;
                                   });
}

void Mac::on_await_timeout() {
    await_timer_ = EventHandle{};
    awaited_.clear();
    trace(TraceKind::TimeoutFire, -1, nullptr, 0, "await-data");
    set_state(MacState::Idle);
    reevaluate();
}

void Mac::on_data_batch(std::span<const Reception> batch) {
    const bool relevant = std::any_of(batch.begin(), batch.end(),
                                      [this](const Reception& r) { return awaited_.count(r.port) > 0; });
    if (!relevant) return;
    cancel_timer(await_timer_);
    std::vector<std::pair<std::size_t, Frame>> acks;
    for (const auto& r : batch) {
        const auto& f = r.frame;
        if (!awaited_.count(r.port) || f.kind != FrameKind::Data || f.rx_addr != cfg_.address) continue;
        if (beams_[r.port].peer != f.tx_addr) continue;
        on_data_arrival(f, r.port);
        acks.emplace_back(r.port, f);
    }
    awaited_.clear();
    if (acks.empty()) {
        set_state(MacState::Idle);
        reevaluate();
        return;
    }
    set_state(MacState::Respond);
    sifs_timer_ = kernel_.schedule(kernel_.now() + us(cfg_.params.sifs_us), EventKind::MacTimer,
                                   EventTarget{node_, std::nullopt}, [this, acks] {
                                       sifs_timer_ = EventHandle{};
                                       std::vector<BeamFrame> out;
                                       for (const auto& [b, d] : acks) {
                                           if (channel_.port_has_valid(node_, b)) continue;
                                           Frame ack = d;
                                           ack.kind = FrameKind::Ack;
                                           ack.tx_addr = cfg_.address;
                                           ack.rx_addr = d.tx_addr;
                                           ack.size_bytes = cfg_.params.sizes.ack_bytes;
                                           ack.duration_us = nav_duration_us(FrameKind::Ack, cfg_.params);
                                           out.push_back({b, ack});
                                           ++counters_.ack_sent;
                                       }
                                       if (out.empty()) {
                                           set_state(MacState::Idle);
                                           reevaluate();
                                           return;
                                       }
                                       send(out);
                                       after_tx_ = MacState::Idle;
                                   });
}

void Mac::on_data_arrival(const Frame& f, std::size_t beam) {
    if (std::find(recent_trees_.begin(), recent_trees_.end(), f.tree_id) != recent_trees_.end()) {
        ++counters_.duplicates_discarded;
        trace(TraceKind::Drop, static_cast<int>(beam), &f, static_cast<std::int64_t>(f.tree_id), "duplicate");
        return;
    }
    recent_trees_.push_back(f.tree_id);
    while (recent_trees_.size() > cfg_.duplicate_memory) recent_trees_.pop_front();
    ++rx_from_[f.tx_addr];
    if (f.final_dest_addr == cfg_.address) {
        ++counters_.sink_delivered;
        trace(TraceKind::Sink, static_cast<int>(beam), &f, static_cast<std::int64_t>(f.tree_id));
        if (sink_) sink_(f);
        return;
    }
    admit(f, queue_for_antenna(beam), true);
}

void Mac::set_nav(std::size_t beam, SimTime expiry, Address from) {
    auto& h = beams_[beam].hnav;
    if (expiry <= h.nav_expiry) return;
    h.nav_expiry = expiry;
    trace(TraceKind::NavSet, static_cast<int>(beam), nullptr, expiry.count(), "peer=" + std::to_string(from));
}

void Mac::update_hnav(const Reception& r) {
    const auto& f = r.frame;
    auto& h = beams_[r.port].hnav;
    const SimTime now = kernel_.now();
    if (f.rx_addr == cfg_.address) {
        if (f.kind == FrameKind::Rts) {
            h.is_valid_rts_received = true;
            h.neighbor_addr = f.tx_addr;
        }
        if (is_sch(f.kind)) set_nav(r.port, now + us(f.duration_us), f.tx_addr);
        return;
    }
    if (f.kind == FrameKind::Cts) {
        h.is_invalid_cts_received = true;
        h.neighbor_addr = f.tx_addr;
    }
    if (f.duration_us > 0) set_nav(r.port, now + us(f.duration_us), f.tx_addr);
}

void Mac::on_carrier_busy(std::size_t beam, double) {
    auto& bs = beams_.at(beam);
    if (bs.receiver_busy) {
        update_collision_ = true;
        if (!collision_ && update_collision_) {
            collision_ = true;
            update_collision_ = false;
            ++counters_.collisions;
            trace(TraceKind::Flag, static_cast<int>(beam), nullptr, 1, "collision");
        }
    } else {
        bs.receiver_busy = true;
    }
    switch (state_) {
        case MacState::WaitForResponse:
            if (expected_.count(beam) && kernel_.is_pending(timeout_)) {
                cancel_timer(timeout_);
                trace(TraceKind::TimeoutCancel, static_cast<int>(beam));
                const FrameKind resp = phase_ == Phase::Rts ? FrameKind::Cts : FrameKind::Ack;
                guard_ = kernel_.schedule(
                    kernel_.now() + tx_duration(cfg_.params.sizes.of(resp), cfg_.params.data_rate_bps) + slot(),
                    EventKind::FrameTimeout, EventTarget{node_, std::nullopt}, [this] {
                        guard_ = EventHandle{};
                        on_timeout();
                    });
            }
            break;
        case MacState::AwaitData:
            if (awaited_.count(beam)) {
                cancel_timer(await_timer_);
                await_timer_ = kernel_.schedule(
                    kernel_.now() + tx_duration(cfg_.params.sizes.data_bytes, cfg_.params.data_rate_bps) * 2 + slot(),
                    EventKind::MacTimer, EventTarget{node_, std::nullopt}, [this] { on_await_timeout(); });
            }
            break;
        default:
            reevaluate();
            break;
    }
}

void Mac::on_carrier_idle(std::size_t beam) {
    beams_.at(beam).receiver_busy = false;
    reevaluate();
}

void Mac::on_batch(std::span<const Reception> batch) {
    for (const auto& r : batch) {
        trace(TraceKind::RxFrame, static_cast<int>(r.port), &r.frame, r.frame.duration_us);
        update_hnav(r);
    }
    switch (state_) {
        case MacState::WaitForResponse: on_response_batch(batch); break;
        case MacState::AwaitData: on_data_batch(batch); break;
        case MacState::Idle:
        case MacState::Defer:
        case MacState::Backoff: respond_to_rts(batch); break;
        default: break;
    }
    reevaluate();
}

void Mac::trace(TraceKind kind, int beam, const Frame* f, std::int64_t value, std::string detail) {
    if (trace_ == nullptr || !trace_->enabled()) return;
    TraceRecord r;
    r.at = kernel_.now();
    r.node = node_;
    r.kind = kind;
    r.beam = beam;
    if (f != nullptr) {
        r.has_frame = true;
        r.frame_kind = f->kind;
        r.peer = kind == TraceKind::TxFrame ? f->rx_addr : f->tx_addr;
    }
    r.value = value;
    r.detail = std::move(detail);
    trace_->emit(std::move(r));
}

}  // namespace mbsim
