// Acceptance harness: one PASS/FAIL line per criterion, details indented below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harness.hpp"
#include "mbsim/antenna.hpp"
#include "mbsim/frame.hpp"
#include "mbsim/mac.hpp"
#include "mbsim/scenario.hpp"
#include "mbsim/simulation.hpp"

using namespace mbsim;
using namespace mbsim::testing;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        notes.push_back(std::string(ok ? "ok   " : "MISS ") + what);
        pass = pass && ok;
    }
    void note(const std::string& what) { notes.push_back("     " + what); }
};

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string band(double v, double lo, double hi) {
    return fmt(v, 2) + " in [" + fmt(lo, 2) + ", " + fmt(hi, 2) + "]";
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

/// Target +/- 20 percent.
std::pair<double, double> pm20(double v) { return {0.8 * v, 1.2 * v}; }

void check_band(Verdict& v, const std::string& what, double value, double target) {
    auto [lo, hi] = pm20(target);
    v.check(within(value, lo, hi), what + " " + band(value, lo, hi));
}

SimOptions traced() {
    SimOptions o;
    o.keep_trace = true;
    return o;
}

// Oracles -------------------------------------------------------------------

double oracle_friis_dbm(double pt_w, double gt_db, double gr_db, double f_hz, double r_m) {
    const double c = 299792458.0;
    const double pi = std::acos(-1.0);
    const double lambda = c / f_hz;
    const double ratio = std::pow(10.0, gt_db / 10.0) * std::pow(10.0, gr_db / 10.0) *
                         std::pow(lambda / (4.0 * pi * r_m), 2.0);
    return 10.0 * std::log10(pt_w * ratio * 1000.0);
}

std::uint8_t oracle_queue(std::size_t antenna, std::size_t queues) {
    for (std::size_t j = 1; j <= queues; ++j) {
        std::size_t k = antenna;
        while (k >= queues) k -= queues;
        if (k + 1 == j) return static_cast<std::uint8_t>(j);
    }
    return 0;
}

// Per-criterion bodies ------------------------------------------------------

Verdict c1_directivity() {
    Verdict v;
    const double d = directivity_from_hpbw(Hpbw{10.0, 10.0});
    const double oracle = 32400.0 / (10.0 * 10.0);
    v.check(std::abs(d - oracle) < 1e-9 && std::abs(d - 324.0) < 1e-9, "D(10,10) = " + fmt(d, 6) + ", expected 324");
    const double db = to_db(d);
    v.check(std::abs(db - 25.11) <= 0.01, "10 log10 D = " + fmt(db, 4) + " dB, expected 25.11 +/- 0.01");
    return v;
}

Verdict c2_link_budget() {
    Verdict v;
    const double pr3 = friis_received_power_dbm(2.3e-5, 25.023, 25.023, 2.437e9, 3000.0);
    const double or3 = oracle_friis_dbm(2.3e-5, 25.023, 25.023, 2.437e9, 3000.0);
    v.check(std::abs(pr3 - or3) < 1e-9, "library matches independent Friis evaluation (" + fmt(or3, 4) + " dBm)");
    v.check(std::abs(pr3 - (-76.0)) <= 0.5, "Pr(3 km) = " + fmt(pr3, 3) + " dBm, expected -76 +/- 0.5");
    const double pr35 = friis_received_power_dbm(2.3e-5, 25.023, 25.023, 2.437e9, 3500.0);
    v.check(pr35 < -76.0, "Pr(3.5 km) = " + fmt(pr35, 3) + " dBm below -76 dBm threshold");

    // Same budget through the channel: a facing pair links at 2.9 km but not at 3.5 km.
    auto link_exists = [](double range) {
        const auto s = TopologyBuilder{}
                           .node(1, {0, 0}, {2})
                           .node(2, {range, 0}, {1})
                           .build("link");
        Simulation sim(s);
        return !sim.channel().links(1, 0).empty();
    };
    v.check(link_exists(2900.0), "channel link present at 2.9 km");
    v.check(!link_exists(3500.0), "channel link absent at 3.5 km");
    return v;
}

Verdict c3_queue_mapping() {
    Verdict v;
    bool all = true;
    std::string row;
    for (std::size_t i = 0; i <= 7; ++i) {
        const auto got = Mac::queue_for_antenna(i, 4);
        const auto want = oracle_queue(i, 4);
        all = all && got == want;
        row += std::to_string(i) + "->" + std::to_string(got) + " ";
    }
    v.check(all, "antenna->queue for i in [0,7]: " + row);
    v.check(Mac::queue_for_antenna(0, 4) == 1, "antenna 0 -> queue 1");
    return v;
}

Verdict c4_backoff_sequence() {
    Verdict v;
    // Oracle: CW doubles as 2cw+1 from cw_min, capped at cw_max; slots = cw + 1.
    std::vector<std::int64_t> oracle;
    std::uint32_t cw = 15;
    for (int k = 0; k < 8; ++k) {
        oracle.push_back(cw + 1);
        cw = std::min<std::uint32_t>(2 * cw + 1, 1023);
    }

    auto s = TopologyBuilder{}.node(1, {0, 0}, {2}).node(2, {2000, 0}, {1}).route(1, 2, 2).build("backoff",
                                                                                                   SimTime::sec(2));
    Simulation sim(s, traced());
    ScriptedPeer peer(sim, 2);
    peer.ignore_first_rts = 8;
    inject(sim, 1, SimTime::ms(1), 2, 1, 1);
    inject(sim, 1, SimTime::ms(1), 2, 2, 2);
    inject(sim, 1, SimTime::ms(1), 2, 3, 3);
    sim.run();
    const auto& h = sim.mac(1).backoff_history();
    std::string got;
    for (auto x : h) got += std::to_string(x) + " ";
    v.note("observed slot counts: " + got);
    v.check(h.size() >= 10, "at least ten contention rounds observed");
    if (h.size() >= 10) {
        v.check(std::equal(oracle.begin(), oracle.end(), h.begin()),
                "eight consecutive failures give 16 32 64 128 256 512 1024 1024");
        v.check(h[8] == 1024, "ninth attempt (first answered) still at the cap");
        v.check(h[9] == 16, "after one success the next backoff is 16");
    }
    v.check(sim.mac(1).counters().dropped_retry == 1, "first frame dropped at short retry limit");
    return v;
}

Scenario cpr_pair(double second_range) {
    return TopologyBuilder{}
        .node(1, {0, 0}, {2, 3}, true, 2)
        .node(2, polar({0, 0}, 2000.0, 0.0), {1})
        .node(3, polar({0, 0}, second_range, 90.0), {1})
        .route(2, 1, 1)
        .route(3, 1, 1)
        .build("cpr_pair", SimTime::ms(200));
}

Verdict c5_cpr_unit() {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    {
        Simulation sim(cpr_pair(2000.0), traced());
        inject(sim, 2, SimTime::ms(1), 1, 1, 11);
        inject(sim, 3, SimTime::ms(1), 1, 1, 12);
        sim.run_until(SimTime::ms(20));
        const auto rts = select(sim.trace(), [](const TraceRecord& r) {
            return r.kind == TraceKind::RxFrame && r.node == 1 && r.frame_kind == FrameKind::Rts;
        });
        const auto cts = select(sim.trace(), [](const TraceRecord& r) { return is_tx(r, 1, FrameKind::Cts); });
        v.check(rts.size() >= 2 && rts[0].at == rts[1].at, "equidistant: both RTS delivered in one batch");
        v.check(cts.size() == 2 && cts[0].at == cts[1].at, "equidistant: both answered with CTS at one instant");
        v.check(sim.sink(1).delivered() == 2, "equidistant: both data frames delivered (" +
                                                  std::to_string(sim.sink(1).delivered()) + ")");
    }
    {
        Simulation sim(cpr_pair(2500.0), traced());
        inject(sim, 2, SimTime::ms(1), 1, 1, 11);
        inject(sim, 3, SimTime::ms(1), 1, 1, 12);
        sim.run_until(SimTime::ms(20));
        const auto rts = select(sim.trace(), [](const TraceRecord& r) {
            return r.kind == TraceKind::RxFrame && r.node == 1 && r.frame_kind == FrameKind::Rts;
        });
        const auto cts = select(sim.trace(), [](const TraceRecord& r) { return is_tx(r, 1, FrameKind::Cts); });
        const auto sinks = select(sim.trace(), [](const TraceRecord& r) {
            return r.kind == TraceKind::Sink && r.node == 1;
        });
        const double gap = rts.size() >= 2 ? (rts[1].at - rts[0].at).to_us() : 0.0;
        v.check(rts.size() >= 2 && rts[0].peer == 2 && rts[1].peer == 3 && std::abs(gap - 500.0 / kSpeedOfLight * 1e6) < 0.01,
                "shifted by 500 m: RTS arrivals split by " + fmt(gap, 3) + " us");
        v.check(!cts.empty() && cts[0].peer == 2 && (cts.size() < 2 || cts[1].at != cts[0].at),
                "shifted: first CTS volley answers only the nearer transmitter");
        v.check(!sinks.empty() && sinks[0].peer == 2, "shifted: the nearer pair completes first");
        const auto first_cycle_sinks =
            std::count_if(sinks.begin(), sinks.end(), [&](const TraceRecord& r) { return r.at == sinks[0].at; });
        v.check(first_cycle_sinks == 1, "shifted: only one data frame in the first reception");
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check(wall < 1.0, "runtime " + fmt(wall, 3) + " s < 1 s");
    return v;
}

/// Three-bottleneck layout: X, Y, Z bottlenecks; 11, 12 next to Y, 13 next to Z,
/// 14 next to X.
Scenario triad_layout() {
    const Position X{0, 0};
    const Position Y{2000, 0};
    const Position Z{0, -2000};
    TopologyBuilder b;
    b.node(21, X, {22, 23, 14}, true, 4)
        .node(22, Y, {21, 11, 12}, true, 4)
        .node(23, Z, {21, 13}, true, 4)
        .node(11, polar(Y, 2000, 30), {22})
        .node(12, polar(Y, 2000, -30), {22})
        .node(13, polar(Z, 2000, -90), {23})
        .node(14, polar(X, 2000, 180), {21})
        .route(11, 22, 22)
        .route(12, 22, 22)
        .route(13, 23, 23)
        .route(14, 21, 21)
        .route(21, 11, 22)
        .route(22, 11, 11)
        .route(21, 23, 23);
    return b.build("triad", SimTime::ms(600));
}

Verdict c6_triad_walkthrough() {
    Verdict v;
    Simulation sim(triad_layout(), traced());
    // Earlier exchanges leave RTS history on the beams toward 11, 12, 13, 14.
    inject(sim, 11, SimTime::ms(100), 22, 1, 101);
    inject(sim, 12, SimTime::ms(100), 22, 1, 102);
    inject(sim, 13, SimTime::ms(100), 23, 1, 103);
    inject(sim, 14, SimTime::ms(100), 21, 1, 104);
    // X has one frame for 11 (through Y) and two for Z.
    inject(sim, 21, SimTime::ms(300), 11, 1, 201);
    inject(sim, 21, SimTime::ms(300), 23, 2, 202);
    inject(sim, 21, SimTime::ms(300), 23, 2, 203);
    sim.run();
    const Trace& t = sim.trace();
    const MacParams& p = sim.scenario().mac;
    auto first = [&](std::function<bool(const TraceRecord&)> pred, SimTime from) -> std::optional<TraceRecord> {
        for (const auto& r : t.records()) {
            if (r.at >= from && pred(r)) return r;
        }
        return std::nullopt;
    };
    const SimTime start = SimTime::ms(300);
    auto x_rts = select(t, [&](const TraceRecord& r) { return r.at >= start && is_tx(r, 21, FrameKind::Rts); });
    if (x_rts.empty()) {
        v.check(false, "X never sent RTS");
        return v;
    }
    const SimTime t1 = x_rts.front().at;
    std::set<Address> rts_to, sch_rts_to;
    for (const auto& r : t.records()) {
        if (r.at != t1 || r.node != 21 || r.kind != TraceKind::TxFrame) continue;
        (r.frame_kind == FrameKind::Rts ? rts_to : sch_rts_to).insert(r.peer);
    }
    v.check(rts_to == std::set<Address>{22, 23}, "X sends RTS to Y and Z at one instant");
    v.check(sch_rts_to == std::set<Address>{14}, "X sends SCH/RTS toward node 14 in the same volley");

    auto nav14 = first([](const TraceRecord& r) { return r.node == 14 && r.kind == TraceKind::NavSet; }, t1);
    v.check(nav14.has_value(), "node 14 updates its NAV from the SCH/RTS");

    auto y_cts = first([](const TraceRecord& r) { return is_tx(r, 22, FrameKind::Cts); }, t1);
    auto z_cts = first([](const TraceRecord& r) { return is_tx(r, 23, FrameKind::Cts); }, t1);
    v.check(y_cts && y_cts->peer == 21 && z_cts && z_cts->peer == 21, "Y and Z reply with CTS to X");
    if (!y_cts || !z_cts) return v;
    std::map<Address, std::int64_t> y_sch, z_sch;
    for (const auto& r : t.records()) {
        if (r.kind != TraceKind::TxFrame || r.frame_kind != FrameKind::SchCts) continue;
        if (r.node == 22 && r.at == y_cts->at) y_sch[r.peer] = r.value;
        if (r.node == 23 && r.at == z_cts->at) z_sch[r.peer] = r.value;
    }
    const std::int64_t plain = nav_duration_us(FrameKind::SchCts, p, false);
    const std::int64_t jump = nav_duration_us(FrameKind::SchCts, p, true);
    v.check(jump == plain + p.aifs_us, "jump backoff duration = plain + AIFS (" + std::to_string(jump) + " us)");
    v.check(y_sch.size() == 2 && y_sch[11] == jump && y_sch[12] == jump,
            "Y sends SCH/CTS(+AIFS) to nodes 11 and 12 with the CTS");
    v.check(z_sch.size() == 1 && z_sch[13] == plain, "Z sends SCH/CTS without AIFS to node 13");

    auto nav_of = [&](NodeId n) -> std::optional<std::int64_t> {
        auto r = first([n](const TraceRecord& x) { return x.node == n && x.kind == TraceKind::NavSet; }, y_cts->at);
        if (!r) return std::nullopt;
        return r->value;
    };
    const auto n11 = nav_of(11), n12 = nav_of(12), n13 = nav_of(13);
    v.check(n11 && n12 && n13 && *n13 < *n11 && *n13 < *n12,
            "NAV expiry of node 13 (" + (n13 ? std::to_string(*n13) : "-") + ") < nodes 11/12 (" +
                (n11 ? std::to_string(*n11) : "-") + ", " + (n12 ? std::to_string(*n12) : "-") + ")");

    auto x_data = select(t, [&](const TraceRecord& r) { return r.at > y_cts->at && is_tx(r, 21, FrameKind::Data); });
    v.check(x_data.size() >= 2 && x_data[0].at == x_data[1].at, "X sends DATA to Y and Z concurrently");
    auto y_ack = first([](const TraceRecord& r) { return is_tx(r, 22, FrameKind::Ack) && r.peer == 21; }, y_cts->at);
    auto z_ack = first([](const TraceRecord& r) { return is_tx(r, 23, FrameKind::Ack) && r.peer == 21; }, y_cts->at);
    v.check(y_ack && z_ack, "Y and Z acknowledge");
    auto x_got_acks = first(
        [](const TraceRecord& r) { return r.node == 21 && r.kind == TraceKind::RxFrame && r.frame_kind == FrameKind::Ack; },
        y_cts->at);
    if (!x_got_acks) {
        v.check(false, "X receives the ACKs");
        return v;
    }
    auto next_rts = first(
        [](const TraceRecord& r) { return r.kind == TraceKind::TxFrame && r.frame_kind == FrameKind::Rts; },
        x_got_acks->at);
    v.check(next_rts && next_rts->node == 22 && next_rts->peer == 11,
            "after the ACKs the next RTS is Y -> node 11" +
                (next_rts ? " (got n" + std::to_string(next_rts->node) + " -> " + std::to_string(next_rts->peer) + ")"
                          : std::string()));
    auto x_next = first([](const TraceRecord& r) { return is_tx(r, 21, FrameKind::Rts); }, x_got_acks->at);
    v.check(x_next && next_rts && x_next->at > next_rts->at, "X contends again only after Y seized the channel");
    v.check(timeout_cancel_violations(t).empty(), "no frame timeout cancelled from a non-expected beam");
    return v;
}

Verdict c7_timeout_discipline() {
    Verdict v;
    const Position X{0, 0};
    const Position Y{1000, 0};
    auto s = TopologyBuilder{}
                 .node(21, X, {22, 14}, true, 4)
                 .node(22, Y, {21, 11, 12}, true, 4)
                 .node(14, polar(X, 1000, 180), {21})
                 .node(11, polar(Y, 2500, 30), {22})
                 .node(12, polar(Y, 2500, -30), {22})
                 .route(22, 21, 21)
                 .route(14, 21, 21)
                 .route(22, 11, 11)
                 .route(22, 12, 12)
                 .build("timeout", SimTime::ms(400));
    Simulation sim(s, traced());
    inject(sim, 22, SimTime::ms(100), 21, 1, 301);  // leaves RTS history at X toward Y
    inject(sim, 14, SimTime::ms(200), 21, 1, 302);
    inject(sim, 22, SimTime::ms(200), 11, 1, 303);
    inject(sim, 22, SimTime::ms(200), 12, 2, 304);
    sim.run();
    const Trace& t = sim.trace();
    const std::size_t beam_to_x = *sim.channel().beam_toward(22, 21);

    auto y_rts = select(t, [](const TraceRecord& r) { return r.at >= SimTime::ms(200) && is_tx(r, 22, FrameKind::Rts); });
    auto n14_rts = select(t, [](const TraceRecord& r) { return r.at >= SimTime::ms(200) && is_tx(r, 14, FrameKind::Rts); });
    v.check(!y_rts.empty() && !n14_rts.empty() && y_rts[0].at == n14_rts[0].at,
            "node 14 and Y send RTS at the same instant");
    auto x_sch = select(t, [](const TraceRecord& r) {
        return r.at >= SimTime::ms(200) && r.node == 21 && r.kind == TraceKind::TxFrame &&
               r.frame_kind == FrameKind::SchCts && r.peer == 22;
    });
    v.check(!x_sch.empty(), "X answers node 14 with CTS and sends SCH/CTS toward Y");
    if (y_rts.empty() || x_sch.empty()) return v;
    std::optional<SimTime> sch_arrival, first_cts_arrival;
    for (const auto& r : t.records()) {
        if (r.at < y_rts[0].at || r.node != 22 || r.kind != TraceKind::RxBegin) continue;
        if (r.frame_kind == FrameKind::SchCts && !sch_arrival) sch_arrival = r.at;
        if (r.frame_kind == FrameKind::Cts && !first_cts_arrival) first_cts_arrival = r.at;
    }
    v.check(sch_arrival && first_cts_arrival && *sch_arrival < *first_cts_arrival,
            "SCH/CTS reaches Y before the CTSs from 11 and 12");
    auto cancels = select(t, [&](const TraceRecord& r) {
        return r.node == 22 && r.kind == TraceKind::TimeoutCancel && r.at >= y_rts[0].at;
    });
    v.check(!cancels.empty() && std::none_of(cancels.begin(), cancels.end(), [&](const TraceRecord& r) {
                return r.beam == static_cast<int>(beam_to_x);
            }),
            "Y's frame timeout is never cancelled by the arrival on the beam toward X");
    v.check(!cancels.empty() && first_cts_arrival && cancels[0].at == *first_cts_arrival,
            "the first cancellation coincides with the expected CTS arrival");
    auto y_data = select(t, [&](const TraceRecord& r) { return r.at > y_rts[0].at && is_tx(r, 22, FrameKind::Data); });
    v.check(y_data.size() >= 2 && y_data[0].at == y_data[1].at, "Y completes the exchange with 11 and 12 concurrently");
    const auto bad = timeout_cancel_violations(t);
    v.check(bad.empty(), "trace-wide: every cancellation names an expected beam (" + std::to_string(bad.size()) +
                             " violations)");
    return v;
}

Scenario star(std::size_t peers) {
    TopologyBuilder b;
    std::vector<NodeId> toward;
    for (std::size_t i = 0; i < peers; ++i) toward.push_back(static_cast<NodeId>(2 + i));
    b.node(1, {0, 0}, toward, true, 4);
    for (std::size_t i = 0; i < peers; ++i) {
        const NodeId id = static_cast<NodeId>(2 + i);
        b.node(id, polar({0, 0}, 2000, 90.0 * static_cast<double>(i)), {1});
        b.route(1, id, id);
    }
    return b.build("star", SimTime::sec(1));
}

void run_to_first_timeout(Simulation& sim, NodeId n) {
    SimTime t = SimTime::ms(1);
    while (sim.mac(n).counters().timeouts == 0 && t < SimTime::sec(1)) {
        t += SimTime::us(1);
        sim.run_until(t);
    }
}

Verdict c8_retransmission() {
    Verdict v;
    {
        Simulation sim(star(4));
        std::vector<std::unique_ptr<ScriptedPeer>> peers;
        for (NodeId id = 2; id <= 5; ++id) {
            peers.push_back(std::make_unique<ScriptedPeer>(sim, id));
            peers.back()->answer_rts = false;
        }
        inject(sim, 1, SimTime::ms(1), 2, 1, 1);
        inject(sim, 1, SimTime::ms(1), 3, 2, 2);
        run_to_first_timeout(sim, 1);
        const Mac& m = sim.mac(1);
        v.check(m.total_desired_frame() == 2, "two frames in flight");
        v.check(m.queue(1).size() == 1 && m.queue(1).front().short_retry_count == 1 && m.queue(2).size() == 1 &&
                    m.queue(2).front().short_retry_count == 1,
                "pure timeout with 2 < capacity: both frames back at their queue heads with retry 1");
        v.check(m.can_send_more_packets(), "can_send_more_packets is true");
        v.check(m.replay_beams().empty(), "no replay staging");
    }
    {
        Simulation sim(star(4));
        std::vector<std::unique_ptr<ScriptedPeer>> peers;
        for (NodeId id = 2; id <= 5; ++id) {
            peers.push_back(std::make_unique<ScriptedPeer>(sim, id));
            peers.back()->answer_rts = false;
        }
        for (NodeId d = 2; d <= 5; ++d) inject(sim, 1, SimTime::ms(1), d, static_cast<std::uint8_t>(d - 1), d);
        run_to_first_timeout(sim, 1);
        const Mac& m = sim.mac(1);
        bool staged = true;
        for (std::size_t b = 0; b < 4; ++b) {
            staged = staged && m.frag_staging(b) && m.frag_staging(b)->short_retry_count == 1;
        }
        v.check(!m.can_send_more_packets(), "four in flight at capacity 4: can_send_more_packets is false");
        v.check(m.replay_beams().size() == 4 && staged && m.queued_packets() == 0,
                "pure replay: all four frames stay staged with retry 1");
        sim.run_until(SimTime::ms(60));
        auto rts = sim.mac(1).counters().rts_sent;
        v.check(rts >= 8 && rts % 4 == 0, "replay cycles resend the same four RTS (" + std::to_string(rts) + " so far)");
    }
    auto single = [](bool answer_rts) {
        auto s = TopologyBuilder{}.node(1, {0, 0}, {2}).node(2, {2000, 0}, {1}).route(1, 2, 2).build("retry",
                                                                                                      SimTime::sec(2));
        auto sim = std::make_unique<Simulation>(s, traced());
        auto peer = std::make_unique<ScriptedPeer>(*sim, 2);
        peer->answer_rts = answer_rts;
        peer->answer_data = false;
        inject(*sim, 1, SimTime::ms(1), 2, 1, 1);
        sim->run();
        return std::make_pair(std::move(sim), std::move(peer));
    };
    {
        auto [sim, peer] = single(true);
        const auto data = select(sim->trace(), [](const TraceRecord& r) { return is_tx(r, 1, FrameKind::Data); });
        const auto drops = select(sim->trace(), [](const TraceRecord& r) {
            return r.node == 1 && r.kind == TraceKind::Drop && r.detail == "long-retry";
        });
        v.check(data.size() == 4, "unacknowledged data transmitted " + std::to_string(data.size()) + " times (4)");
        v.check(drops.size() == 1 && drops[0].value == 4 && sim->mac(1).counters().dropped_retry == 1,
                "dropped at long retry 4");
    }
    {
        auto [sim, peer] = single(false);
        const auto rts = select(sim->trace(), [](const TraceRecord& r) { return is_tx(r, 1, FrameKind::Rts); });
        const auto drops = select(sim->trace(), [](const TraceRecord& r) {
            return r.node == 1 && r.kind == TraceKind::Drop && r.detail == "short-retry";
        });
        v.check(rts.size() == 7, "unanswered RTS transmitted " + std::to_string(rts.size()) + " times (7)");
        v.check(drops.size() == 1 && drops[0].value == 7, "dropped at short retry 7");
    }
    return v;
}

Verdict c9_duplicates() {
    Verdict v;
    for (double second : {2000.0, 2400.0}) {
        auto s = TopologyBuilder{}
                     .node(1, {0, 0}, {2, 3}, true, 2)
                     .node(2, polar({0, 0}, 2000, 0), {1})
                     .node(3, polar({0, 0}, second, 90), {1})
                     .route(2, 1, 1)
                     .route(3, 1, 1)
                     .build("dup", SimTime::ms(200));
        Simulation sim(s, traced());
        inject(sim, 2, SimTime::ms(1), 1, 1, 4242, 2);
        inject(sim, 3, SimTime::ms(1), 1, 1, 4242, 2);
        sim.run();
        const auto arrivals = select(sim.trace(), [](const TraceRecord& r) {
            return r.node == 1 && r.kind == TraceKind::RxFrame && r.frame_kind == FrameKind::Data;
        });
        std::set<int> beams;
        for (const auto& r : arrivals) beams.insert(r.beam);
        const std::string tag = second == 2000.0 ? "concurrent" : "staggered";
        v.check(beams.size() == 2, tag + ": copies arrive on two beams");
        v.check(sim.sink(1).delivered() == 1 && sim.mac(1).counters().duplicates_discarded == 1,
                tag + ": sink receives exactly one copy (" + std::to_string(sim.sink(1).delivered()) + ")");
    }
    return v;
}

struct ScenarioRun {
    StatsReport report;
    std::vector<std::string> conservation;
    std::vector<std::string> sample_conservation;
    std::uint64_t events = 0;
    double wall = 0.0;
};

ScenarioRun run_builtin(const std::string& name, const std::filesystem::path& out,
                        Trace::Callback cb = nullptr) {
    SimOptions o;
    o.trace_callback = std::move(cb);
    const auto t0 = std::chrono::steady_clock::now();
    Simulation sim(*builtin_scenario(name), o);
    sim.run();
    ScenarioRun r;
    r.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.report = sim.report();
    r.conservation = sim.conservation_violations();
    r.events = sim.kernel().dispatched_count();
    for (const auto& s : sim.recorder().samples()) {
        for (const auto& row : s.rows) {
            const auto& c = row.counters;
            if (c.generated + c.received_for_forwarding !=
                c.mac_sent_data + c.dropped_overflow + c.dropped_retry + c.dropped_no_route + row.held) {
                r.sample_conservation.push_back(name + " t=" + fmt(s.at.to_seconds(), 1) + " node " +
                                                std::to_string(row.node));
            }
        }
    }
    export_stats(out, r.report, sim.recorder());
    return r;
}

double from(const NodeSummary& n, Address a, bool total = false) {
    const std::string key = "data_from_" + std::to_string(a);
    for (const auto& m : n.metrics) {
        if (m.name == key) return total ? m.total : m.steady_rate;
    }
    return 0.0;
}

std::map<std::string, ScenarioRun> g_runs;
std::filesystem::path g_out;

const ScenarioRun& scenario_run(const std::string& name, Trace::Callback cb = nullptr) {
    auto it = g_runs.find(name);
    if (it != g_runs.end()) return it->second;
    return g_runs.emplace(name, run_builtin(name, g_out / (name + "_a"), std::move(cb))).first->second;
}

Verdict c10_cpt_star() {
    Verdict v;
    const auto& r = scenario_run("cpt_star");
    const auto& n5 = r.report.node(5);
    v.note("wall " + fmt(r.wall, 2) + " s, " + std::to_string(r.events) + " events");
    v.check(r.wall < 30.0, "wall-clock under 30 s");
    check_band(v, "node 5 RTS/s", n5.rate("rts_sent"), 660);
    check_band(v, "node 5 data sent after concurrent CTS /s", n5.rate("data_tx"), 330);
    check_band(v, "node 5 data sent (acked) /s", n5.rate("mac_sent_data"), 330);
    check_band(v, "node 5 overflow drops /s", n5.rate("dropped_overflow"), 622);
    check_band(v, "node 5 retry drops /s", n5.rate("dropped_retry"), 48);
    const double held_mean = n5.rate("buffer_packets_final");
    v.check(n5.total("buffer_packets_max") == 256 && held_mean >= 0.98 * 256,
            "buffer pinned at 256 (max " + fmt(n5.total("buffer_packets_max"), 0) + ", steady mean " +
                fmt(held_mean, 1) + ")");
    const double s1 = r.report.node(1).total("sink_delivered");
    const double s4 = r.report.node(4).total("sink_delivered");
    v.check(s1 == 0 && s4 == 0, "nodes 1 and 4 never complete a data exchange");
    const double s2 = r.report.node(2).total("sink_delivered");
    const double s3 = r.report.node(3).total("sink_delivered");
    v.check(s2 > 0 && std::abs(s2 - s3) <= 1, "nodes 2 and 3 succeed as a pair (" + fmt(s2, 0) + " / " + fmt(s3, 0) + ")");
    v.check(r.report.node(2).total("cts_sent") > 0 &&
                n5.total("data_tx") <= r.report.node(2).total("cts_sent") + r.report.node(3).total("cts_sent"),
            "every data transmission follows CTS from nodes 2/3");
    return v;
}

Verdict c11_cpr_pairs() {
    Verdict v;
    std::vector<std::set<Address>> volleys;
    SimTime last{};
    const SimTime warm = builtin_scenario("cpr_pairs")->warmup;
    auto cb = [&](const TraceRecord& r) {
        if (r.node != 10 || r.kind != TraceKind::TxFrame || !r.has_frame || r.frame_kind != FrameKind::Cts) return;
        if (r.at < warm) return;
        if (volleys.empty() || r.at != last) volleys.emplace_back();
        last = r.at;
        volleys.back().insert(r.peer);
    };
    g_runs.erase("cpr_pairs");
    const auto& r = scenario_run("cpr_pairs", cb);
    v.note("wall " + fmt(r.wall, 2) + " s, " + std::to_string(r.events) + " events");
    for (NodeId n = 6; n <= 9; ++n) {
        const auto& ns = r.report.node(n);
        check_band(v, "node " + std::to_string(n) + " data sent /s", ns.rate("mac_sent_data"), 85);
        check_band(v, "node " + std::to_string(n) + " overflow drops /s", ns.rate("dropped_overflow"), 165);
        v.check(ns.total("dropped_retry") == 0, "node " + std::to_string(n) + " has no retry-limit drops");
    }
    const std::set<Address> a{6, 9}, b{7, 8};
    std::size_t bad_sets = 0, repeats = 0;
    for (std::size_t i = 0; i < volleys.size(); ++i) {
        if (volleys[i] != a && volleys[i] != b) ++bad_sets;
        if (i > 0 && volleys[i] == volleys[i - 1]) ++repeats;
    }
    v.check(!volleys.empty() && bad_sets == 0, "every CTS volley serves {6,9} or {7,8} (" + std::to_string(bad_sets) +
                                                   " of " + std::to_string(volleys.size()) + " do not)");
    v.check(!volleys.empty() && repeats == 0,
            "strict alternation (" + std::to_string(repeats) + " consecutive repeats)");
    return v;
}

Verdict c12_three_hop() {
    Verdict v;
    const auto& r = scenario_run("three_hop");
    const auto& n5 = r.report.node(5);
    const auto& n10 = r.report.node(10);
    v.note("wall " + fmt(r.wall, 2) + " s, " + std::to_string(r.events) + " events");
    v.check(from(n5, 1, true) == 0 && from(n5, 4, true) == 0,
            "nodes 1 and 4 deliver nothing to node 5 (" + fmt(from(n5, 1, true), 0) + ", " +
                fmt(from(n5, 4, true), 0) + ")");
    check_band(v, "node 5 data from node 2 /s", from(n5, 2), 85);
    check_band(v, "node 5 data from node 3 /s", from(n5, 3), 85);
    check_band(v, "node 10 data via node 7 /s", from(n10, 7), 85);
    check_band(v, "node 10 data via node 8 /s", from(n10, 8), 85);
    v.check(from(n10, 6, true) == 0 && from(n10, 9, true) == 0,
            "nothing reaches node 10 via nodes 6 and 9 (" + fmt(from(n10, 6, true), 0) + ", " +
                fmt(from(n10, 9, true), 0) + ")");
    return v;
}

Verdict c13_cycle_time() {
    Verdict v;
    auto s = TopologyBuilder{}.node(1, {0, 0}, {2}).node(2, {2000, 0}, {1}).route(1, 2, 2).build("cycle",
                                                                                                  SimTime::ms(50));
    Simulation sim(s, traced());
    inject(sim, 1, SimTime::ms(1), 2, 1, 1);
    sim.run();
    auto defer = select(sim.trace(), [](const TraceRecord& r) {
        return r.node == 1 && r.kind == TraceKind::State && r.detail == "DEFER";
    });
    auto ack = select(sim.trace(), [](const TraceRecord& r) {
        return r.node == 1 && r.kind == TraceKind::RxFrame && r.frame_kind == FrameKind::Ack;
    });
    if (defer.empty() || ack.empty()) {
        v.check(false, "exchange did not complete");
        return v;
    }
    const double cycle_ms = (ack[0].at - defer[0].at).to_seconds() * 1e3;
    const MacParams& p = s.mac;
    const double air = [&] {
        double t = 0;
        for (auto k : {FrameKind::Rts, FrameKind::Cts, FrameKind::Data, FrameKind::Ack}) {
            t += static_cast<double>(p.sizes.of(k)) * 8.0 / static_cast<double>(p.data_rate_bps) * 1e3;
        }
        return t;
    }();
    const double prop = 4.0 * 2000.0 / kSpeedOfLight * 1e3;
    const double oracle = (p.difs_us + 16 * p.slot_us + 3 * p.sifs_us) / 1e3 + air + prop;
    v.note("decomposition: DIFS + 16 slots + 3 SIFS + airtimes + 4 propagation = " + fmt(oracle, 4) + " ms");
    // Each propagation delay is rounded to a whole nanosecond.
    v.check(std::abs(cycle_ms - oracle) < 4e-6, "measured cycle matches the decomposition (" + fmt(cycle_ms, 4) + " ms)");
    v.check(within(cycle_ms, 4.67 * 0.9, 4.67 * 1.1), "cycle " + band(cycle_ms, 4.67 * 0.9, 4.67 * 1.1) + " ms");
    v.check(sim.mac(1).counters().retransmissions == 0, "zero retries");
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict c14_determinism() {
    Verdict v;
    for (const auto& name : builtin_scenario_names()) {
        const auto& a = scenario_run(name);
        const auto b = run_builtin(name, g_out / (name + "_b"));
        bool same = true;
        for (const char* f : {"summary.csv", "summary.json", "series.csv"}) {
            const auto x = slurp(g_out / (name + "_a") / f);
            const auto y = slurp(g_out / (name + "_b") / f);
            same = same && !x.empty() && x == y;
        }
        v.check(same, name + ": two runs with seed 1 give byte-identical exports");
        v.check(a.conservation.empty() && b.conservation.empty() && a.sample_conservation.empty() &&
                    b.sample_conservation.empty(),
                name + ": conservation holds for every node at every sample and at the horizon");
        for (const auto& c : a.conservation) v.note(c);
        for (std::size_t i = 0; i < std::min<std::size_t>(3, a.sample_conservation.size()); ++i) {
            v.note(a.sample_conservation[i]);
        }
    }
    return v;
}

struct Criterion {
    int id;
    const char* title;
    Verdict (*fn)();
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    std::string out = (std::filesystem::temp_directory_path() / "mbsim_acceptance").string();
    bool verbose = false;
    app.add_option("--only", only, "Run only these criterion numbers");
    app.add_option("--out", out, "Directory for scenario exports")->capture_default_str();
    app.add_flag("-v,--verbose", verbose, "Print details for passing criteria too");
    CLI11_PARSE(app, argc, argv);
    g_out = out;

    const std::vector<Criterion> all{
        {1, "directivity from HPBW", c1_directivity},
        {2, "link budget and coverage edge", c2_link_budget},
        {3, "antenna to queue mapping", c3_queue_mapping},
        {4, "node-based backoff sequence", c4_backoff_sequence},
        {5, "concurrent reception needs equal arrival", c5_cpr_unit},
        {6, "scheduling packets walkthrough", c6_triad_walkthrough},
        {7, "timeout discipline", c7_timeout_discipline},
        {8, "retransmission flowchart", c8_retransmission},
        {9, "duplicate suppression", c9_duplicates},
        {10, "cpt_star steady state", c10_cpt_star},
        {11, "cpr_pairs steady state", c11_cpr_pairs},
        {12, "three_hop steady state", c12_three_hop},
        {13, "single exchange cycle time", c13_cycle_time},
        {14, "determinism and conservation", c14_determinism},
    };
    int failed = 0;
    int ran = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Verdict v;
        try {
            v = c.fn();
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        ++ran;
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << (c.id < 10 ? " " : "") << c.id << "] " << c.title << '\n';
        if (!v.pass || verbose) {
            for (const auto& n : v.notes) std::cout << "       " << n << '\n';
        }
        std::cout.flush();
    }
    std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
