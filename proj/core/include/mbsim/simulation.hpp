#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "mbsim/kernel.hpp"
#include "mbsim/mac.hpp"
#include "mbsim/phy.hpp"
#include "mbsim/scenario.hpp"
#include "mbsim/stats.hpp"
#include "mbsim/trace.hpp"
#include "mbsim/traffic.hpp"

namespace mbsim {

struct SimOptions {
    bool audit = false;  ///< record tx/rx intervals for the half-duplex check
    bool keep_trace = false;
    std::ostream* trace_stream = nullptr;
    Trace::Callback trace_callback;
};

/// One configured run of a scenario.
class Simulation {
public:
    explicit Simulation(Scenario scenario, SimOptions opts = {});
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs to the scenario horizon.
    void run();
    void run_until(SimTime t);

    const Scenario& scenario() const { return scenario_; }
    Kernel& kernel() { return kernel_; }
    Channel& channel() { return *channel_; }
    Trace& trace() { return trace_; }
    Mac& mac(NodeId id);
    const Mac& mac(NodeId id) const;
    Sink& sink(NodeId id);
    const std::vector<NodeId>& node_ids() const { return ids_; }
    const StatsRecorder& recorder() const { return *recorder_; }
    std::vector<TrafficSource*> sources();

    std::vector<NodeRow> rows() const;
    StatsReport report() const;

    /// Violations of generated + forwarded-in = sent + drops + held, per node.
    std::vector<std::string> conservation_violations() const;
    /// Requires SimOptions::audit.
    std::vector<std::string> half_duplex_violations() const;

private:
    Scenario scenario_;
    SimOptions opts_;
    Kernel kernel_;
    Trace trace_;
    Directory dir_;
    std::unique_ptr<Channel> channel_;
    std::vector<NodeId> ids_;
    std::map<NodeId, std::unique_ptr<Mac>> macs_;
    std::map<NodeId, Sink> sinks_;
    TreeIdAllocator tree_ids_;
    std::vector<std::unique_ptr<TrafficSource>> sources_;
    std::unique_ptr<StatsRecorder> recorder_;
    bool started_ = false;
};

}  // namespace mbsim
