#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbsim/antenna.hpp"
#include "mbsim/frame.hpp"
#include "mbsim/kernel.hpp"
#include "mbsim/traffic.hpp"

namespace mbsim {

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

struct AntennaConfig {
    double hpbw_az_deg = 10.0;
    double hpbw_el_deg = 10.0;
    double main_lobe_db = 25.023;
    double side_lobe_db = -0.087;
    double grid_step_deg = 5.0;
    std::string gain_table_file;  ///< optional, relative to the scenario file

    friend bool operator==(const AntennaConfig&, const AntennaConfig&) = default;
};

struct NodeConfig {
    NodeId id = 0;
    Address address = 0;
    Position position;
    bool bottleneck = false;
    std::vector<double> beam_boresights_deg;
    double tx_power_w = 2.3e-5;
    double rx_threshold_dbm = -76.0;
    std::uint32_t buffer_bytes = 32 * 1024;
    std::size_t bottleneck_capacity = 1;

    friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

struct Scenario {
    std::string name = "unnamed";
    std::uint64_t seed = 1;
    SimTime duration = SimTime::sec(180);
    SimTime stat_sample_interval = SimTime::sec(1);
    SimTime warmup = SimTime::sec(10);
    double freq_hz = 2.437e9;
    double max_range_m = 3000.0;
    std::size_t duplicate_memory = 1;
    bool role_switch = true;
    bool shared_buffer = false;
    SimTime batch_epsilon;
    MacParams mac;
    AntennaConfig antenna;
    std::vector<NodeConfig> nodes;
    std::vector<SourceConfig> sources;
    RouteTable routes;
    std::filesystem::path base_dir;  ///< not serialized

    const NodeConfig& node(NodeId id) const;
    const NodeConfig* find_node(NodeId id) const;

    friend bool operator==(const Scenario& a, const Scenario& b);
};

inline constexpr std::uint32_t kNonBottleneckBuffer = 32 * 1024;
inline constexpr std::uint32_t kBottleneckBuffer = 128 * 1024;

/// Parses and validates JSON scenario text. `base_dir` anchors relative file
/// references.
Scenario load_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& file);
/// Builtin name or path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

std::string serialize_scenario(const Scenario& s);
/// Throws ScenarioError on the first violated constraint.
void validate_scenario(const Scenario& s);

std::vector<std::string> builtin_scenario_names();
std::optional<Scenario> builtin_scenario(const std::string& name);

GainTable scenario_gain_table(const Scenario& s, double* table_boresight_deg);

}  // namespace mbsim
