#include "mbsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mbsim {

using json = nlohmann::ordered_json;

namespace {

std::string at_key(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void allow(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) throw ScenarioError(path, "expected an object");
    for (const auto& [k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            throw ScenarioError(at_key(path, k), "unknown key");
        }
    }
}

template <typename T>
T take(const json& j, std::string_view key, const std::string& path, std::optional<T> def = std::nullopt) {
    auto it = j.find(std::string(key));
    if (it == j.end()) {
        if (def) return *def;
        throw ScenarioError(at_key(path, key), "missing required key");
    }
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ScenarioError(at_key(path, key), "expected a boolean");
        } else if constexpr (std::is_arithmetic_v<T>) {
            if (!it->is_number()) throw ScenarioError(at_key(path, key), "expected a number");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_integer() && it->template get<std::int64_t>() < 0) {
                    throw ScenarioError(at_key(path, key), "expected a non-negative integer");
                }
            }
            if constexpr (std::is_integral_v<T>) {
                if (!it->is_number_integer()) throw ScenarioError(at_key(path, key), "expected an integer");
            }
        }
        return it->template get<T>();
    } catch (const json::exception& e) {
        throw ScenarioError(at_key(path, key), e.what());
    }
}

SimTime seconds_field(const json& j, std::string_view key, const std::string& path, SimTime def) {
    auto it = j.find(std::string(key));
    if (it == j.end()) return def;
    const double v = take<double>(j, key, path);
    if (!std::isfinite(v) || v < 0) throw ScenarioError(at_key(path, key), "expected a non-negative time");
    return SimTime::seconds(v);
}

double to_seconds_exact(SimTime t) { return static_cast<double>(t.count()) / 1e9; }

const json& array_field(const json& j, std::string_view key, const std::string& path) {
    auto it = j.find(std::string(key));
    if (it == j.end()) throw ScenarioError(at_key(path, key), "missing required key");
    if (!it->is_array()) throw ScenarioError(at_key(path, key), "expected an array");
    return *it;
}

MacParams parse_mac(const json& j, const std::string& path) {
    allow(j, path,
          {"slot_us", "difs_us", "sifs_us", "aifs_us", "cw_min", "cw_max", "short_retry_limit", "long_retry_limit",
           "data_rate_bps", "rts_bytes", "cts_bytes", "ack_bytes", "data_bytes"});
    MacParams p;
    p.slot_us = take<std::int64_t>(j, "slot_us", path, p.slot_us);
    p.difs_us = take<std::int64_t>(j, "difs_us", path, p.difs_us);
    p.sifs_us = take<std::int64_t>(j, "sifs_us", path, p.sifs_us);
    p.aifs_us = take<std::int64_t>(j, "aifs_us", path, p.aifs_us);
    p.cw_min = take<std::uint32_t>(j, "cw_min", path, p.cw_min);
    p.cw_max = take<std::uint32_t>(j, "cw_max", path, p.cw_max);
    p.short_retry_limit = take<std::uint32_t>(j, "short_retry_limit", path, p.short_retry_limit);
    p.long_retry_limit = take<std::uint32_t>(j, "long_retry_limit", path, p.long_retry_limit);
    p.data_rate_bps = take<std::uint64_t>(j, "data_rate_bps", path, p.data_rate_bps);
    p.sizes.rts_bytes = take<std::uint32_t>(j, "rts_bytes", path, p.sizes.rts_bytes);
    p.sizes.cts_bytes = take<std::uint32_t>(j, "cts_bytes", path, p.sizes.cts_bytes);
    p.sizes.ack_bytes = take<std::uint32_t>(j, "ack_bytes", path, p.sizes.ack_bytes);
    p.sizes.data_bytes = take<std::uint32_t>(j, "data_bytes", path, p.sizes.data_bytes);
    return p;
}

AntennaConfig parse_antenna(const json& j, const std::string& path) {
    allow(j, path, {"hpbw_az_deg", "hpbw_el_deg", "main_lobe_db", "side_lobe_db", "grid_step_deg", "gain_table_file"});
    AntennaConfig a;
    a.hpbw_az_deg = take<double>(j, "hpbw_az_deg", path, a.hpbw_az_deg);
    a.hpbw_el_deg = take<double>(j, "hpbw_el_deg", path, a.hpbw_el_deg);
    a.main_lobe_db = take<double>(j, "main_lobe_db", path, a.main_lobe_db);
    a.side_lobe_db = take<double>(j, "side_lobe_db", path, a.side_lobe_db);
    a.grid_step_deg = take<double>(j, "grid_step_deg", path, a.grid_step_deg);
    a.gain_table_file = take<std::string>(j, "gain_table_file", path, std::string{});
    return a;
}

struct PendingBeams {
    std::size_t node_index;
    std::vector<NodeId> toward;
    std::string path;
};

}  // namespace

const NodeConfig* Scenario::find_node(NodeId id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const NodeConfig& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const NodeConfig& Scenario::node(NodeId id) const {
    const auto* n = find_node(id);
    if (n == nullptr) throw ScenarioError("", "unknown node " + std::to_string(id));
    return *n;
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.name == b.name && a.seed == b.seed && a.duration == b.duration &&
           a.stat_sample_interval == b.stat_sample_interval && a.warmup == b.warmup && a.freq_hz == b.freq_hz &&
           a.max_range_m == b.max_range_m && a.duplicate_memory == b.duplicate_memory &&
           a.role_switch == b.role_switch && a.shared_buffer == b.shared_buffer && a.batch_epsilon == b.batch_epsilon && a.mac == b.mac &&
           a.antenna == b.antenna && a.nodes == b.nodes && a.sources == b.sources && a.routes == b.routes;
}

Scenario load_scenario(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError("", std::string("malformed scenario: ") + e.what());
    }
    const std::string root;
    allow(j, root,
          {"name", "seed", "duration_s", "stat_sample_interval_s", "warmup_s", "freq_hz", "max_range_m",
           "duplicate_memory", "role_switch", "shared_buffer", "batch_epsilon_ns", "mac", "antenna", "nodes", "sources", "routes"});
    Scenario s;
    s.base_dir = base_dir;
    s.name = take<std::string>(j, "name", root, s.name);
    s.seed = take<std::uint64_t>(j, "seed", root, s.seed);
    s.duration = seconds_field(j, "duration_s", root, s.duration);
    s.stat_sample_interval = seconds_field(j, "stat_sample_interval_s", root, s.stat_sample_interval);
    s.warmup = seconds_field(j, "warmup_s", root, s.warmup);
    s.freq_hz = take<double>(j, "freq_hz", root, s.freq_hz);
    s.max_range_m = take<double>(j, "max_range_m", root, s.max_range_m);
    s.duplicate_memory = take<std::size_t>(j, "duplicate_memory", root, s.duplicate_memory);
    s.role_switch = take<bool>(j, "role_switch", root, s.role_switch);
    s.shared_buffer = take<bool>(j, "shared_buffer", root, s.shared_buffer);
    s.batch_epsilon = SimTime::ns(take<std::int64_t>(j, "batch_epsilon_ns", root, std::int64_t{0}));
    if (j.contains("mac")) s.mac = parse_mac(j["mac"], "mac");
    if (j.contains("antenna")) s.antenna = parse_antenna(j["antenna"], "antenna");

    std::vector<PendingBeams> pending;
    const json& nodes = array_field(j, "nodes", root);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        const std::string path = at_index("nodes", i);
        allow(n, path,
              {"id", "address", "x", "y", "bottleneck", "beams_toward", "beams_deg", "tx_power_w", "rx_threshold_dbm",
               "buffer_bytes", "bottleneck_capacity"});
        NodeConfig c;
        c.id = take<NodeId>(n, "id", path);
        c.address = take<Address>(n, "address", path, c.id);
        c.position = Position{take<double>(n, "x", path), take<double>(n, "y", path)};
        c.bottleneck = take<bool>(n, "bottleneck", path, false);
        c.tx_power_w = take<double>(n, "tx_power_w", path, c.tx_power_w);
        c.rx_threshold_dbm = take<double>(n, "rx_threshold_dbm", path, c.rx_threshold_dbm);
        c.buffer_bytes =
            take<std::uint32_t>(n, "buffer_bytes", path, c.bottleneck ? kBottleneckBuffer : kNonBottleneckBuffer);
        const bool has_toward = n.contains("beams_toward");
        const bool has_deg = n.contains("beams_deg");
        if (has_toward == has_deg) {
            throw ScenarioError(path, "exactly one of beams_toward or beams_deg is required");
        }
        if (has_deg) {
            const auto& arr = array_field(n, "beams_deg", path);
            for (std::size_t b = 0; b < arr.size(); ++b) {
                if (!arr[b].is_number()) throw ScenarioError(at_index(path + ".beams_deg", b), "expected a number");
                c.beam_boresights_deg.push_back(arr[b].get<double>());
            }
        } else {
            const auto& arr = array_field(n, "beams_toward", path);
            PendingBeams pb{i, {}, path + ".beams_toward"};
            for (std::size_t b = 0; b < arr.size(); ++b) {
                if (!arr[b].is_number_integer()) {
                    throw ScenarioError(at_index(pb.path, b), "expected a node id");
                }
                pb.toward.push_back(arr[b].get<NodeId>());
            }
            pending.push_back(std::move(pb));
        }
        const std::size_t m = has_deg ? c.beam_boresights_deg.size() : pending.back().toward.size();
        c.bottleneck_capacity = take<std::size_t>(n, "bottleneck_capacity", path,
                                                  c.bottleneck ? std::min<std::size_t>(m, 4) : std::size_t{1});
        s.nodes.push_back(std::move(c));
    }
    for (const auto& pb : pending) {
        auto& c = s.nodes[pb.node_index];
        for (std::size_t b = 0; b < pb.toward.size(); ++b) {
            const auto* other = s.find_node(pb.toward[b]);
            if (other == nullptr) {
                throw ScenarioError(at_index(pb.path, b), "unknown node " + std::to_string(pb.toward[b]));
            }
            try {
                c.beam_boresights_deg.push_back(direction_between(c.position, other->position).azimuth_deg);
            } catch (const std::exception& e) {
                throw ScenarioError(at_index(pb.path, b), e.what());
            }
        }
    }

    if (j.contains("sources")) {
        const json& sources = array_field(j, "sources", root);
        for (std::size_t i = 0; i < sources.size(); ++i) {
            const auto& x = sources[i];
            const std::string path = at_index("sources", i);
            allow(x, path,
                  {"node", "queue", "dest", "packet_bytes", "interarrival_us", "start_s", "stop_s", "jitter_fraction"});
            SourceConfig c;
            c.node = take<NodeId>(x, "node", path);
            c.queue_index = take<std::uint8_t>(x, "queue", path, std::uint8_t{1});
            c.dest = take<NodeId>(x, "dest", path);
            c.packet_bytes = take<std::uint32_t>(x, "packet_bytes", path, c.packet_bytes);
            const double ia = take<double>(x, "interarrival_us", path, 4000.0);
            c.interarrival = SimTime::ns(std::llround(ia * 1000.0));
            c.start_at = seconds_field(x, "start_s", path, SimTime{});
            if (x.contains("stop_s")) c.stop_at = seconds_field(x, "stop_s", path, SimTime{});
            c.jitter_fraction = take<double>(x, "jitter_fraction", path, 0.0);
            s.sources.push_back(c);
        }
    }
    if (j.contains("routes")) {
        const json& routes = array_field(j, "routes", root);
        for (std::size_t i = 0; i < routes.size(); ++i) {
            const auto& x = routes[i];
            const std::string path = at_index("routes", i);
            allow(x, path, {"node", "dest", "next", "origin"});
            try {
                s.routes.set(take<NodeId>(x, "node", path), take<NodeId>(x, "dest", path),
                             take<NodeId>(x, "next", path), take<NodeId>(x, "origin", path, kAnyOrigin));
            } catch (const RoutingError& e) {
                throw ScenarioError(path, e.what());
            }
        }
    }
    validate_scenario(s);
    return s;
}

void validate_scenario(const Scenario& s) {
    const auto& p = s.mac;
    if (p.slot_us <= 0 || p.sifs_us <= 0) throw ScenarioError("mac", "slot and SIFS must be positive");
    if (!(p.sifs_us < p.aifs_us)) throw ScenarioError("mac.aifs_us", "AIFS must exceed SIFS");
    if (!(p.aifs_us < p.difs_us)) throw ScenarioError("mac.aifs_us", "AIFS must be shorter than DIFS");
    if (p.cw_min == 0 || p.cw_min > p.cw_max) throw ScenarioError("mac.cw_min", "need 0 < cw_min <= cw_max");
    if (p.data_rate_bps == 0) throw ScenarioError("mac.data_rate_bps", "must be positive");
    if (p.short_retry_limit == 0 || p.long_retry_limit == 0) throw ScenarioError("mac", "retry limits must be positive");
    if (!(s.freq_hz > 0)) throw ScenarioError("freq_hz", "must be positive");
    if (!(s.max_range_m > 0)) throw ScenarioError("max_range_m", "must be positive");
    if (s.duplicate_memory == 0) throw ScenarioError("duplicate_memory", "must be at least 1");
    if (s.stat_sample_interval <= SimTime{}) throw ScenarioError("stat_sample_interval_s", "must be positive");
    if (s.duration <= SimTime{}) throw ScenarioError("duration_s", "must be positive");
    if (s.batch_epsilon < SimTime{}) throw ScenarioError("batch_epsilon_ns", "must be non-negative");
    try {
        (void)directivity_from_hpbw(Hpbw{s.antenna.hpbw_az_deg, s.antenna.hpbw_el_deg});
    } catch (const std::exception& e) {
        throw ScenarioError("antenna", e.what());
    }
    if (!(s.antenna.grid_step_deg > 0)) throw ScenarioError("antenna.grid_step_deg", "must be positive");

    if (s.nodes.empty()) throw ScenarioError("nodes", "at least one node is required");
    std::set<NodeId> ids;
    std::set<Address> addrs;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const auto& n = s.nodes[i];
        const std::string path = at_index("nodes", i);
        if (!ids.insert(n.id).second) throw ScenarioError(path + ".id", "duplicate node id");
        if (n.address == kNoAddress || !addrs.insert(n.address).second) {
            throw ScenarioError(path + ".address", "duplicate or reserved address");
        }
        if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) {
            throw ScenarioError(path, "position must be finite");
        }
        const std::size_t m = n.beam_boresights_deg.size();
        if (n.bottleneck && (m < 2 || m > 8)) throw ScenarioError(path, "a bottleneck node needs 2..8 beams");
        if (!n.bottleneck && (m < 1 || m > 8)) throw ScenarioError(path, "a node needs 1..8 beams");
        if (!n.bottleneck && n.bottleneck_capacity != 1) {
            throw ScenarioError(path + ".bottleneck_capacity", "non-bottleneck nodes handle one exchange at a time");
        }
        if (n.bottleneck_capacity == 0) throw ScenarioError(path + ".bottleneck_capacity", "must be positive");
        if (!(n.tx_power_w > 0)) throw ScenarioError(path + ".tx_power_w", "must be positive");
        if (n.buffer_bytes == 0) throw ScenarioError(path + ".buffer_bytes", "must be positive");
        std::vector<Beam> beams;
        for (std::size_t b = 0; b < m; ++b) beams.push_back(Beam{b, n.beam_boresights_deg[b], s.antenna.hpbw_az_deg});
        try {
            check_beams_disjoint(beams);
        } catch (const std::exception& e) {
            throw ScenarioError(path, e.what());
        }
    }
    std::set<std::pair<NodeId, std::int64_t>> starts;
    for (std::size_t i = 0; i < s.sources.size(); ++i) {
        const auto& c = s.sources[i];
        const std::string path = at_index("sources", i);
        if (!ids.count(c.node)) throw ScenarioError(path + ".node", "unknown node " + std::to_string(c.node));
        if (!ids.count(c.dest)) throw ScenarioError(path + ".dest", "unknown node " + std::to_string(c.dest));
        if (c.dest == c.node) throw ScenarioError(path + ".dest", "source addressed to itself");
        if (c.queue_index < 1 || c.queue_index > 4) throw ScenarioError(path + ".queue", "must be in 1..4");
        if (c.interarrival <= SimTime{}) throw ScenarioError(path + ".interarrival_us", "must be positive");
        if (c.packet_bytes == 0) throw ScenarioError(path + ".packet_bytes", "must be positive");
        if (c.jitter_fraction < 0 || c.jitter_fraction >= 1) {
            throw ScenarioError(path + ".jitter_fraction", "must be in [0, 1)");
        }
        if (!starts.insert({c.node, c.start_at.count()}).second) {
            throw ScenarioError(path + ".start_s", "co-located sources need distinct start times");
        }
    }
    std::size_t i = 0;
    for (const auto& [key, next] : s.routes.entries()) {
        const std::string path = at_index("routes", i++);
        if (!ids.count(key.node)) throw ScenarioError(path + ".node", "unknown node " + std::to_string(key.node));
        if (!ids.count(key.dest)) throw ScenarioError(path + ".dest", "unknown node " + std::to_string(key.dest));
        if (!ids.count(next)) throw ScenarioError(path + ".next", "unknown node " + std::to_string(next));
        if (key.origin != kAnyOrigin && !ids.count(key.origin)) {
            throw ScenarioError(path + ".origin", "unknown node " + std::to_string(key.origin));
        }
    }
    try {
        s.routes.validate(s.nodes.size());
    } catch (const RoutingError& e) {
        throw ScenarioError("routes", e.what());
    }
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["duration_s"] = to_seconds_exact(s.duration);
    j["stat_sample_interval_s"] = to_seconds_exact(s.stat_sample_interval);
    j["warmup_s"] = to_seconds_exact(s.warmup);
    j["freq_hz"] = s.freq_hz;
    j["max_range_m"] = s.max_range_m;
    j["duplicate_memory"] = s.duplicate_memory;
    j["role_switch"] = s.role_switch;
    j["shared_buffer"] = s.shared_buffer;
    j["batch_epsilon_ns"] = s.batch_epsilon.count();
    const auto& p = s.mac;
    j["mac"] = {{"slot_us", p.slot_us},
                {"difs_us", p.difs_us},
                {"sifs_us", p.sifs_us},
                {"aifs_us", p.aifs_us},
                {"cw_min", p.cw_min},
                {"cw_max", p.cw_max},
                {"short_retry_limit", p.short_retry_limit},
                {"long_retry_limit", p.long_retry_limit},
                {"data_rate_bps", p.data_rate_bps},
                {"rts_bytes", p.sizes.rts_bytes},
                {"cts_bytes", p.sizes.cts_bytes},
                {"ack_bytes", p.sizes.ack_bytes},
                {"data_bytes", p.sizes.data_bytes}};
    json ant = {{"hpbw_az_deg", s.antenna.hpbw_az_deg},
                {"hpbw_el_deg", s.antenna.hpbw_el_deg},
                {"main_lobe_db", s.antenna.main_lobe_db},
                {"side_lobe_db", s.antenna.side_lobe_db},
                {"grid_step_deg", s.antenna.grid_step_deg}};
    if (!s.antenna.gain_table_file.empty()) ant["gain_table_file"] = s.antenna.gain_table_file;
    j["antenna"] = ant;
    j["nodes"] = json::array();
    for (const auto& n : s.nodes) {
        j["nodes"].push_back({{"id", n.id},
                              {"address", n.address},
                              {"x", n.position.x},
                              {"y", n.position.y},
                              {"bottleneck", n.bottleneck},
                              {"beams_deg", n.beam_boresights_deg},
                              {"tx_power_w", n.tx_power_w},
                              {"rx_threshold_dbm", n.rx_threshold_dbm},
                              {"buffer_bytes", n.buffer_bytes},
                              {"bottleneck_capacity", n.bottleneck_capacity}});
    }
    j["sources"] = json::array();
    for (const auto& c : s.sources) {
        json x = {{"node", c.node},
                  {"queue", c.queue_index},
                  {"dest", c.dest},
                  {"packet_bytes", c.packet_bytes},
                  {"interarrival_us", static_cast<double>(c.interarrival.count()) / 1000.0},
                  {"start_s", to_seconds_exact(c.start_at)}};
        if (c.stop_at) x["stop_s"] = to_seconds_exact(*c.stop_at);
        if (c.jitter_fraction != 0.0) x["jitter_fraction"] = c.jitter_fraction;
        j["sources"].push_back(x);
    }
    j["routes"] = json::array();
    for (const auto& [key, next] : s.routes.entries()) {
        json x = {{"node", key.node}, {"dest", key.dest}, {"next", next}};
        if (key.origin != kAnyOrigin) x["origin"] = key.origin;
        j["routes"].push_back(x);
    }
    return j.dump(2) + "\n";
}

Scenario load_scenario_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ScenarioError(file.string(), "cannot open scenario file");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str(), file.parent_path());
}

Scenario resolve_scenario(const std::string& name_or_path) {
    if (auto b = builtin_scenario(name_or_path)) return *b;
    return load_scenario_file(name_or_path);
}

namespace {

Position polar_from(Position origin, double range_m, double azimuth_deg) {
    const double a = azimuth_deg * kPi / 180.0;
    return Position{origin.x + range_m * std::cos(a), origin.y + range_m * std::sin(a)};
}

Scenario star_topology(const std::string& name) {
    Scenario s;
    s.name = name;
    const Position n5{0.0, 0.0};
    const Position n10{4000.0, 0.0};
    std::map<NodeId, Position> pos{
        {1, polar_from(n5, 2500.0, 140.0)},  {2, polar_from(n5, 2000.0, 165.0)},
        {3, polar_from(n5, 2000.0, 195.0)},  {4, polar_from(n5, 2500.0, 220.0)},
        {5, n5},                             {6, polar_from(n10, 2500.0, 140.0)},
        {7, polar_from(n10, 2000.0, 155.0)}, {8, polar_from(n10, 2000.0, 205.0)},
        {9, polar_from(n10, 2500.0, 220.0)}, {10, n10},
    };
    std::map<NodeId, std::vector<NodeId>> toward{
        {1, {5}},    {2, {5}},     {3, {5}},     {4, {5}},
        {5, {1, 2, 3, 4, 6, 7, 8, 9}},           {6, {5, 10}},
        {7, {5, 10}}, {8, {5, 10}}, {9, {5, 10}}, {10, {6, 7, 8, 9}},
    };
    for (NodeId id = 1; id <= 10; ++id) {
        NodeConfig n;
        n.id = id;
        n.address = id;
        n.position = pos[id];
        n.bottleneck = id == 5 || id == 10;
        for (NodeId t : toward[id]) n.beam_boresights_deg.push_back(direction_between(pos[id], pos[t]).azimuth_deg);
        n.buffer_bytes = n.bottleneck ? kBottleneckBuffer : kNonBottleneckBuffer;
        n.bottleneck_capacity = n.bottleneck ? 4 : 1;
        s.nodes.push_back(n);
    }
    return s;
}

SourceConfig cbr(NodeId node, std::uint8_t queue, NodeId dest, std::int64_t stagger_us) {
    SourceConfig c;
    c.node = node;
    c.queue_index = queue;
    c.dest = dest;
    c.start_at = SimTime::sec(10) + SimTime::us(stagger_us);
    return c;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() { return {"cpt_star", "cpr_pairs", "three_hop"}; }

std::optional<Scenario> builtin_scenario(const std::string& name) {
    if (name == "cpt_star") {
        Scenario s = star_topology(name);
        for (NodeId d = 1; d <= 4; ++d) {
            s.sources.push_back(cbr(5, static_cast<std::uint8_t>(d), d, 10 * (d - 1)));
            s.routes.set(5, d, d);
        }
        return s;
    }
    if (name == "cpr_pairs") {
        Scenario s = star_topology(name);
        for (NodeId n = 6; n <= 9; ++n) {
            s.sources.push_back(cbr(n, 1, 10, 0));
            s.routes.set(n, 10, 10);
        }
        return s;
    }
    if (name == "three_hop") {
        Scenario s = star_topology(name);
        for (NodeId n = 1; n <= 4; ++n) {
            s.sources.push_back(cbr(n, 1, 10, 0));
            s.routes.set(n, 10, 5);
            s.routes.set(5, 10, n + 5, n);
            s.routes.set(n + 5, 10, 10);
        }
        return s;
    }
    return std::nullopt;
}

GainTable scenario_gain_table(const Scenario& s, double* table_boresight_deg) {
    if (!s.antenna.gain_table_file.empty()) {
        std::filesystem::path f = s.antenna.gain_table_file;
        if (f.is_relative()) f = s.base_dir / f;
        std::ifstream in(f);
        if (!in) throw ScenarioError("antenna.gain_table_file", "cannot open " + f.string());
        std::stringstream ss;
        ss << in.rdbuf();
        GainTable t = GainTable::from_ascii(ss.str());
        if (table_boresight_deg != nullptr) *table_boresight_deg = t.main_lobe_azimuth();
        return t;
    }
    constexpr double kBoresight = 45.0;
    if (table_boresight_deg != nullptr) *table_boresight_deg = kBoresight;
    return GainTable::single_lobe(Hpbw{s.antenna.hpbw_az_deg, s.antenna.hpbw_el_deg}, kBoresight,
                                  s.antenna.main_lobe_db, s.antenna.side_lobe_db, s.antenna.grid_step_deg);
}

}  // namespace mbsim
