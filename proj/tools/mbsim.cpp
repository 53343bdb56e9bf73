#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "mbsim/antenna.hpp"
#include "mbsim/scenario.hpp"
#include "mbsim/simulation.hpp"

namespace {

int cmd_run(const std::string& scenario_name, std::optional<std::uint64_t> seed, std::optional<double> duration,
            const std::string& out_dir, bool with_trace) {
    mbsim::Scenario s = mbsim::resolve_scenario(scenario_name);
    if (seed) s.seed = *seed;
    if (duration) s.duration = mbsim::SimTime::seconds(*duration);
    mbsim::validate_scenario(s);

    std::unique_ptr<std::ofstream> trace_file;
    mbsim::SimOptions opts;
    if (with_trace) {
        std::filesystem::create_directories(out_dir);
        trace_file = std::make_unique<std::ofstream>(std::filesystem::path(out_dir) / "trace.log");
        if (!*trace_file) throw std::runtime_error("cannot write trace file in " + out_dir);
        opts.trace_stream = trace_file.get();
    }
    const auto t0 = std::chrono::steady_clock::now();
    mbsim::Simulation sim(s, opts);
    sim.run();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto report = sim.report();
    mbsim::export_stats(out_dir, report, sim.recorder());

    std::cout << "scenario " << s.name << " seed " << s.seed << " horizon " << s.duration.to_seconds() << " s, "
              << sim.kernel().dispatched_count() << " events, " << std::fixed << std::setprecision(2) << wall
              << " s wall\n";
    std::cout << "steady-state rates per second (warm-up " << s.warmup.to_seconds() << " s excluded)\n";
    std::cout << std::setw(5) << "node" << std::setw(11) << "generated" << std::setw(10) << "sent" << std::setw(11)
              << "overflow" << std::setw(9) << "retry" << std::setw(9) << "rts" << std::setw(9) << "sch"
              << std::setw(9) << "ctrl_rx" << std::setw(9) << "sink" << std::setw(9) << "buffer\n";
    for (const auto& n : report.nodes) {
        std::cout << std::setw(5) << n.node << std::setw(11) << n.rate("generated") << std::setw(10)
                  << n.rate("mac_sent_data") << std::setw(11) << n.rate("dropped_overflow") << std::setw(9)
                  << n.rate("dropped_retry") << std::setw(9) << n.rate("rts_sent") << std::setw(9)
                  << n.rate("sch_sent") << std::setw(9) << n.rate("control_received") << std::setw(9)
                  << n.rate("sink_delivered") << std::setw(9) << n.total("buffer_packets_final") << '\n';
    }
    const auto bad = sim.conservation_violations();
    for (const auto& v : bad) std::cerr << "conservation violated: " << v << '\n';
    std::cout << "wrote " << out_dir << "/summary.csv, summary.json, series.csv\n";
    return bad.empty() ? 0 : 1;
}

int cmd_gain_table(double az, double el, double main_db, double side_db, double boresight, const std::string& out) {
    const auto t = mbsim::GainTable::single_lobe(mbsim::Hpbw{az, el}, boresight, main_db, side_db);
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << t.to_ascii();
    const double d = mbsim::directivity_from_hpbw(mbsim::Hpbw{az, el});
    std::cout << "directivity " << d << " (" << std::fixed << std::setprecision(2) << mbsim::to_db(d)
              << " dB); wrote " << out << '\n';
    return 0;
}

int cmd_link_budget(double pt, double gt, double gr, double freq, double range, double threshold) {
    const double pr = mbsim::friis_received_power_dbm(pt, gt, gr, freq, range);
    std::cout << std::fixed << std::setprecision(3) << "Pr = " << pr << " dBm at " << range << " m ("
              << (pr >= threshold ? "above" : "below") << " the " << threshold << " dBm threshold)\n";
    return 0;
}

int cmd_validate(const std::string& name) {
    const auto s = mbsim::resolve_scenario(name);
    mbsim::validate_scenario(s);
    std::cout << "ok: " << s.name << ", " << s.nodes.size() << " nodes, " << s.sources.size() << " sources, "
              << s.routes.entries().size() << " routes\n";
    return 0;
}

int cmd_dump(const std::string& name, const std::string& out) {
    const auto text = mbsim::serialize_scenario(mbsim::resolve_scenario(name));
    if (out.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-beam directional CSMA/CA MAC simulator"};
    app.require_subcommand(1);

    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    std::string out_dir = "out";
    bool trace = false;
    auto* run = app.add_subcommand("run", "Run a scenario file or builtin (cpt_star, cpr_pairs, three_hop)");
    run->add_option("--scenario", scenario, "Scenario file or builtin name")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--duration", duration, "Override the horizon in seconds")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_flag("--trace", trace, "Write trace.log to the output directory");

    double az = 10, el = 10, main_db = 25.023, side_db = -0.087, boresight = 45;
    std::string table_out;
    auto* gt = app.add_subcommand("gain-table", "Emit a single-lobe gain table");
    gt->add_option("--hpbw-az", az, "Azimuth HPBW, degrees")->required()->check(CLI::Range(0.0, 360.0));
    gt->add_option("--hpbw-el", el, "Elevation HPBW, degrees")->required()->check(CLI::Range(0.0, 360.0));
    gt->add_option("--main-db", main_db, "Main-lobe cell value")->capture_default_str();
    gt->add_option("--side-db", side_db, "Floor cell value")->capture_default_str();
    gt->add_option("--boresight", boresight, "Main-lobe azimuth, degrees")->capture_default_str();
    gt->add_option("--out", table_out, "Output file")->required();

    double pt = 2.3e-5, g_t = 25.023, g_r = 25.023, freq = 2.437e9, range = 3000, threshold = -76;
    auto* lb = app.add_subcommand("link-budget", "Free-space received power");
    lb->add_option("--pt", pt, "Transmit power, W")->capture_default_str();
    lb->add_option("--gt", g_t, "Transmit gain, dB")->capture_default_str();
    lb->add_option("--gr", g_r, "Receive gain, dB")->capture_default_str();
    lb->add_option("--freq", freq, "Carrier frequency, Hz")->capture_default_str();
    lb->add_option("--range", range, "Distance, m")->capture_default_str();
    lb->add_option("--threshold", threshold, "Reception threshold, dBm")->capture_default_str();

    std::string validate_file;
    auto* va = app.add_subcommand("validate", "Load and validate a scenario file or builtin");
    va->add_option("--scenario", validate_file, "Scenario file or builtin name")->required();

    std::string dump_name, dump_out;
    auto* du = app.add_subcommand("dump", "Print a scenario as JSON");
    du->add_option("--scenario", dump_name, "Scenario file or builtin name")->required();
    du->add_option("--out", dump_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(scenario, seed, duration, out_dir, trace);
        if (*gt) return cmd_gain_table(az, el, main_db, side_db, boresight, table_out);
        if (*lb) return cmd_link_budget(pt, g_t, g_r, freq, range, threshold);
        if (*va) return cmd_validate(validate_file);
        if (*du) return cmd_dump(dump_name, dump_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
