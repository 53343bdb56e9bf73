#include <benchmark/benchmark.h>

#include "mbsim/antenna.hpp"
#include "mbsim/frame.hpp"
#include "mbsim/kernel.hpp"
#include "mbsim/scenario.hpp"
#include "mbsim/simulation.hpp"

using namespace mbsim;

static void BM_KernelChurn(benchmark::State& state) {
    const auto n = state.range(0);
    for (auto _ : state) {
        Kernel k;
        std::int64_t left = n;
        std::function<void()> tick = [&] {
            if (--left > 0) k.schedule_in(SimTime::us(20), EventKind::MacTimer, {}, tick);
        };
        for (int i = 0; i < 16; ++i) k.schedule(SimTime::us(i), EventKind::MacTimer, {}, tick);
        k.run_until(SimTime::max());
        benchmark::DoNotOptimize(k.dispatched_count());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KernelChurn)->Arg(1 << 14)->Arg(1 << 18);

static void BM_KernelCancel(benchmark::State& state) {
    for (auto _ : state) {
        Kernel k;
        std::vector<EventHandle> hs;
        hs.reserve(4096);
        for (int i = 0; i < 4096; ++i) hs.push_back(k.schedule(SimTime::us(i), EventKind::FrameTimeout, {}, [] {}));
        for (std::size_t i = 0; i < hs.size(); i += 2) k.cancel(hs[i]);
        k.run_until(SimTime::max());
    }
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_KernelCancel);

static void BM_GainLookup(benchmark::State& state) {
    const auto t = GainTable::single_lobe({10, 10}, 45, 25.023, -0.087);
    double az = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(t.lookup(90, az));
        az += 1.7;
    }
}
BENCHMARK(BM_GainLookup);

static void BM_FrameCodec(benchmark::State& state) {
    Frame f;
    f.kind = FrameKind::Data;
    f.size_bytes = 512;
    for (auto _ : state) {
        const auto buf = encode(f);
        std::size_t off = 0;
        benchmark::DoNotOptimize(decode(buf, off));
    }
}
BENCHMARK(BM_FrameCodec);

static void BM_Scenario(benchmark::State& state, const char* name) {
    Scenario s = *builtin_scenario(name);
    s.duration = SimTime::sec(20);
    std::uint64_t events = 0;
    for (auto _ : state) {
        Simulation sim(s);
        sim.run();
        events = sim.kernel().dispatched_count();
    }
    state.counters["events"] = static_cast<double>(events);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events));
}
BENCHMARK_CAPTURE(BM_Scenario, cpt_star, "cpt_star")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Scenario, cpr_pairs, "cpr_pairs")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Scenario, three_hop, "three_hop")->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
