#include <benchmark/benchmark.h>

#include "dropletlink/channel_sim.hpp"
#include "dropletlink/device_io.hpp"
#include "dropletlink/inks.hpp"
#include "dropletlink/ook_codec.hpp"
#include "dropletlink/sizing.hpp"
#include "dropletlink/spectral.hpp"

namespace {

using namespace dropletlink;

ChannelConfig bench_config() {
    ChannelConfig cfg;
    cfg.rng_seed = 42;
    return cfg;
}

DropletSchedule sequence_schedule() {
    DropletEvent tpl;
    tpl.length_mm = 5.0;
    tpl.ink = inks::red();
    tpl.concentration = 0.25;
    return ook::encode(ook::bits_from_string("1011110001011001"), 1.0, tpl);
}

void BM_Simulate16Bits(benchmark::State& state) {
    const auto schedule = sequence_schedule();
    const auto cfg = bench_config();
    for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(schedule, cfg));
}
BENCHMARK(BM_Simulate16Bits);

void BM_Decode16Bits(benchmark::State& state) {
    const auto run = sim::simulate(sequence_schedule(), bench_config());
    ook::OokParams params;
    params.n_bits = 16;
    for (auto _ : state) benchmark::DoNotOptimize(ook::decode(run.ir, params));
}
BENCHMARK(BM_Decode16Bits);

void BM_EstimateSize(benchmark::State& state) {
    auto cfg = bench_config();
    DropletSchedule schedule;
    DropletEvent ev;
    ev.length_mm = 3.0;
    ev.ink = inks::blue();
    ev.concentration = 0.25;
    schedule.events.push_back(ev);
    const auto run = sim::simulate(schedule, cfg);
    const auto baseline = spectral::baseline_profile(run.spectral, run.spectral.t0_s,
                                                     run.spectral.t0_s + 0.8);
    for (auto _ : state)
        benchmark::DoNotOptimize(sizing::estimate_size(run.ir, run.spectral, cfg, baseline));
}
BENCHMARK(BM_EstimateSize);

void BM_FrameDecode(benchmark::State& state) {
    std::vector<io::SensorFrame> frames(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < frames.size(); ++i) {
        frames[i].kind = i % 2 ? io::kFrameKindSpectral : io::kFrameKindIr;
        frames[i].timestamp_ms = static_cast<std::uint32_t>(i);
        frames[i].ir_counts = static_cast<std::uint16_t>(i * 131);
    }
    const auto stream = io::encode_frames(frames);
    for (auto _ : state) benchmark::DoNotOptimize(io::decode_frames(stream));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * stream.size()));
}
BENCHMARK(BM_FrameDecode)->Arg(100)->Arg(10000);

void BM_IrCsvRoundTrip(benchmark::State& state) {
    const auto run = sim::simulate(sequence_schedule(), bench_config());
    for (auto _ : state)
        benchmark::DoNotOptimize(io::read_ir_csv(io::write_ir_csv(run.ir)));
}
BENCHMARK(BM_IrCsvRoundTrip);

}  // namespace

BENCHMARK_MAIN();
