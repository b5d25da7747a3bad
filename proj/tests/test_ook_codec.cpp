#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "dropletlink/channel_sim.hpp"
#include "dropletlink/inks.hpp"
#include "dropletlink/ook_codec.hpp"
#include "test_helpers.hpp"

using namespace dropletlink;
using testutil::clean_config;
using testutil::default_config;
using testutil::make_ir_trace;

namespace {

DropletEvent red_droplet(double length_mm = 5.0) {
    DropletEvent ev;
    ev.length_mm = length_mm;
    ev.ink = inks::red();
    ev.concentration = 0.25;
    return ev;
}

/// Reference decoder working directly on samples: sorted-window offset,
/// sample-level up-crossings, duty counted with plain loops. Anchor can be
/// shifted to probe alignment sensitivity.
ook::BitString oracle_decode(const IrTrace& trace, const ook::OokParams& p,
                             std::size_t n_bits, double anchor_shift_s) {
    // offset = median of the leading window, via full sort
    const auto n_window = static_cast<std::size_t>(p.baseline_window_s * trace.sample_rate_hz) + 1;
    std::vector<double> window(trace.samples.begin(), trace.samples.begin() + n_window);
    std::sort(window.begin(), window.end());
    const double offset = window.size() % 2 == 1
                              ? window[window.size() / 2]
                              : (window[window.size() / 2 - 1] + window[window.size() / 2]) / 2.0;

    std::vector<double> s(trace.samples.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = trace.samples[i] - offset;

    std::vector<double> crossings;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i - 1] < p.threshold_v && s[i] >= p.threshold_v)
            crossings.push_back(trace.time_at(i));

    ook::BitString bits;
    if (crossings.empty()) return ook::BitString(n_bits, 0);

    const double guard = p.symbol_period_s / 4.0;
    double start = crossings.front() + anchor_shift_s;
    for (std::size_t k = 0; k < n_bits; ++k) {
        const double end = start + p.symbol_period_s;
        std::size_t above = 0, total = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double t = trace.time_at(i);
            if (t < start || t >= end) continue;
            ++total;
            if (s[i] >= p.threshold_v) ++above;
        }
        bits.push_back(total > 0 &&
                       static_cast<double>(above) / static_cast<double>(total) >=
                           p.duty_fraction);
        // same association rule as the receiver: the first trailing-quarter
        // edge starts the next interval; otherwise the first core edge
        // re-bases it one period later
        double next = end;
        bool have_core = false;
        for (double c : crossings) {
            if (c < start || c >= end) continue;
            if (c >= end - guard) {
                next = c;
                break;
            }
            if (!have_core) {
                have_core = true;
                next = c + p.symbol_period_s;
            }
        }
        start = next;
    }
    return bits;
}

/// Rectangular pulse train built directly from bit/placement lists.
IrTrace synthetic_trace(const ook::BitString& bits, const std::vector<double>& pulse_start,
                        const std::vector<double>& pulse_width, double dc_offset) {
    const double fs = 100.0;
    const double t0 = -1.0;
    const double duration = static_cast<double>(bits.size()) + 2.0 - t0;
    std::vector<double> samples(static_cast<std::size_t>(duration * fs) + 1, dc_offset);
    IrTrace trace = make_ir_trace(std::move(samples), fs, t0);
    std::size_t pulse = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (!bits[k]) continue;
        const double a = pulse_start[pulse];
        const double b = a + pulse_width[pulse];
        ++pulse;
        for (std::size_t i = 0; i < trace.samples.size(); ++i) {
            const double t = trace.time_at(i);
            if (t >= a && t < b) trace.samples[i] = dc_offset + 0.73;
        }
    }
    return trace;
}

}  // namespace

TEST_CASE("encode: all-zero string injects nothing") {
    const auto schedule = ook::encode(ook::bits_from_string("0000"), 1.0, red_droplet());
    CHECK(schedule.events.empty());
}

TEST_CASE("encode: sample sequence events sit at the 1-bit positions") {
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    const auto schedule = ook::encode(bits, 1.0, red_droplet());

    std::vector<double> expected_times;
    for (std::size_t k = 0; k < bits.size(); ++k)
        if (bits[k]) expected_times.push_back(static_cast<double>(k));
    REQUIRE(schedule.events.size() == expected_times.size());
    CHECK(schedule.events.size() == 9);
    for (std::size_t i = 0; i < expected_times.size(); ++i)
        CHECK(schedule.events[i].inject_time_s == expected_times[i]);
}

TEST_CASE("encode: singleton bit at custom period") {
    const auto schedule = ook::encode(ook::bits_from_string("1"), 2.0, red_droplet());
    REQUIRE(schedule.events.size() == 1);
    CHECK(schedule.events[0].inject_time_s == 0.0);
}

TEST_CASE("encode: spaced grouping in bit strings is accepted") {
    CHECK(ook::bits_from_string("10111100 01011001") ==
          ook::bits_from_string(testutil::kSampleSequence));
    CHECK_THROWS_AS(ook::bits_from_string("10x1"), std::invalid_argument);
    CHECK_THROWS_AS(ook::encode({}, 1.0, red_droplet()), std::invalid_argument);
}

TEST_CASE("offset_correct: removes a constant baseline") {
    const auto trace = make_ir_trace(std::vector<double>(200, 0.34));
    const auto [corrected, offset] = ook::offset_correct(trace, 0.5);
    CHECK(offset == doctest::Approx(0.34));
    for (double v : corrected.samples) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("offset_correct: idempotent on a zero baseline") {
    const auto trace = make_ir_trace(std::vector<double>(200, 0.0));
    const auto [corrected, offset] = ook::offset_correct(trace, 0.5);
    CHECK(offset == 0.0);
    CHECK(corrected.samples == trace.samples);
}

TEST_CASE("offset_correct: median shrugs off an outlier in the window") {
    std::vector<double> samples(200, 0.1);
    samples[10] = 4.9;  // spike inside the baseline window
    const auto [corrected, offset] = ook::offset_correct(make_ir_trace(std::move(samples)), 0.5);
    CHECK(offset == doctest::Approx(0.1));
}

TEST_CASE("offset_correct: window below 8 samples is rejected") {
    const auto trace = make_ir_trace(std::vector<double>(200, 0.1));
    CHECK_THROWS_AS(ook::offset_correct(trace, 0.05), WindowTooShortError);
}

TEST_CASE("detect_edges: silence yields no edges") {
    const auto trace = make_ir_trace(std::vector<double>(500, 0.01));
    CHECK(ook::detect_edges(trace, 0.2).empty());
}

TEST_CASE("detect_edges: clean rectangular pulse") {
    std::vector<double> samples(400, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t = i / 100.0;
        if (t >= 1.0 && t < 1.5) samples[i] = 0.73;
    }
    const auto edges = ook::detect_edges(make_ir_trace(std::move(samples)), 0.2);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0].kind == ook::EdgeKind::Rising);
    CHECK(edges[1].kind == ook::EdgeKind::Falling);
    CHECK(std::abs(edges[0].time_s - 1.0) <= 0.01);
    CHECK(std::abs(edges[1].time_s - 1.5) <= 0.01);
}

TEST_CASE("detect_edges: threshold at 10 sigma stays silent on noise") {
    std::size_t clean_runs = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto run = sim::simulate({}, default_config(seed), sim::TimeWindow{0.0, 10.0});
        if (ook::detect_edges(run.ir, 0.2).empty()) ++clean_runs;
    }
    CHECK(clean_runs >= 99);
}

TEST_CASE("detect_edges: output strictly alternates starting with rising") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> level(0.0, 0.5);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<double> samples(300);
        for (double& v : samples) v = level(rng);
        const auto edges = ook::detect_edges(make_ir_trace(std::move(samples)), 0.25);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto expected = i % 2 == 0 ? ook::EdgeKind::Rising : ook::EdgeKind::Falling;
            CHECK(edges[i].kind == expected);
            if (i > 0) CHECK(edges[i].time_s > edges[i - 1].time_s);
        }
    }
}

TEST_CASE("decode: sample sequence round trip at defaults") {
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    const auto schedule = ook::encode(bits, 1.0, red_droplet());
    const auto run = sim::simulate(schedule, default_config(42));
    ook::OokParams params;
    params.n_bits = bits.size();
    const auto report = ook::decode(run.ir, params);
    CHECK(report.bits == bits);
    CHECK(report.offset_v == doctest::Approx(0.0).scale(1.0).epsilon(0.02));
    REQUIRE(report.duty_per_symbol.size() == report.bits.size());
    for (std::size_t k = 0; k < report.bits.size(); ++k)
        CHECK(report.bits[k] == (report.duty_per_symbol[k] >= params.duty_fraction ? 1 : 0));
}

TEST_CASE("decode: all-zero trace with expected count") {
    const auto trace = make_ir_trace(std::vector<double>(1200, 0.0));
    ook::OokParams params;
    params.n_bits = 8;
    const auto report = ook::decode(trace, params);
    CHECK(report.bits == ook::bits_from_string("00000000"));
}

TEST_CASE("decode: all-zero trace without expected count raises NoSignal") {
    const auto trace = make_ir_trace(std::vector<double>(1200, 0.0));
    CHECK_THROWS_AS(ook::decode(trace, ook::OokParams{}), NoSignalError);
}

TEST_CASE("decode: duty rule splits at 30% of the interval") {
    for (const auto& [plateau, expected] : {std::pair{0.4, 1}, std::pair{0.2, 0}}) {
        const auto trace = synthetic_trace({1}, {0.0}, {plateau}, 0.0);
        ook::OokParams params;
        params.n_bits = 1;
        const auto report = ook::decode(trace, params);
        CHECK(report.bits[0] == expected);
    }
}

TEST_CASE("decode: round trip property over random strings and seeds") {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> len_dist(1, 64);
    std::uniform_int_distribution<int> bit_dist(0, 1);
    for (int iter = 0; iter < 120; ++iter) {
        ook::BitString bits(len_dist(rng));
        for (auto& b : bits) b = bit_dist(rng);
        // Leading zeros are not recoverable: the frame starts at the first
        // droplet. Keep all-zero strings as-is, otherwise anchor on bit 0.
        if (std::count(bits.begin(), bits.end(), 1) > 0) bits[0] = 1;

        auto cfg = default_config(1000 + iter);
        const auto schedule = ook::encode(bits, 1.0, red_droplet());
        ook::OokParams params;
        params.n_bits = bits.size();
        if (schedule.events.empty()) {
            const auto trace = make_ir_trace(std::vector<double>(
                static_cast<std::size_t>(bits.size() * 100 + 200), 0.0));
            CHECK(ook::decode(trace, params).bits == bits);
            continue;
        }
        const auto run = sim::simulate(schedule, cfg);
        const auto report = ook::decode(run.ir, params);
        CHECK(report.bits == bits);
    }
}

TEST_CASE("decode: thresholds from 0.1 to 0.4 V all succeed on the clean case") {
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    const auto schedule = ook::encode(bits, 1.0, red_droplet());
    const auto run = sim::simulate(schedule, clean_config());
    for (double threshold : {0.1, 0.2, 0.3, 0.4}) {
        ook::OokParams params;
        params.threshold_v = threshold;
        params.n_bits = bits.size();
        CHECK(ook::decode(run.ir, params).bits == bits);
    }
}

TEST_CASE("decode: resynchronization absorbs a persistent slowdown") {
    // Droplets 8..9 (of 9) arrive 0.35 s late, as if the flow slowed for
    // good. The resynchronizing decoder still reads the sent bits; the
    // frozen-interval variant mis-times every interval after the step.
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    auto schedule = ook::encode(bits, 1.0, red_droplet());
    REQUIRE(schedule.events.size() == 9);
    for (std::size_t i = 7; i < schedule.events.size(); ++i)
        schedule.events[i].inject_time_s += 0.35;

    const auto run = sim::simulate(schedule, clean_config());
    ook::OokParams params;
    params.n_bits = bits.size();

    const auto resynced = ook::decode(run.ir, params);
    CHECK(resynced.bits == bits);

    const auto frozen = ook::decode_without_resync(run.ir, params);
    REQUIRE(frozen.symbol_intervals.size() == resynced.symbol_intervals.size());
    double worst_interval_shift = 0.0;
    for (std::size_t k = 0; k < frozen.symbol_intervals.size(); ++k)
        worst_interval_shift =
            std::max(worst_interval_shift, std::abs(frozen.symbol_intervals[k].start_s -
                                                    resynced.symbol_intervals[k].start_s));
    CHECK(worst_interval_shift > 0.2);
}

TEST_CASE("decode: cumulative drift defeats the frozen decoder only") {
    const auto bits = ook::bits_from_string(testutil::kSampleSequence);
    DropletSchedule schedule;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (!bits[k]) continue;
        auto ev = red_droplet();
        ev.inject_time_s = static_cast<double>(k) * 1.15;  // 15% slow symbol clock
        schedule.events.push_back(ev);
    }
    const auto run = sim::simulate(schedule, clean_config());
    ook::OokParams params;
    params.n_bits = bits.size();

    CHECK(ook::decode(run.ir, params).bits == bits);
    const auto frozen = ook::decode_without_resync(run.ir, params);
    CHECK(ook::bit_error_rate(bits, frozen.bits) > 0.0);
}

TEST_CASE("decode: agrees with the brute-force oracle on short traces") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> len_dist(1, 4);
    std::uniform_int_distribution<int> bit_dist(0, 1);
    std::uniform_real_distribution<double> width_dist(0.35, 0.9);
    std::uniform_real_distribution<double> place_dist(-0.08, 0.08);
    std::uniform_real_distribution<double> offset_dist(0.0, 0.5);

    for (int iter = 0; iter < 200; ++iter) {
        ook::BitString bits(len_dist(rng));
        for (auto& b : bits) b = bit_dist(rng);
        if (std::count(bits.begin(), bits.end(), 1) > 0) bits[0] = 1;

        std::vector<double> starts, widths;
        for (std::size_t k = 0; k < bits.size(); ++k) {
            if (!bits[k]) continue;
            const double w = width_dist(rng);
            // keep duties clear of the 30% decision boundary
            starts.push_back(static_cast<double>(k) + (k == 0 ? 0.0 : place_dist(rng)));
            widths.push_back(std::min(w, 0.9));
        }
        const auto trace = synthetic_trace(bits, starts, widths, offset_dist(rng));

        ook::OokParams params;
        params.n_bits = bits.size();
        const auto decoded = ook::decode(trace, params).bits;
        // every admissible alignment: the oracle anchored at the crossing
        // sample and one sample to either side must all agree
        for (double shift : {-0.01, 0.0, 0.01}) {
            const auto expected = oracle_decode(trace, params, bits.size(), shift);
            CHECK(decoded == expected);
        }
    }
}

TEST_CASE("bit_error_rate basics") {
    const auto a = ook::bits_from_string("1011110001011001");
    CHECK(ook::bit_error_rate(a, a) == 0.0);
    CHECK(ook::bit_error_rate(ook::bits_from_string("1111"),
                              ook::bits_from_string("0000")) == 1.0);
    CHECK(ook::bit_error_rate(ook::bits_from_string("10"),
                              ook::bits_from_string("11")) == 0.5);
    CHECK_THROWS_AS(ook::bit_error_rate(ook::bits_from_string("10"),
                                        ook::bits_from_string("101")),
                    LengthMismatchError);
}
