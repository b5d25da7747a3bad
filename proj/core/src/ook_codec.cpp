#include "dropletlink/ook_codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dropletlink::ook {

namespace {

constexpr double kTimeEps = 1e-12;

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), mid);
    return (lo + hi) / 2.0;
}

struct IntervalDecision {
    SymbolInterval interval;
    double duty;
    std::optional<double> first_rising_s;
};

/// Duty = fraction of samples at or above threshold within [start, end),
/// interval boundaries mapped to the nearest sample.
double duty_over(const IrTrace& trace, double start_s, double end_s, double threshold_v) {
    const double fs = trace.sample_rate_hz;
    auto clamp_idx = [&](long long i) {
        return static_cast<std::size_t>(
            std::clamp<long long>(i, 0, static_cast<long long>(trace.samples.size())));
    };
    const std::size_t begin = clamp_idx(std::llround((start_s - trace.t0_s) * fs));
    const std::size_t end = clamp_idx(std::llround((end_s - trace.t0_s) * fs));
    if (end <= begin) return 0.0;
    std::size_t above = 0;
    for (std::size_t i = begin; i < end; ++i)
        if (trace.samples[i] >= threshold_v) ++above;
    return static_cast<double>(above) / static_cast<double>(end - begin);
}

DecodeReport decode_impl(const IrTrace& trace, const OokParams& params, bool resync) {
    if (params.threshold_v <= 0.0)
        throw std::invalid_argument("OokParams: threshold_v must be > 0");
    if (params.duty_fraction <= 0.0 || params.duty_fraction >= 1.0)
        throw std::invalid_argument("OokParams: duty_fraction must be in (0, 1)");
    if (params.symbol_period_s <= 0.0)
        throw std::invalid_argument("OokParams: symbol_period_s must be > 0");
    if (trace.samples.empty())
        throw std::invalid_argument("decode: empty trace");

    DecodeReport report;
    auto [corrected, offset] = offset_correct(trace, params.baseline_window_s);
    report.offset_v = offset;
    report.edges = detect_edges(corrected, params.threshold_v);

    std::vector<double> rising;
    for (const auto& e : report.edges)
        if (e.kind == EdgeKind::Rising) rising.push_back(e.time_s);

    double anchor;
    if (!rising.empty()) {
        anchor = rising.front();
    } else if (params.n_bits) {
        anchor = corrected.t0_s;  // no signal; intervals tile from the trace start
    } else {
        throw NoSignalError("decode: no rising edge found and no expected bit count given");
    }

    const double T = params.symbol_period_s;
    // An edge in the trailing quarter of an interval is the next symbol's
    // droplet arriving early; it anchors the next interval directly instead
    // of re-basing through this one. Without the guard, an on-time droplet
    // following a resync sits exactly on the boundary and timing noise
    // decides which interval claims it.
    const double guard = T / 4.0;
    const double trace_end = corrected.end_time_s();
    double start = anchor;
    while (true) {
        if (params.n_bits) {
            if (report.bits.size() >= *params.n_bits) break;
        } else if (start + T > trace_end + kTimeEps) {
            break;  // last complete interval emitted
        }
        const double end = start + T;
        std::optional<double> own_edge, early_next_edge;
        for (auto it = std::lower_bound(rising.begin(), rising.end(), start - kTimeEps);
             it != rising.end() && *it < end - kTimeEps; ++it) {
            if (*it < end - guard - kTimeEps) {
                if (!own_edge) own_edge = *it;
            } else {
                early_next_edge = *it;
                break;
            }
        }

        const double duty = duty_over(corrected, start, end, params.threshold_v);
        report.bits.push_back(duty >= params.duty_fraction ? 1 : 0);
        report.duty_per_symbol.push_back(duty);
        report.symbol_intervals.push_back({start, end});

        if (!resync) {
            start = end;
        } else if (early_next_edge) {
            start = *early_next_edge;
        } else if (own_edge) {
            start = *own_edge + T;
        } else {
            start = end;
        }
    }
    return report;
}

}  // namespace

DropletSchedule encode(const BitString& bits, double symbol_period_s,
                       const DropletEvent& droplet_template) {
    if (bits.empty()) throw std::invalid_argument("encode: empty bit string");
    if (symbol_period_s <= 0.0)
        throw std::invalid_argument("encode: symbol_period_s must be > 0");
    DropletSchedule schedule;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == 0) continue;
        DropletEvent ev = droplet_template;
        ev.inject_time_s = static_cast<double>(k) * symbol_period_s;
        schedule.events.push_back(std::move(ev));
    }
    return schedule;
}

std::pair<IrTrace, double> offset_correct(const IrTrace& trace, double baseline_window_s) {
    const auto n_window = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(trace.samples.size()),
                         std::floor(baseline_window_s * trace.sample_rate_hz) + 1));
    if (n_window < 8)
        throw WindowTooShortError("offset_correct: baseline window holds " +
                                  std::to_string(n_window) + " samples, need at least 8");
    const double offset = median({trace.samples.begin(),
                                  trace.samples.begin() + static_cast<std::ptrdiff_t>(n_window)});
    IrTrace out = trace;
    for (double& v : out.samples) v -= offset;
    return {std::move(out), offset};
}

std::vector<Edge> detect_edges(const IrTrace& trace, double threshold_v) {
    std::vector<Edge> edges;
    const double dt = 1.0 / trace.sample_rate_hz;
    bool above = !trace.samples.empty() && trace.samples.front() >= threshold_v;
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        const double v0 = trace.samples[i - 1];
        const double v1 = trace.samples[i];
        const bool now_above = v1 >= threshold_v;
        if (now_above == above) continue;
        const double frac = (threshold_v - v0) / (v1 - v0);
        const double t = trace.time_at(i - 1) + frac * dt;
        edges.push_back({t, now_above ? EdgeKind::Rising : EdgeKind::Falling});
        above = now_above;
    }
    if (!edges.empty() && edges.front().kind == EdgeKind::Falling)
        edges.erase(edges.begin());
    return edges;
}

DecodeReport decode(const IrTrace& trace, const OokParams& params) {
    return decode_impl(trace, params, true);
}

DecodeReport decode_without_resync(const IrTrace& trace, const OokParams& params) {
    return decode_impl(trace, params, false);
}

double bit_error_rate(const BitString& sent, const BitString& received) {
    if (sent.size() != received.size())
        throw LengthMismatchError("bit_error_rate: lengths differ (" +
                                  std::to_string(sent.size()) + " vs " +
                                  std::to_string(received.size()) + ")");
    if (sent.empty()) throw std::invalid_argument("bit_error_rate: empty bit strings");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < sent.size(); ++i)
        if ((sent[i] != 0) != (received[i] != 0)) ++errors;
    return static_cast<double>(errors) / static_cast<double>(sent.size());
}

BitString bits_from_string(const std::string& s) {
    BitString bits;
    bits.reserve(s.size());
    for (char c : s) {
        if (c == ' ' || c == '_') continue;  // allow grouped notation
        if (c != '0' && c != '1')
            throw std::invalid_argument("bits_from_string: invalid character '" +
                                        std::string(1, c) + "'");
        bits.push_back(c == '1' ? 1 : 0);
    }
    return bits;
}

std::string bits_to_string(const BitString& bits) {
    std::string s;
    s.reserve(bits.size());
    for (int b : bits) s.push_back(b ? '1' : '0');
    return s;
}

}  // namespace dropletlink::ook
