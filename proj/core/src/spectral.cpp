#include "dropletlink/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dropletlink::spectral {

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), mid);
    return (lo + hi) / 2.0;
}

double mean_normalized(const SpectralSample& s, const ChannelVector& baseline) {
    double acc = 0.0;
    for (std::size_t c = 0; c < baseline.size(); ++c) acc += s.channels[c] / baseline[c];
    return acc / static_cast<double>(baseline.size());
}

void require_positive_baseline(const ChannelVector& baseline) {
    for (std::size_t c = 0; c < baseline.size(); ++c)
        if (baseline[c] <= 0.0)
            throw ZeroBaselineError("spectral channel " + std::to_string(c) +
                                    " has a non-positive baseline; cannot normalize");
}

double distance_clamped(const ColourSignature& a, const ColourSignature& b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.normalized.size(); ++c) {
        const double d = std::clamp(a.normalized[c], 0.0, 1.0) -
                         std::clamp(b.normalized[c], 0.0, 1.0);
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

ChannelVector baseline_profile(const SpectralTrace& trace, double window_start_s,
                               double window_end_s) {
    if (window_end_s <= window_start_s)
        throw std::invalid_argument("baseline_profile: empty time window");
    std::array<std::vector<double>, 6> per_channel;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const double t = trace.time_at(i);
        if (t < window_start_s || t > window_end_s) continue;
        for (std::size_t c = 0; c < per_channel.size(); ++c)
            per_channel[c].push_back(trace.samples[i].channels[c]);
    }
    if (per_channel[0].empty())
        throw std::invalid_argument("baseline_profile: window contains no samples");
    ChannelVector out{};
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = median_inplace(per_channel[c]);
    for (std::size_t c = 0; c < out.size(); ++c)
        if (out[c] <= 0.0)
            throw ZeroBaselineError("spectral channel " + std::to_string(c) +
                                    " reads zero without droplets (dark sensor or LED off)");
    return out;
}

ColourSignature normalize(const SpectralSample& sample, const ChannelVector& baseline) {
    require_positive_baseline(baseline);
    ColourSignature sig;
    for (std::size_t c = 0; c < baseline.size(); ++c)
        sig.normalized[c] = sample.channels[c] / baseline[c];
    return sig;
}

std::vector<SampleWindow> segment_droplets(const SpectralTrace& trace,
                                           const ChannelVector& baseline,
                                           double depth_threshold) {
    require_positive_baseline(baseline);
    if (depth_threshold <= 0.0 || depth_threshold >= 1.0)
        throw std::invalid_argument("segment_droplets: depth_threshold must be in (0, 1)");
    std::vector<SampleWindow> windows;
    bool inside = false;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const bool notch = mean_normalized(trace.samples[i], baseline) <= depth_threshold;
        if (notch && !inside) {
            inside = true;
            begin = i;
        } else if (!notch && inside) {
            inside = false;
            windows.push_back({begin, i});
        }
    }
    if (inside) windows.push_back({begin, trace.samples.size()});
    return windows;
}

ColourSignature droplet_signature(const SpectralTrace& trace, SampleWindow window,
                                  const ChannelVector& baseline) {
    require_positive_baseline(baseline);
    if (window.begin >= window.end || window.end > trace.samples.size())
        throw EmptyWindowError("droplet_signature: empty or out-of-range window");
    ColourSignature sig;
    sig.normalized.fill(std::numeric_limits<double>::infinity());
    for (std::size_t i = window.begin; i < window.end; ++i)
        for (std::size_t c = 0; c < baseline.size(); ++c)
            sig.normalized[c] =
                std::min(sig.normalized[c], trace.samples[i].channels[c] / baseline[c]);
    return sig;
}

ColourCall classify(const ColourSignature& sig, const ReferenceLibrary& lib) {
    if (lib.entries.empty())
        throw EmptyLibraryError("classify: reference library is empty");
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    const ReferenceEntry* winner = nullptr;
    for (const auto& entry : lib.entries) {
        const double d = distance_clamped(sig, entry.signature);
        if (d < best) {
            second = best;
            best = d;
            winner = &entry;
        } else if (d < second) {
            second = d;
        }
    }
    ColourCall call;
    call.label = winner->label;
    call.distance = best;
    call.margin = std::isinf(second) ? second : second - best;
    return call;
}

double estimate_concentration(const ColourSignature& sig, const InkSpec& ink,
                              double path_length_mm) {
    if (path_length_mm <= 0.0)
        throw std::invalid_argument("estimate_concentration: path_length_mm must be > 0");
    // c = sum(a_i L y_i) / sum((a_i L)^2) with y_i = -ln(sig_i), sig clamped
    // to at most 1 so noisy above-baseline channels count as zero absorption.
    double num = 0.0, den = 0.0;
    bool any_usable = false;
    for (std::size_t c = 0; c < sig.normalized.size(); ++c) {
        const double a = ink.absorption_coeffs[c] * path_length_mm;
        if (a <= 0.0) continue;
        const double s = std::min(sig.normalized[c], 1.0);
        if (s <= 0.0) continue;  // saturated channel carries no usable depth
        any_usable = true;
        num += a * (-std::log(s));
        den += a * a;
    }
    if (!any_usable || den <= 0.0)
        throw UnidentifiableError(
            "estimate_concentration: every usable channel is saturated or the ink has no "
            "positive absorption coefficient");
    return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace dropletlink::spectral
