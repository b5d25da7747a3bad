/**
 * Colour pipeline for the six-channel spectral sensor: baseline
 * normalization (ratio to the profile recorded without droplets), notch
 * segmentation, signature extraction, nearest-reference classification and
 * Beer-Lambert concentration inversion.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dropletlink/errors.hpp"
#include "dropletlink/types.hpp"

namespace dropletlink::spectral {

/// Six-channel attenuation signature of one droplet, as ratios to the
/// no-droplet baseline. Entries may slightly exceed 1 under noise; they are
/// clamped to [0, 1] for classification but kept raw here for diagnostics.
struct ColourSignature {
    ChannelVector normalized{};
};

struct ReferenceEntry {
    std::string label;
    ColourSignature signature;
};

/// Calibrated ink signatures. Labels must be unique; classification needs at
/// least two entries to be meaningful (one still classifies, with infinite
/// margin).
struct ReferenceLibrary {
    std::vector<ReferenceEntry> entries;
};

struct ColourCall {
    std::string label;
    double distance = 0.0;  ///< to the nearest reference
    double margin = 0.0;    ///< gap to the second-nearest reference
};

/// Half-open sample index range into a SpectralTrace.
struct SampleWindow {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
};

/// Per-channel median over [window_start_s, window_end_s]. The window must
/// contain no droplet (caller contract; a droplet biases the result and is
/// not detected here). Throws ZeroBaselineError if any channel's median is
/// zero.
ChannelVector baseline_profile(const SpectralTrace& trace, double window_start_s,
                               double window_end_s);

/// sample / baseline, per channel. Throws ZeroBaselineError.
ColourSignature normalize(const SpectralSample& sample, const ChannelVector& baseline);

/// Maximal runs where the channel-mean normalized intensity drops to
/// depth_threshold or below; one window per droplet notch. Two droplets
/// closer than one sample period at 20 S/s may merge into one window.
std::vector<SampleWindow> segment_droplets(const SpectralTrace& trace,
                                           const ChannelVector& baseline,
                                           double depth_threshold = 0.5);

/// Per-channel minimum of the normalized intensity over the window -- the
/// deepest attenuation point, robust to edge samples with partial droplet
/// occupancy. Throws EmptyWindowError.
ColourSignature droplet_signature(const SpectralTrace& trace, SampleWindow window,
                                  const ChannelVector& baseline);

/// Nearest reference under Euclidean distance on signatures clamped to
/// [0, 1]. Ties keep the earlier library entry. Margin is the distance gap
/// to the second-nearest entry (infinite for a single-entry library); small
/// margins flag look-alike inks instead of hiding them.
ColourCall classify(const ColourSignature& sig, const ReferenceLibrary& lib);

/// Least-squares inversion of the exponential attenuation model:
/// -ln(sig_i) ~ coeff_i * c * path over channels with positive coefficient
/// and positive signature (values above 1 count as no absorption). Result
/// clamped to [0, 1]. Throws UnidentifiableError when every usable channel
/// is saturated to zero.
double estimate_concentration(const ColourSignature& sig, const InkSpec& ink,
                              double path_length_mm);

}  // namespace dropletlink::spectral
