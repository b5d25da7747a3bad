/**
 * On-off-keying over droplets: bit '1' injects a droplet in its one-second
 * symbol slot, bit '0' injects nothing.
 *
 * The receiver chain is: offset correction to a 0 V baseline, a fixed
 * detection threshold, symbol intervals derived from the first threshold
 * pass, re-synchronised at every detected rising edge, and a 30%-of-interval
 * duty rule for the bit decision.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "dropletlink/errors.hpp"
#include "dropletlink/types.hpp"

namespace dropletlink::ook {

using BitString = std::vector<int>;  ///< entries 0 or 1

struct OokParams {
    double threshold_v = 0.2;
    double duty_fraction = 0.30;
    double symbol_period_s = 1.0;
    /// Expected bit count. When absent, decoding runs to the last complete
    /// interval before the trace ends (trailing zeros beyond the trace are
    /// unknowable without it).
    std::optional<std::size_t> n_bits;
    /// Leading trace span used for the baseline offset estimate.
    double baseline_window_s = 0.5;
};

enum class EdgeKind { Rising, Falling };

struct Edge {
    double time_s;   ///< linear-interpolated threshold crossing
    EdgeKind kind;
};

struct SymbolInterval {
    double start_s;
    double end_s;
};

struct DecodeReport {
    BitString bits;
    std::vector<Edge> edges;
    std::vector<SymbolInterval> symbol_intervals;
    std::vector<double> duty_per_symbol;  ///< same length as bits
    double offset_v = 0.0;                ///< baseline removed before detection
};

/// Bit string -> injection schedule. Every 1-bit becomes a copy of
/// `droplet_template` injected at k * symbol_period_s; 0-bits inject nothing.
/// The template's inject_time_s is ignored.
DropletSchedule encode(const BitString& bits, double symbol_period_s,
                       const DropletEvent& droplet_template);

/// Subtracts the median of the leading window (robust to a droplet clipping
/// the window edge). Returns the corrected trace and the offset removed.
/// Throws WindowTooShortError if the window holds fewer than 8 samples.
std::pair<IrTrace, double> offset_correct(const IrTrace& trace, double baseline_window_s);

/// Threshold crossings with linear-interpolated times. Output strictly
/// alternates rising/falling starting with rising (a leading falling edge
/// from a trace that starts above threshold is dropped).
std::vector<Edge> detect_edges(const IrTrace& trace, double threshold_v);

/// Full receiver: offset correction, edge detection, interval derivation
/// with per-rising-edge resynchronization, duty-rule bit decisions.
///
/// The first interval starts at the first rising edge. The first rising edge
/// inside an interval re-bases the following intervals to edge + k*period;
/// an edge in the trailing quarter of an interval counts as the next
/// symbol's droplet arriving early and anchors the next interval at the edge
/// itself. Throws NoSignalError when no rising edge is found and n_bits is
/// unset.
DecodeReport decode(const IrTrace& trace, const OokParams& params);

/// Reference variant that never re-bases intervals after the first rising
/// edge. Exists to evaluate what resynchronization buys; not part of the
/// receiver proper.
DecodeReport decode_without_resync(const IrTrace& trace, const OokParams& params);

/// Hamming distance / length. Throws LengthMismatchError.
double bit_error_rate(const BitString& sent, const BitString& received);

/// '0'/'1' string <-> BitString helpers for CLIs and tests.
BitString bits_from_string(const std::string& s);
std::string bits_to_string(const BitString& bits);

}  // namespace dropletlink::ook
