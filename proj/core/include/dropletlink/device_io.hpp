/**
 * Trace file formats and the binary sensor-frame stream.
 *
 * CSV layouts match the plotted data files: `time,voltage` for the infrared
 * trace and `time,violet,blue,green,yellow,orange,red` for the spectral
 * trace (column order maps to 450/500/550/570/600/650 nm). Values round-trip
 * at 9 significant digits.
 *
 * The frame protocol stands in for the device's undocumented serial framing:
 *
 *   sync      1 byte   0xA5
 *   kind      1 byte   0x01 = IR sample, 0x02 = spectral sample
 *   timestamp 4 bytes  unsigned milliseconds, little-endian
 *   payload   2 bytes  IR: u16 ADC counts (0..65535 -> 0..5 V), or
 *             12 bytes spectral: six u16 counts, little-endian
 *   checksum  1 byte   XOR of all preceding bytes
 *
 * Total frame length: 9 bytes (IR) or 19 bytes (spectral). The decoder
 * re-synchronizes on the sync byte after any checksum failure; corrupted
 * spans are counted, never fatal.
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dropletlink/errors.hpp"
#include "dropletlink/spectral.hpp"
#include "dropletlink/types.hpp"

namespace dropletlink::io {

// ---------------------------------------------------------------- CSV

IrTrace read_ir_csv(const std::string& text);
std::string write_ir_csv(const IrTrace& trace);

SpectralTrace read_spectral_csv(const std::string& text);
std::string write_spectral_csv(const SpectralTrace& trace);

/// Reference library file: one line per ink,
/// `label v450 v500 v550 v570 v600 v650` (decimal, space-separated).
spectral::ReferenceLibrary read_reference_library(const std::string& text);
std::string write_reference_library(const spectral::ReferenceLibrary& lib);

/// File helpers; throw FormatError on I/O failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// ---------------------------------------------------------------- frames

inline constexpr std::uint8_t kFrameSync = 0xA5;
inline constexpr std::uint8_t kFrameKindIr = 0x01;
inline constexpr std::uint8_t kFrameKindSpectral = 0x02;
inline constexpr std::size_t kIrFrameLength = 9;
inline constexpr std::size_t kSpectralFrameLength = 19;

struct SensorFrame {
    std::uint8_t kind = kFrameKindIr;
    std::uint32_t timestamp_ms = 0;
    std::uint16_t ir_counts = 0;                   ///< valid when kind == IR
    std::array<std::uint16_t, 6> spectral_counts{};  ///< valid when kind == spectral
};

struct FrameDecodeResult {
    std::vector<SensorFrame> frames;
    /// Number of corrupted spans skipped while resynchronizing (one per
    /// contiguous run of undecodable bytes, however long).
    std::size_t checksum_errors = 0;
    /// Bytes of an incomplete frame left at the end of the stream.
    std::size_t trailing_bytes = 0;
};

std::vector<std::uint8_t> encode_frame(const SensorFrame& frame);
std::vector<std::uint8_t> encode_frames(const std::vector<SensorFrame>& frames);

/// Robust to garbage: scans for the sync byte, validates the checksum, and
/// skips forward one byte at a time on failure. A malformed tail yields a
/// partial result.
FrameDecodeResult decode_frames(const std::vector<std::uint8_t>& stream);

/// ADC count <-> voltage mapping of the IR payload, linear over 0..5 V.
double ir_counts_to_volts(std::uint16_t counts);
std::uint16_t ir_volts_to_counts(double volts);

}  // namespace dropletlink::io
