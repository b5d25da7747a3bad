/**
 * Desk-scale experiment drivers: transmission, dilution and sizing runs over
 * the simulated channel, with machine-readable reports and plot-ready CSV
 * artifacts.
 *
 * Reports are ordered key = value text. Artifact paths inside a report are
 * relative to the output directory, so identical (config, seed) runs produce
 * byte-identical reports wherever they are written. Trials derive their
 * seeds as rng_seed + trial index; running them serially or in parallel
 * yields the same report.
 */
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dropletlink/channel_sim.hpp"
#include "dropletlink/inks.hpp"
#include "dropletlink/ook_codec.hpp"
#include "dropletlink/spectral.hpp"
#include "dropletlink/types.hpp"

namespace dropletlink::experiments {

struct ExperimentReport {
    std::string experiment;
    /// Full resolved configuration, enough to reproduce the run bit-identically.
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::pair<std::string, std::string>> metrics;
    /// Data files written, relative to the output directory.
    std::vector<std::string> artifacts;
};

/// Default droplet for experiments that inject a fixed template.
DropletEvent default_droplet_template();

/// Encode -> simulate -> decode, `trials` times with derived seeds. Reports
/// aggregate and per-trial BER and writes the IR trace CSV of trial 0.
/// Throws std::invalid_argument on an empty bit string.
ExperimentReport run_transmission(const ook::BitString& bits, const ChannelConfig& cfg,
                                  const ook::OokParams& params, std::size_t trials,
                                  const std::string& out_dir,
                                  const DropletEvent& droplet_template = default_droplet_template());

/// One 5 mm droplet per concentration. Reports the IR plateau mean, the
/// droplet signature and the concentration estimate per step, and writes the
/// per-panel IR and normalized-colour CSVs. Throws ExperimentAssertionError
/// if any IR plateau mean deviates more than ir_mean_tolerance_v from the
/// configured pulse amplitude (the colour-invariance check).
ExperimentReport run_dilution(const InkSpec& ink, const std::vector<double>& concentrations,
                              const ChannelConfig& cfg, const std::string& out_dir,
                              double ir_mean_tolerance_v = 0.13);

/// trials_per_length droplets per requested length; reports mean, standard
/// deviation and worst deviation per length plus the overall precision
/// (largest |mean - expected|), and writes an expected-vs-measured CSV.
ExperimentReport run_sizing(const std::vector<double>& lengths_mm,
                            std::size_t trials_per_length, const ChannelConfig& cfg,
                            const std::string& out_dir, const InkSpec& ink = inks::blue(),
                            double concentration = 0.25);

/// Builds a reference library by running one clean droplet of each ink
/// through the simulator and the signature pipeline (no noise, no jitter).
spectral::ReferenceLibrary calibrate_reference_library(const std::vector<InkSpec>& inks,
                                                       double concentration,
                                                       const ChannelConfig& cfg);

/// Key = value rendering used for report files.
std::string render_report(const ExperimentReport& report);

/// Renders and writes the report to <out_dir>/<experiment>_report.txt,
/// returning the full path.
std::string write_report(const ExperimentReport& report, const std::string& out_dir);

/// Echo helpers shared with the CLI (exact field names, one pair per field).
std::vector<std::pair<std::string, std::string>> echo_channel_config(const ChannelConfig& cfg);
std::vector<std::pair<std::string, std::string>> echo_ook_params(const ook::OokParams& params);

}  // namespace dropletlink::experiments
