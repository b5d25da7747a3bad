/// Built-in ink models: six colours spanning the sensor's range plus clear
/// water. Coefficients are chosen so every colour notches well below half
/// baseline at 25% concentration and so yellow and orange stay deliberately
/// close -- the classic look-alike pair a classifier must flag by margin
/// rather than silently confuse.
#pragma once

#include <vector>

#include "dropletlink/types.hpp"

namespace dropletlink::inks {

InkSpec water();
InkSpec violet();
InkSpec blue();
InkSpec green();
InkSpec yellow();
InkSpec orange();
InkSpec red();

/// The six coloured inks, in spectral order (violet..red). Water is not
/// included; it has no spectral signature.
std::vector<InkSpec> all_colours();

/// Lookup by name ("water", "violet", ...). Throws std::invalid_argument on
/// an unknown name.
InkSpec by_name(const std::string& name);

}  // namespace dropletlink::inks
