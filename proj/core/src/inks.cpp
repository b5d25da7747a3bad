#include "dropletlink/inks.hpp"

#include <stdexcept>

namespace dropletlink::inks {

// Channel order: 450, 500, 550, 570, 600, 650 nm. An ink transmits its own
// hue and absorbs the complement.

InkSpec water() { return {"water", {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, true}; }

InkSpec violet() { return {"violet", {0.8, 3.0, 11.0, 13.0, 9.0, 2.0}, true}; }

InkSpec blue() { return {"blue", {1.5, 2.0, 6.0, 9.0, 13.0, 14.0}, true}; }

InkSpec green() { return {"green", {9.0, 4.0, 1.5, 3.0, 10.0, 12.0}, true}; }

InkSpec yellow() { return {"yellow", {12.0, 8.0, 2.8, 2.0, 1.4, 1.2}, true}; }

InkSpec orange() { return {"orange", {13.0, 10.0, 4.0, 2.2, 1.0, 0.8}, true}; }

InkSpec red() { return {"red", {13.0, 12.0, 10.0, 9.0, 3.0, 0.7}, true}; }

std::vector<InkSpec> all_colours() {
    return {violet(), blue(), green(), yellow(), orange(), red()};
}

InkSpec by_name(const std::string& name) {
    if (name == "water") return water();
    for (auto& ink : all_colours())
        if (ink.name == name) return ink;
    throw std::invalid_argument("unknown ink '" + name + "'");
}

}  // namespace dropletlink::inks
