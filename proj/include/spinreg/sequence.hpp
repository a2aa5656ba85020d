// sequence.hpp — pulse/delay/laser/readout items, sweep binding, and the
// line-oriented text serialization with exact round-trip.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinreg/util.hpp"

namespace spinreg {

// Scalar that may depend linearly on the sweep parameter s: value = offset + scale*s.
struct Bound {
    double offset = 0.0;
    double scale = 0.0;

    static Bound fixed(double v) { return Bound{v, 0.0}; }
    static Bound swept(double scale, double offset = 0.0) { return Bound{offset, scale}; }
    double at(double s) const { return offset + scale * s; }
    bool is_swept() const { return scale != 0.0; }
    bool operator==(const Bound& o) const { return offset == o.offset && scale == o.scale; }
};

enum class Channel { MW, RF };

struct PulseItem {
    Channel channel = Channel::MW;
    Bound freq_mhz;
    Bound phase_rad;
    double rabi_mhz = 0.0; // nominal on-resonance Rabi rate for a unit drive element
    Bound duration_us;
};

struct DelayItem {
    Bound duration_us;
};

struct LaserItem {
    char transition = 'C'; // 'B' or 'C'
    Bound duration_us;
};

struct ReadItem {};

using SequenceItem = std::variant<PulseItem, DelayItem, LaserItem, ReadItem>;

struct Sweep {
    std::string name;
    std::vector<double> values;
};

struct Sequence {
    std::vector<SequenceItem> items;
    std::optional<Sweep> sweep;

    // Sweep present -> at least one item must reference it.
    void validate() const;
    std::size_t n_points() const { return sweep ? sweep->values.size() : 1; }
    double sweep_value(std::size_t point) const { return sweep ? sweep->values[point] : 0.0; }
};

// Adds pi to the phase of the last pulse; used to project to the opposite pole.
Sequence toggle_final_phase(const Sequence& seq);

// One item per line; exact round-trip (shortest round-trip decimal output).
std::string sequence_to_text(const Sequence& seq);
Sequence sequence_from_text(const std::string& text);

} // namespace spinreg
