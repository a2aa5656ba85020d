// presets.hpp — embedded read-only configurations. "paper-T1" is the
// reference register reproduced throughout the test suite; the noise presets
// bundle its register with the calibrated dephasing parameters.

#pragma once

#include <string>
#include <vector>

#include "spinreg/noise.hpp"
#include "spinreg/register.hpp"

namespace spinreg {

std::vector<std::string> preset_names();

// Config-file text of a preset (parseable by the loaders below).
std::string preset_text(const std::string& name);

RegisterConfig preset_register(const std::string& name);

// Noise section of a preset; throws if the preset has none.
DephasingNoise preset_noise(const std::string& name);
bool preset_has_noise(const std::string& name);

// Default per-channel Rabi rates used by the command-line experiments.
struct PresetDrive {
    double mw_rabi_mhz = 5.556;    // electron pi in ~90 ns
    double rf_rabi_mhz = 0.0025;   // conditional nuclear gates, ~0.5 kHz on Si
};
PresetDrive preset_drive();

} // namespace spinreg
