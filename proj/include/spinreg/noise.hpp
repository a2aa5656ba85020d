// noise.hpp — stochastic dephasing processes (quasi-static Gaussian and
// Ornstein-Uhlenbeck), cross-spin correlation, Meissner frequency steps, and
// the analytic Bell-state dephasing relations.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinreg/util.hpp"

namespace spinreg {

enum class NoiseKind { quasi_static_gaussian, ou };

// One spin's detuning process. sigma in kHz; tau_c in ms (OU only).
struct SpinNoise {
    NoiseKind kind = NoiseKind::quasi_static_gaussian;
    double sigma_khz = 0.0;
    double tau_c_ms = 1.0;
};

// Per-spin dephasing with a correlation coefficient between the two nuclear
// detunings. Spin order matches the register: electron, then nuclei.
struct DephasingNoise {
    SpinNoise electron;
    std::vector<SpinNoise> nuclei; // size matches RegisterConfig::nuclei
    double cross_correlation = 0.0; // between the first two nuclear detunings
    std::uint64_t seed = 0;

    void validate() const;
    bool silent() const;
};

// Detuning trajectories, one value per step per spin, in kHz.
// Quasi-static processes return a constant trajectory; OU uses the exact
// one-step discretization; nuclear innovations are correlated via the
// Cholesky factor of [[1, r], [r, 1]].
struct DetuningSeries {
    double dt_us = 0.0;
    std::vector<std::vector<double>> spins; // [spin][step]; spin 0 = electron
};
DetuningSeries sample_detuning_series(const DephasingNoise& noise, double dt_us, double total_us,
                                      std::uint64_t trajectory_seed);

// Draws one quasi-static sample per spin (kHz); used for per-trajectory
// constant detunings.
std::vector<double> sample_static_detunings(const DephasingNoise& noise,
                                            std::uint64_t trajectory_seed);

// Appendix-style Bell dephasing: Gaussian quasi-static noise with correlation
// r gives 1/T_phi^2 = 1/Ts^2 + 1/Th^2 + 2r/(Ts Th) and the minus sign for psi.
// Perfectly correlated identical spins give T_psi = +infinity.
struct BellT2 {
    double t2_phi_ms = 0.0;
    double t2_psi_ms = 0.0;
};
BellT2 analytic_bell_t2(double t2_si_ms, double t2_h_ms, double correlation);

// Superconducting-film frequency step: the electron resonance shifts by
// -delta_f once the delay exceeds t_jump after the first pulse.
struct MeissnerEvent {
    double delta_f_mhz = 0.7;
    double t_jump_after_first_pulse_us = 1.25;

    void validate() const;
};

// Noise section of the shared config file format.
DephasingNoise parse_noise_config(const std::string& text, std::size_t n_nuclei);
std::string noise_config_to_text(const DephasingNoise& noise);

} // namespace spinreg
