// experiments.hpp — standard pulse-sequence protocols: Rabi, Ramsey with
// virtual detuning, Hahn echo, CPMG, XY4/XY8, resonance sweeps, T1, the
// optical initialization loop, and Bell-state generation with phase-reversal
// readout.

#pragma once

#include <optional>

#include "spinreg/pulse_engine.hpp"

namespace spinreg {

enum class ExperimentKind { rabi, ramsey, hahn_echo, cpmg, xy4, xy8, nmr_sweep, odmr_sweep, t1 };

ExperimentKind experiment_kind_from_string(const std::string& s);
const char* to_string(ExperimentKind k);

struct ExperimentParams {
    ExperimentKind kind = ExperimentKind::ramsey;
    std::string from_label; // target transition, lower level first
    std::string to_label;
    Channel channel = Channel::MW;
    double rabi_mhz = 5.556;
    std::vector<double> grid;            // us for time sweeps, MHz for resonance sweeps
    double virtual_detuning_mhz = 0.0;   // Ramsey phase advance
    int n_pulses = 1;                    // CPMG N; XY4/XY8 total pi count must be 4n/8n
};

struct Experiment {
    ExperimentParams params;
    Sequence sequence;           // projects to the +pole; toggle for the -pole
    bool final_projection = true;
    double pi_duration_us = 0.0;
    int observable_site = 0;
    std::optional<MeissnerEvent> meissner;
    double drive_offset_mhz = 0.0;
};

// Pi duration on a transition at a given nominal Rabi rate.
double pi_duration_us(const Transition& t, Channel ch, double rabi_mhz);

// Raw drive phase realizing a logical azimuth on a transition. Logical
// phases follow the driven spin's ladder (raising amplitude carries
// e^{+i phi}) regardless of the energy ordering or drive-element sign.
double pulse_phase_for(const TransitionCatalog& catalog, const Transition& t, Channel ch,
                       double logical_phi);

Experiment make_experiment(const ExperimentParams& params, const TransitionCatalog& catalog);

// Marks the experiment so the electron resonance steps by -delta_f once the
// delay passes t_jump after the first pulse.
Experiment apply_meissner(Experiment exp, const MeissnerEvent& event);

struct CurvePoint {
    double x = 0.0;
    double mean = 0.0;
    double stderr = 0.0;
};

// Polarization (or direct expectation) curve over the sweep grid. Protocols
// ending in a pi/2 projection run twice, with the final pulse phase toggled
// by pi, and report half the difference.
std::vector<CurvePoint> run_experiment(const Experiment& exp, const Matrix& rho0,
                                       EngineContext ctx);

// Trajectory-averaged decay curve: convenience wrapper binding a noise model
// and trajectory count to run_experiment.
std::vector<CurvePoint> monte_carlo_decay(const Experiment& exp, const DephasingNoise& noise,
                                          int n_traj, const Matrix& rho0, EngineContext ctx);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);

// --------------------------- optical initialization ---------------------------

// Optical pump on B or C interleaved with multi-tone MW pi pulses at the
// conditional lines of every nuclear configuration other than ⇓⇓; targets
// with other nuclear states append flip-mapping steps (nuclear-flipping MW pi
// plus a pump pulse per differing spin). Throws when the register's drive set
// cannot reach the target, naming the missing transition.
Sequence initialization_sequence(const std::string& target_label, const TransitionCatalog& catalog,
                                 int cycles = 50, double pump_laser_us = 10.0,
                                 double map_laser_us = 3.0, double mw_rabi_mhz = 5.556);

// ------------------------------- Bell states --------------------------------

enum class BellState { phi_plus, phi_minus, psi_plus, psi_minus };

BellState bell_state_from_string(const std::string& s);
const char* to_string(BellState b);

// Conditional pi/2 on nucleus 0 followed by a conditional pi on nucleus 1,
// optional free evolution, and (optionally) the two gates replayed in reverse
// order with azimuthal offsets (phi1, phi2). Assumes the register was
// initialized to |↓⇑⇑> upstream.
Sequence bell_sequence(BellState which, double free_evolution_us,
                       std::optional<std::pair<double, double>> reversal_phases,
                       const TransitionCatalog& catalog, double rabi_rf_mhz = 0.0025);

// Swept-delay variant: reversal phases (0, 2 pi f_virt * tau).
Sequence bell_ramsey_sequence(BellState which, const std::vector<double>& tau_grid_us,
                              double virtual_detuning_mhz, const TransitionCatalog& catalog,
                              double rabi_rf_mhz = 0.0025);

// Ideal Bell target in the tomography basis (|⇓⇓>, |⇓⇑>, |⇑⇓>, |⇑⇑>).
Eigen::Matrix4cd ideal_bell_density(BellState which);

// Fidelity of the nuclear two-spin reduced state against the ideal target;
// electron must factor out (it stays in |↓>).
double bell_state_fidelity(const Matrix& rho, const TransitionCatalog& catalog, BellState which);

// ----------------------- phase-reversal tomography run -----------------------

struct ReadoutSampling {
    ReadoutModel model;
    int shots = 10000;
    std::uint64_t seed = 1;
};

struct BellSweepPoint {
    double theta = 0.0;
    double sigma_z = 0.0; // <sigma_z> of nucleus 0
    double stderr = 0.0;
};

struct BellTomographyRun {
    std::vector<BellSweepPoint> sweep;   // phi1 = theta, phi2 = 3 theta
    NuclearPopulations populations;      // measured right after generation
};

// Full pipeline: generation, reversal sweep, population measurement. With
// `sampling` absent the populations are exact expectations; otherwise they go
// through the stochastic repetitive-readout model with background subtraction.
BellTomographyRun run_bell_tomography(const EngineContext& ctx, BellState which, const Matrix& rho0,
                                      int n_theta, const std::optional<ReadoutSampling>& sampling,
                                      double rabi_rf_mhz = 0.0025);

// Bell Ramsey decay trace of <sigma_z> at the virtual detuning.
std::vector<CurvePoint> run_bell_ramsey(const EngineContext& ctx, BellState which, const Matrix& rho0,
                                        const std::vector<double>& tau_grid_us,
                                        double virtual_detuning_mhz, double rabi_rf_mhz = 0.0025);

} // namespace spinreg
