// pulse_engine.hpp — multi-level rotating-wave pulse propagators and the
// sequence runner. Pulses are compiled in the frame of their own drive with
// absolute-time anchoring, so carrier phase stays coherent across items.

#pragma once

#include <functional>
#include <optional>

#include "spinreg/noise.hpp"
#include "spinreg/readout.hpp"
#include "spinreg/register.hpp"
#include "spinreg/sequence.hpp"

namespace spinreg {

struct ExecutionOptions {
    bool ideal_pulses = false;       // exact rotations on the resonant transition
    double rwa_cutoff_factor = 50.0; // cutoff = factor * rabi unless overridden
    std::optional<double> rwa_cutoff_mhz;
    double drive_threshold = 1e-6;
    int n_traj = 1;
    std::uint64_t seed = 0;
    double mw_angle_scale = 1.0; // rotation-angle error model (1 = calibrated)
    double rf_angle_scale = 1.0;
    double ou_substeps_per_tau_c = 50.0;

    double angle_scale(Channel ch) const {
        return ch == Channel::MW ? mw_angle_scale : rf_angle_scale;
    }
};

struct FramePhase {
    Channel channel;
    double freq_mhz;
    double cycles; // accumulated rotating-frame phase in cycles (= f * duration)
};

struct Propagator {
    Operator u; // lab-frame unitary in the eigenbasis of the static Hamiltonian
    double duration_us = 0.0;
    std::vector<FramePhase> frame;
    bool empty_resonance = false; // no transition inside the RWA window
};

// Resolved (non-swept) pulse parameters.
struct ResolvedPulse {
    Channel channel = Channel::MW;
    double freq_mhz = 0.0;
    double phase_rad = 0.0;
    double rabi_mhz = 0.0;
    double duration_us = 0.0;
};

// Rotating-frame compilation of one rectangular pulse starting at absolute
// time t0. Counter-rotating terms are dropped; every catalog transition with
// |f - f_drive| < cutoff enters with coupling (rabi * drive element)/2 and
// its detuning on the diagonal.
Propagator pulse_propagator(const ResolvedPulse& pulse, const TransitionCatalog& catalog,
                            double rwa_cutoff_mhz, double t0_us, const ExecutionOptions& opts);

// ----------------------------- sequence runner -----------------------------

struct EngineContext {
    const TransitionCatalog* catalog = nullptr;
    ExecutionOptions opts;
    std::optional<DephasingNoise> noise;
    std::optional<ReadoutModel> readout;
    std::optional<MeissnerEvent> meissner; // electron frequency step during delays
    double drive_offset_mhz = 0.0;         // applied to every pulse frequency
};

using Observable = std::function<double(const Matrix&)>;

struct PointResult {
    double sweep_value = 0.0;
    Matrix rho; // trajectory-averaged state at the last READ marker (or end)
    double obs_mean = 0.0;
    double obs_stderr = 0.0;
};

// Applies items in order for every sweep point. Delays evolve under the
// static Hamiltonian plus the sampled noise detunings; Laser items delegate
// to the readout model's pump map; trajectories and sweep points draw
// deterministic seeds from (seed, point, trajectory).
std::vector<PointResult> run_sequence(const Matrix& rho0, const Sequence& seq,
                                      const EngineContext& ctx, const Observable& obs = {});

// ------------------------------ state helpers ------------------------------

// Pure eigenlevel state by label, as a density matrix in the eigenbasis.
Matrix level_state(const TransitionCatalog& catalog, const std::string& label);

// Diagonal mixture over eigenlevels: label -> weight (weights normalized).
Matrix mixed_state(const TransitionCatalog& catalog,
                   const std::vector<std::pair<std::string, double>>& weights);

// sigma_z of one site (0 = electron) expressed in the eigenbasis.
Matrix sigma_z_op(const TransitionCatalog& catalog, int site);

double expect(const Matrix& rho, const Matrix& op);

} // namespace spinreg
