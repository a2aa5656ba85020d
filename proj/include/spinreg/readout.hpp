// readout.hpp — stochastic optical pumping and repetitive fluorescence
// readout: CnNOT-mapped photon statistics, per-cycle nuclear flips, and
// population estimation with background subtraction.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinreg/register.hpp"

namespace spinreg {

struct ReadoutModel {
    double photons_per_cycle = 2.0;    // mean detected photons while cycling
    double p_e_flip_per_cycle = 0.25;  // early-truncation probability of the optical pump
    double p_n_flip_per_cycle = 0.02;  // per nuclear spin, per cycle while cycling
    double background_per_cycle = 0.3; // Poisson mean
    int n_repetitions = 2;             // cycles summed by the population estimator
    double cycle_time_us = 1.0;        // one pump/readout cycle inside Laser items

    void validate() const;
};

struct ReadoutRecord {
    std::vector<int> counts; // per cycle
    int shot = 0;
    std::string prepared_label; // nuclear label targeted by the CnNOT, e.g. "⇑⇓"

    int total(int first_n) const;
};

// Nuclear basis indexing: bits in register order (nucleus 0 is the most
// significant bit), 0 = up. nuclear_label(0, 2) == "⇑⇑".
std::string nuclear_label(int idx, int n_nuclei);
int nuclear_index_up_up();   // |⇑⇑> for the two-nucleus register
int nuclear_index(const std::string& arrows);

// Populations over the nuclear basis traced over the electron, from a density
// matrix expressed in the eigenbasis `levels`.
std::vector<double> nuclear_populations(const Matrix& rho, const std::vector<Level>& levels,
                                        int n_nuclei);

// Repetitive readout of one prepared state: each cycle applies a CnNOT that
// maps the target nuclear population onto the bright electron manifold, then
// collects Poisson photons truncated by the optical electron flip; nuclear
// spins flip with p_n_flip per cycle while the defect is cycling. Dark shots
// stay dark. Deterministic per (seed).
std::vector<ReadoutRecord> simulate_readout(const std::vector<double>& nuclear_pops,
                                            int target_nuclear_state, const ReadoutModel& model,
                                            int n_shots, std::uint64_t seed,
                                            int n_cycles = 0 /* 0 -> model.n_repetitions */);

// Background reference: no CnNOT, counts are background only.
std::vector<ReadoutRecord> simulate_background(const ReadoutModel& model, int n_shots,
                                               std::uint64_t seed, int n_cycles = 0);

// Tomography basis order: p1=|⇓⇓>, p2=|⇓⇑>, p3=|⇑⇓>, p4=|⇑⇑> (first arrow is
// nucleus 0). NuclearPopulations stores the same numbers keyed by arrows.
struct NuclearPopulations {
    double up_up = 0, up_down = 0, down_up = 0, down_down = 0;
    bool clamped = false; // a negative post-subtraction PL was clamped to zero

    double p1() const { return down_down; }
    double p2() const { return down_up; }
    double p3() const { return up_down; }
    double p4() const { return up_up; }
    double sum() const { return up_up + up_down + down_up + down_down; }
};

// Mean photoluminescence of the first n_repetitions cycles per state, minus
// the background mean, normalized across the four states. Negative values are
// clamped to zero (flagged) before renormalization.
NuclearPopulations estimate_populations(const std::vector<ReadoutRecord>& up_up,
                                        const std::vector<ReadoutRecord>& up_down,
                                        const std::vector<ReadoutRecord>& down_up,
                                        const std::vector<ReadoutRecord>& down_down,
                                        const std::vector<ReadoutRecord>& background,
                                        const ReadoutModel& model);

// <sigma_z> of nucleus 0 (first arrow): +1 for ⇑, -1 for ⇓.
double nuclear_expectation(const NuclearPopulations& populations);

// Deterministic pump map for Laser items: transition C makes the ↑ manifold
// bright and pumps toward ↓ (B is the mirror image). Coherences touching a
// bright level are erased; dark-dark coherences survive.
Matrix apply_laser_pump(const Matrix& rho, const std::vector<Level>& levels, char transition,
                        double duration_us, const ReadoutModel& model);

std::string records_to_csv(const std::vector<ReadoutRecord>& records);
std::string histogram_to_csv(const std::vector<ReadoutRecord>& records, int first_n);

} // namespace spinreg
