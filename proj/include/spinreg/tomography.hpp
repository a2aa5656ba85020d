// tomography.hpp — phase-reversal tomography: off-diagonal extraction from
// <sigma_z>(theta) sweeps, the partial two-spin density matrix, and Bell
// fidelities from its entries.

#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinreg/experiments.hpp"
#include "spinreg/util.hpp"

namespace spinreg {

// Basis order |⇓⇓>, |⇓⇑>, |⇑⇓>, |⇑⇑> (first arrow: nucleus 0). Off-diagonal
// slots follow the generic matrix
//   [ p1  a   b   c  ]
//   [ a*  p2  d   e  ]
//   [ b*  d*  p3  f  ]
//   [ c*  e*  f*  p4 ]
// Entries not reachable by phase reversal stay unknown; there is no
// completion step.
struct PartialDensityMatrix {
    double p1 = 0, p2 = 0, p3 = 0, p4 = 0;
    std::optional<cxd> a, b, c, d, e, f;

    // population sum within 1e-6 and |offdiag|^2 <= p_i p_j + 1e-6
    void validate() const;
    std::vector<std::string> unknown_entries() const;
};

PartialDensityMatrix matrix_from_populations(const NuclearPopulations& populations);

// Least-squares fit of offset - 2a cos(4 theta) + 2b sin(4 theta); the sweep
// must cover at least one period of 4 theta with 8 or more points.
struct OffDiagonalFit {
    double a = 0, b = 0, offset = 0;
    Eigen::Matrix3d covariance;
};
OffDiagonalFit extract_offdiagonal(const std::vector<double>& theta_grid,
                                   const std::vector<double>& sigma_z_values);

// Tr(rho_exp rho_ideal): 0.5 (p1+p4) +- Re(c) for phi states,
// 0.5 (p2+p3) +- Re(d) for psi states. Throws naming a missing entry.
double fidelity(const PartialDensityMatrix& matrix, BellState ideal);

struct TomographyResult {
    PartialDensityMatrix matrix;
    double fidelity_value = 0.0;
    Eigen::Matrix3d fit_covariance;

    std::string to_json() const;
};

// Convenience assembly: populations + phase sweep -> matrix (c known), F.
TomographyResult assemble_tomography(const NuclearPopulations& populations,
                                     const std::vector<double>& theta_grid,
                                     const std::vector<double>& sigma_z_values, BellState ideal);

// Gaussian-envelope decay time of a Bell Ramsey trace at the known virtual
// detuning; a vanishing envelope rate reports no_decay.
struct BellRamseyFit {
    double t2 = 0.0; // units of the input axis
    double uncertainty = 0.0;
    bool no_decay = false;
};
BellRamseyFit bell_ramsey_t2(const std::vector<double>& tau_grid,
                             const std::vector<double>& sigma_z_values, double omega_cycles);

} // namespace spinreg
