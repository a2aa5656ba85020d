// fitting.hpp — deterministic curve fits: stretched exponentials, damped
// cosines (Gaussian envelope), decoupling scaling law, two-segment frequency
// jump detection, and per-pulse fidelity estimation.

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spinreg/util.hpp"

namespace spinreg {

// Damped Gauss-Newton (Levenberg-Marquardt) on a residual vector with a
// numerically differentiated Jacobian. Deterministic given p0.
struct LsqResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;
    double ssr = 0.0;
    int iterations = 0;
    bool converged = false;
};
LsqResult levenberg_marquardt(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                              Eigen::VectorXd p0, int max_iterations = 200, double tol = 1e-12);

// ------------------------------ decay models ------------------------------

// y = A exp(-(t/T2)^n) + offset. T2 is the 1/e time of the fitted envelope.
struct DecayFit {
    double t2 = 0.0; // units of the input axis
    double amplitude = 0.0;
    double offset = 0.0;
    double stretch_n = 0.0;
    bool n_fixed = false;
    bool degenerate = false; // constant data: amplitude ~ 0, t2 unidentifiable
    Eigen::MatrixXd covariance;
};
DecayFit fit_stretched_exp(const std::vector<double>& t, const std::vector<double>& y,
                           std::optional<double> fix_n = std::nullopt);

// T_coh(N) = alpha * N^n by linear least squares in log-log space.
struct ScalingFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    Eigen::Matrix2d covariance;
};
ScalingFit fit_dd_scaling(const std::vector<std::pair<double, double>>& pairs);

// y = A exp(-(t/T2)^2) cos(2 pi f t + phase) + offset; frequency seeded from
// the dominant discrete-Fourier peak.
struct RamseyFit {
    double freq = 0.0;
    double t2_star = 0.0;
    double phase = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    bool no_decay = false; // envelope rate fitted to ~zero
    double t2_uncertainty = 0.0;
    Eigen::MatrixXd covariance;
};
RamseyFit fit_ramsey(const std::vector<double>& t, const std::vector<double>& y);

// Same model with the oscillation frequency held fixed.
RamseyFit fit_damped_cosine_fixed_freq(const std::vector<double>& t, const std::vector<double>& y,
                                       double freq);

// Two-segment damped-cosine fit with the change point chosen by global
// residual minimization over the sample grid. A frequency difference below
// the Fourier resolution of the shorter segment reports no_jump.
struct JumpFit {
    double f_before = 0.0;
    double f_after = 0.0;
    double t_jump = 0.0;
    bool no_jump = false;
    double resolution = 0.0; // frequency difference threshold used
};
JumpFit detect_frequency_jump(const std::vector<double>& t, const std::vector<double>& y);

// amplitude(N) = alpha * fidelity^N; log-linear fit (single pair assumes
// alpha = 1).
double estimate_pi_fidelity(const std::vector<std::pair<double, double>>& pairs);

// x,y[,stderr] CSV used by the fit commands.
struct XyData {
    std::vector<double> x, y, yerr;
};
XyData parse_xy_csv(const std::string& text);

} // namespace spinreg
