#include "spinreg/tomography.hpp"

#include "spinreg/fitting.hpp"

#include <json.hpp>

#include <cmath>

namespace spinreg {

void PartialDensityMatrix::validate() const {
    const double sum = p1 + p2 + p3 + p4;
    if (std::abs(sum - 1.0) > 1e-6)
        throw ConfigError("PartialDensityMatrix: populations sum to " + format_double(sum));
    for (double p : {p1, p2, p3, p4})
        if (p < -1e-9) throw ConfigError("PartialDensityMatrix: negative population");
    struct Slot {
        const std::optional<cxd>* v;
        double pi, pj;
        const char* name;
    };
    const Slot slots[6] = {{&a, p1, p2, "a"}, {&b, p1, p3, "b"}, {&c, p1, p4, "c"},
                           {&d, p2, p3, "d"}, {&e, p2, p4, "e"}, {&f, p3, p4, "f"}};
    for (const auto& s : slots) {
        if (!s.v->has_value()) continue;
        const double mag2 = std::norm(s.v->value());
        if (mag2 > s.pi * s.pj + 1e-6)
            throw ConfigError(std::string("PartialDensityMatrix: entry ") + s.name +
                              " violates the Cauchy-Schwarz bound");
    }
}

std::vector<std::string> PartialDensityMatrix::unknown_entries() const {
    std::vector<std::string> out;
    const std::pair<const std::optional<cxd>*, const char*> slots[6] = {
        {&a, "a"}, {&b, "b"}, {&c, "c"}, {&d, "d"}, {&e, "e"}, {&f, "f"}};
    for (const auto& [v, name] : slots)
        if (!v->has_value()) out.emplace_back(name);
    return out;
}

PartialDensityMatrix matrix_from_populations(const NuclearPopulations& populations) {
    PartialDensityMatrix m;
    m.p1 = populations.p1();
    m.p2 = populations.p2();
    m.p3 = populations.p3();
    m.p4 = populations.p4();
    return m;
}

OffDiagonalFit extract_offdiagonal(const std::vector<double>& theta_grid,
                                   const std::vector<double>& sigma_z_values) {
    if (theta_grid.size() != sigma_z_values.size())
        throw ConfigError("extract_offdiagonal: grid/value size mismatch");
    if (theta_grid.size() < 8) throw ConfigError("extract_offdiagonal: need at least 8 points");
    double lo = theta_grid[0], hi = theta_grid[0];
    for (double v : theta_grid) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // one period of 4 theta is pi/2
    constexpr double PI = 3.14159265358979323846;
    if ((hi - lo) < PI / 2 * (1.0 - 1e-9))
        throw ConfigError("extract_offdiagonal: sweep must span one period of 4*theta");

    const Eigen::Index n = Eigen::Index(theta_grid.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double th4 = 4.0 * theta_grid[std::size_t(i)];
        design(i, 0) = 1.0;
        design(i, 1) = -2.0 * std::cos(th4);
        design(i, 2) = 2.0 * std::sin(th4);
        rhs(i) = sigma_z_values[std::size_t(i)];
    }
    const Eigen::Matrix3d xtx = design.transpose() * design;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(xtx);
    if (!lu.isInvertible())
        throw FitError("extract_offdiagonal: rank-deficient design (degenerate grid)");
    const Eigen::Vector3d params = lu.solve(design.transpose() * rhs);
    const double ssr = (design * params - rhs).squaredNorm();
    const double s2 = ssr / std::max(1.0, double(n - 3));

    OffDiagonalFit fit;
    fit.offset = params(0);
    fit.a = params(1);
    fit.b = params(2);
    fit.covariance = lu.inverse() * s2;
    return fit;
}

double fidelity(const PartialDensityMatrix& matrix, BellState ideal) {
    matrix.validate();
    switch (ideal) {
        case BellState::phi_plus:
        case BellState::phi_minus: {
            if (!matrix.c)
                throw ConfigError("fidelity: off-diagonal entry 'c' is unknown for a phi state");
            const double sign = ideal == BellState::phi_plus ? 1.0 : -1.0;
            return 0.5 * (matrix.p1 + matrix.p4) + sign * std::real(*matrix.c);
        }
        case BellState::psi_plus:
        case BellState::psi_minus: {
            if (!matrix.d)
                throw ConfigError("fidelity: off-diagonal entry 'd' is unknown for a psi state");
            const double sign = ideal == BellState::psi_plus ? 1.0 : -1.0;
            return 0.5 * (matrix.p2 + matrix.p3) + sign * std::real(*matrix.d);
        }
    }
    throw ConfigError("fidelity: unknown target state");
}

TomographyResult assemble_tomography(const NuclearPopulations& populations,
                                     const std::vector<double>& theta_grid,
                                     const std::vector<double>& sigma_z_values, BellState ideal) {
    TomographyResult out;
    out.matrix = matrix_from_populations(populations);
    const OffDiagonalFit fit = extract_offdiagonal(theta_grid, sigma_z_values);
    const cxd coherence(fit.a, fit.b);
    const bool phi = ideal == BellState::phi_plus || ideal == BellState::phi_minus;
    if (phi)
        out.matrix.c = coherence;
    else
        out.matrix.d = coherence;
    out.fit_covariance = fit.covariance;
    out.fidelity_value = fidelity(out.matrix, ideal);
    return out;
}

std::string TomographyResult::to_json() const {
    nlohmann::json j;
    j["basis_order"] = {"down_down", "down_up", "up_down", "up_up"};
    j["populations"] = {matrix.p1, matrix.p2, matrix.p3, matrix.p4};
    auto put = [&](const char* name, const std::optional<cxd>& v) {
        if (v) j["offdiagonals"][name] = {std::real(*v), std::imag(*v)};
    };
    put("a", matrix.a);
    put("b", matrix.b);
    put("c", matrix.c);
    put("d", matrix.d);
    put("e", matrix.e);
    put("f", matrix.f);
    j["unknown_entries"] = matrix.unknown_entries();
    j["fidelity"] = fidelity_value;
    std::vector<std::vector<double>> cov(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) cov[std::size_t(i)][std::size_t(k)] = fit_covariance(i, k);
    j["fit_covariance"] = cov;
    return j.dump(2);
}

BellRamseyFit bell_ramsey_t2(const std::vector<double>& tau_grid,
                             const std::vector<double>& sigma_z_values, double omega_cycles) {
    if (!(omega_cycles > 0)) throw ConfigError("bell_ramsey_t2: omega must be > 0");
    const RamseyFit fit = fit_damped_cosine_fixed_freq(tau_grid, sigma_z_values, omega_cycles);
    BellRamseyFit out;
    out.no_decay = fit.no_decay;
    out.t2 = fit.t2_star;
    out.uncertainty = fit.t2_uncertainty;
    return out;
}

} // namespace spinreg
