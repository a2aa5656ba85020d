#include "spinreg/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace spinreg {

namespace {
constexpr double TWO_PI = 6.283185307179586476925286766559;
}

LsqResult levenberg_marquardt(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                              Eigen::VectorXd p0, int max_iterations, double tol) {
    const int k = int(p0.size());
    Eigen::VectorXd p = std::move(p0);
    Eigen::VectorXd r = residual(p);
    double ssr = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    Eigen::MatrixXd jac(r.size(), k);
    auto jacobian = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& r0) {
        for (int j = 0; j < k; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(at(j)));
            Eigen::VectorXd pj = at;
            pj(j) += h;
            jac.col(j) = (residual(pj) - r0) / h;
        }
    };

    for (; iter < max_iterations; ++iter) {
        jacobian(p, r);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        if (jtr.norm() < tol * std::max(1.0, std::sqrt(ssr))) {
            converged = true;
            break;
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            for (int j = 0; j < k; ++j) damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(jtr);
            const Eigen::VectorXd p_try = p - step;
            const Eigen::VectorXd r_try = residual(p_try);
            const double ssr_try = r_try.squaredNorm();
            if (std::isfinite(ssr_try) && ssr_try <= ssr) {
                const double improvement = ssr - ssr_try;
                p = p_try;
                r = r_try;
                ssr = ssr_try;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (improvement < tol * std::max(1.0, ssr) && step.norm() < tol * std::max(1.0, p.norm()))
                    converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) converged = true; // no descent direction left: accept the basin
        if (!stepped || converged) break;
    }

    jacobian(p, r);
    const int dof = std::max(1, int(r.size()) - k);
    const double s2 = ssr / double(dof);
    Eigen::MatrixXd cov = (jac.transpose() * jac)
                              .completeOrthogonalDecomposition()
                              .pseudoInverse() *
                          s2;

    LsqResult out;
    out.params = p;
    out.covariance = cov;
    out.ssr = ssr;
    out.iterations = iter;
    out.converged = converged || iter < max_iterations;
    return out;
}

// ------------------------------ stretched exp ------------------------------

DecayFit fit_stretched_exp(const std::vector<double>& t, const std::vector<double>& y,
                           std::optional<double> fix_n) {
    if (t.size() != y.size() || t.size() < 5)
        throw FitError("fit_stretched_exp: need at least 5 points");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw FitError("fit_stretched_exp: t must be strictly increasing");
    if (fix_n && !(*fix_n > 0)) throw FitError("fit_stretched_exp: fixed n must be > 0");

    double ymin = y[0], ymax = y[0];
    for (double v : y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    DecayFit fit;
    fit.n_fixed = fix_n.has_value();
    if (ymax - ymin < 1e-12 * std::max(1.0, std::abs(ymax))) {
        fit.degenerate = true;
        fit.amplitude = 0.0;
        fit.offset = y[0];
        fit.stretch_n = fix_n.value_or(1.0);
        fit.t2 = 0.0;
        return fit;
    }

    // log-linearized seed: ln(-ln((y-c)/A)) = n ln t - n ln T2
    const double c0 = y.back();
    const double a0 = y.front() - c0;
    double n0 = fix_n.value_or(1.5);
    double log_t2_0 = std::log(std::max(t.back() / 2.0, 1e-12));
    {
        std::vector<double> u, v;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] <= 0 || a0 == 0) continue;
            const double frac = (y[i] - c0) / a0;
            if (frac <= 1e-4 || frac >= 0.999) continue;
            u.push_back(std::log(t[i]));
            v.push_back(std::log(-std::log(frac)));
        }
        if (u.size() >= 2) {
            double su = 0, sv = 0, suu = 0, suv = 0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                su += u[i];
                sv += v[i];
                suu += u[i] * u[i];
                suv += u[i] * v[i];
            }
            const double nn = double(u.size());
            const double det = nn * suu - su * su;
            if (std::abs(det) > 1e-12) {
                const double slope = (nn * suv - su * sv) / det;
                const double intercept = (sv - slope * su) / nn;
                if (slope > 0.05 && slope < 10) {
                    if (!fix_n) n0 = slope;
                    log_t2_0 = -intercept / (fix_n ? *fix_n : slope);
                }
            }
        }
    }

    auto model = [&](const Eigen::VectorXd& p, double tt) {
        const double a = p(0), log_t2 = p(1);
        const double n = fix_n ? *fix_n : p(2);
        const double c = fix_n ? p(2) : p(3);
        if (tt <= 0) return a + c;
        return a * std::exp(-std::pow(tt / std::exp(log_t2), n)) + c;
    };
    auto residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(Eigen::Index(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i) r(Eigen::Index(i)) = model(p, t[i]) - y[i];
        return r;
    };

    Eigen::VectorXd p0(fix_n ? 3 : 4);
    if (fix_n)
        p0 << a0, log_t2_0, c0;
    else
        p0 << a0, log_t2_0, n0, c0;
    const LsqResult res = levenberg_marquardt(residual, p0);
    if (!res.converged) throw FitError("fit_stretched_exp: did not converge (ssr=" +
                                       format_double(res.ssr) + ")");

    fit.amplitude = res.params(0);
    fit.t2 = std::exp(res.params(1));
    fit.stretch_n = fix_n ? *fix_n : res.params(2);
    fit.offset = fix_n ? res.params(2) : res.params(3);
    fit.covariance = res.covariance;
    if (fit.stretch_n <= 0) throw FitError("fit_stretched_exp: nonpositive stretch exponent");
    return fit;
}

ScalingFit fit_dd_scaling(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw FitError("fit_dd_scaling: need at least 3 pairs");
    std::vector<double> x, y;
    for (const auto& [n, t_coh] : pairs) {
        if (!(n >= 1)) throw FitError("fit_dd_scaling: N must be >= 1");
        if (!(t_coh > 0)) throw FitError("fit_dd_scaling: coherence times must be > 0");
        x.push_back(std::log(n));
        y.push_back(std::log(t_coh));
    }
    const double nn = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = nn * sxx - sx * sx;
    if (std::abs(det) < 1e-12) throw FitError("fit_dd_scaling: degenerate design (repeated N)");
    ScalingFit fit;
    fit.exponent = (nn * sxy - sx * sy) / det;
    const double intercept = (sy - fit.exponent * sx) / nn;
    fit.prefactor = std::exp(intercept);
    double ssr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + fit.exponent * x[i]);
        ssr += r * r;
    }
    const double s2 = ssr / std::max(1.0, nn - 2.0);
    fit.covariance(0, 0) = s2 * nn / det;       // exponent variance
    fit.covariance(1, 1) = s2 * sxx / det;      // intercept variance
    fit.covariance(0, 1) = fit.covariance(1, 0) = -s2 * sx / det;
    return fit;
}

// ------------------------------ damped cosine ------------------------------

namespace {

// Dominant discrete-Fourier frequency over a uniform-ish grid; throws when no
// peak stands above the noise floor.
double dft_peak_frequency(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    const double span = t.back() - t.front();
    if (!(span > 0)) throw FitError("fit_ramsey: zero time span");
    double mean = 0;
    for (double v : y) mean += v;
    mean /= double(n);

    const int n_freq = int(n / 2);
    if (n_freq < 2) throw FitError("fit_ramsey: too few samples");
    std::vector<double> power(std::size_t(n_freq), 0.0);
    double best = 0;
    int best_k = 0;
    for (int k = 1; k <= n_freq; ++k) {
        const double f = double(k) / span;
        std::complex<double> s(0, 0);
        for (std::size_t i = 0; i < n; ++i)
            s += (y[i] - mean) * std::polar(1.0, -TWO_PI * f * t[i]);
        const double p = std::norm(s);
        power[std::size_t(k - 1)] = p;
        if (p > best) {
            best = p;
            best_k = k;
        }
    }
    std::vector<double> sorted = power;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    if (best_k == 0 || best < 5.0 * std::max(median, 1e-300))
        throw FitError("fit_ramsey: no spectral peak above the noise floor");

    // parabolic refinement on log power
    double f0 = double(best_k) / span;
    if (best_k > 1 && best_k < n_freq) {
        const double pa = power[std::size_t(best_k - 2)];
        const double pb = power[std::size_t(best_k - 1)];
        const double pc = power[std::size_t(best_k)];
        const double denom = pa - 2 * pb + pc;
        if (std::abs(denom) > 0) {
            const double shift = 0.5 * (pa - pc) / denom;
            if (std::abs(shift) < 1.0) f0 = (double(best_k) + shift) / span;
        }
    }
    return f0;
}

RamseyFit damped_cosine_impl(const std::vector<double>& t, const std::vector<double>& y,
                             std::optional<double> fixed_freq) {
    if (t.size() != y.size() || t.size() < 8)
        throw FitError("fit_ramsey: need at least 8 samples");
    const double span = t.back() - t.front();
    const double f0 = fixed_freq ? *fixed_freq : dft_peak_frequency(t, y);
    if (!fixed_freq && f0 * span < 2.0)
        throw FitError("fit_ramsey: fewer than two oscillation periods sampled");

    double mean = 0;
    for (double v : y) mean += v;
    mean /= double(t.size());
    double ymin = y[0], ymax = y[0];
    for (double v : y) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    std::complex<double> s(0, 0);
    for (std::size_t i = 0; i < t.size(); ++i)
        s += (y[i] - mean) * std::polar(1.0, -TWO_PI * f0 * t[i]);
    const double phase0 = std::arg(s);
    const double a0 = (ymax - ymin) / 2;

    // params: A, g (envelope rate, 1/T2^2), phase, offset [, freq]
    auto model = [&](const Eigen::VectorXd& p, double tt) {
        const double f = fixed_freq ? *fixed_freq : p(4);
        return p(0) * std::exp(-p(1) * tt * tt) * std::cos(TWO_PI * f * tt + p(2)) + p(3);
    };
    auto residual = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(Eigen::Index(t.size()));
        for (std::size_t i = 0; i < t.size(); ++i) r(Eigen::Index(i)) = model(p, t[i]) - y[i];
        return r;
    };
    Eigen::VectorXd p0(fixed_freq ? 4 : 5);
    p0(0) = a0;
    p0(1) = 1.0 / (span * span);
    p0(2) = phase0;
    p0(3) = mean;
    if (!fixed_freq) p0(4) = f0;
    LsqResult res = levenberg_marquardt(residual, p0);
    if (!res.converged)
        throw FitError("fit_ramsey: did not converge (ssr=" + format_double(res.ssr) + ")");

    RamseyFit fit;
    fit.amplitude = res.params(0);
    fit.phase = res.params(2);
    fit.offset = res.params(3);
    fit.freq = fixed_freq ? *fixed_freq : res.params(4);
    const double g = res.params(1);
    const double g_var = res.covariance(1, 1);
    if (g <= 0 || 1.0 / std::sqrt(g) > 50.0 * span) {
        fit.no_decay = true;
        fit.t2_star = std::numeric_limits<double>::infinity();
    } else {
        fit.t2_star = 1.0 / std::sqrt(g);
        fit.t2_uncertainty = g_var > 0 ? 0.5 * std::pow(g, -1.5) * std::sqrt(g_var) : 0.0;
    }
    fit.covariance = res.covariance;
    if (fit.amplitude < 0) { // normalize sign convention
        fit.amplitude = -fit.amplitude;
        fit.phase += fit.phase > 0 ? -3.14159265358979323846 : 3.14159265358979323846;
    }
    return fit;
}

} // namespace

RamseyFit fit_ramsey(const std::vector<double>& t, const std::vector<double>& y) {
    return damped_cosine_impl(t, y, std::nullopt);
}

RamseyFit fit_damped_cosine_fixed_freq(const std::vector<double>& t, const std::vector<double>& y,
                                       double freq) {
    if (!(freq > 0)) throw FitError("fit_damped_cosine_fixed_freq: frequency must be > 0");
    return damped_cosine_impl(t, y, freq);
}

JumpFit detect_frequency_jump(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 24)
        throw FitError("detect_frequency_jump: need at least 24 samples");
    const double f_global = dft_peak_frequency(t, y);
    const double period = 1.0 / f_global;

    // candidate change points leave at least two periods on each side
    std::size_t k_min = 0, k_max = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] - t.front() >= 2 * period && k_min == 0) k_min = k;
        if (t.back() - t[k] >= 2 * period) k_max = k;
    }
    if (k_min == 0 || k_max <= k_min)
        throw FitError("detect_frequency_jump: trace too short for two periods per side");

    auto segment_fit = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> ts(t.begin() + long(lo), t.begin() + long(hi));
        std::vector<double> ys(y.begin() + long(lo), y.begin() + long(hi));
        return damped_cosine_impl(ts, ys, std::nullopt);
    };
    auto segment_ssr = [&](std::size_t lo, std::size_t hi, const RamseyFit& fit) {
        double ssr = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double g = std::isinf(fit.t2_star) ? 0.0 : 1.0 / (fit.t2_star * fit.t2_star);
            const double m = fit.amplitude * std::exp(-g * t[i] * t[i]) *
                                 std::cos(TWO_PI * fit.freq * t[i] + fit.phase) +
                             fit.offset;
            ssr += (m - y[i]) * (m - y[i]);
        }
        return ssr;
    };

    const std::size_t stride = std::max<std::size_t>(1, (k_max - k_min) / 160);
    double best_ssr = std::numeric_limits<double>::infinity();
    std::size_t best_k = k_min;
    RamseyFit best_a, best_b;
    for (std::size_t k = k_min; k <= k_max; k += stride) {
        RamseyFit fa, fb;
        try {
            fa = segment_fit(0, k);
            fb = segment_fit(k, t.size());
        } catch (const FitError&) {
            continue;
        }
        const double ssr = segment_ssr(0, k, fa) + segment_ssr(k, t.size(), fb);
        if (ssr < best_ssr) {
            best_ssr = ssr;
            best_k = k;
            best_a = fa;
            best_b = fb;
        }
    }
    if (!std::isfinite(best_ssr)) throw FitError("detect_frequency_jump: no valid change point");

    // refine within one stride
    if (stride > 1) {
        const std::size_t lo = best_k > stride ? best_k - stride : k_min;
        const std::size_t hi = std::min(best_k + stride, k_max);
        for (std::size_t k = lo; k <= hi; ++k) {
            RamseyFit fa, fb;
            try {
                fa = segment_fit(0, k);
                fb = segment_fit(k, t.size());
            } catch (const FitError&) {
                continue;
            }
            const double ssr = segment_ssr(0, k, fa) + segment_ssr(k, t.size(), fb);
            if (ssr < best_ssr) {
                best_ssr = ssr;
                best_k = k;
                best_a = fa;
                best_b = fb;
            }
        }
    }

    JumpFit out;
    out.f_before = best_a.freq;
    out.f_after = best_b.freq;
    out.t_jump = t[best_k];
    // resolvable only if the segments disagree by more than the shorter
    // segment's Fourier resolution
    const double span_a = t[best_k] - t.front();
    const double span_b = t.back() - t[best_k];
    out.resolution = 1.0 / std::max(1e-12, std::min(span_a, span_b));
    if (std::abs(out.f_before - out.f_after) < out.resolution) {
        out.no_jump = true;
        out.f_before = out.f_after = f_global;
        out.t_jump = 0.0;
    }
    return out;
}

double estimate_pi_fidelity(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw FitError("estimate_pi_fidelity: no data");
    for (const auto& [n, amp] : pairs) {
        if (!(n >= 1)) throw FitError("estimate_pi_fidelity: pulse count must be >= 1");
        if (!(amp > 0)) throw FitError("estimate_pi_fidelity: amplitudes must be > 0");
    }
    if (pairs.size() == 1) return std::pow(pairs[0].second, 1.0 / pairs[0].first);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double nn = double(pairs.size());
    for (const auto& [n, amp] : pairs) {
        sx += n;
        sy += std::log(amp);
        sxx += n * n;
        sxy += n * std::log(amp);
    }
    const double det = nn * sxx - sx * sx;
    if (std::abs(det) < 1e-12) throw FitError("estimate_pi_fidelity: degenerate design");
    const double slope = (nn * sxy - sx * sy) / det;
    return std::exp(slope);
}

XyData parse_xy_csv(const std::string& text) {
    XyData data;
    std::istringstream iss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(iss, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_char(line, ',');
        if (cells.size() < 2)
            throw ConfigError("line " + std::to_string(lineno) + ": expected x,y[,stderr]");
        if (lineno == 1) {
            // tolerate a header row
            try {
                parse_double(cells[0]);
            } catch (const ConfigError&) {
                continue;
            }
        }
        data.x.push_back(parse_double(cells[0]));
        data.y.push_back(parse_double(cells[1]));
        if (cells.size() >= 3 && !trim(cells[2]).empty()) data.yerr.push_back(parse_double(cells[2]));
    }
    if (data.x.empty()) throw ConfigError("empty data file");
    return data;
}

} // namespace spinreg
