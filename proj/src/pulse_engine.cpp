#include "spinreg/pulse_engine.hpp"

#include <cmath>
#include <deque>

namespace spinreg {

namespace {

// Frame winding numbers: n(upper) = n(lower) + 1 along every near-resonant
// transition. Disconnected levels keep n = 0.
std::vector<int> assign_frame_numbers(int dim, const std::vector<const Transition*>& lines) {
    const std::size_t udim = std::size_t(dim);
    std::vector<int> n(udim, 0);
    std::vector<char> seen(udim, 0);
    std::vector<std::vector<std::pair<int, int>>> adj(udim); // (other, delta)
    for (const Transition* t : lines) {
        adj[std::size_t(t->from)].push_back({t->to, +1});
        adj[std::size_t(t->to)].push_back({t->from, -1});
    }
    for (int start = 0; start < dim; ++start) {
        if (seen[std::size_t(start)] || adj[std::size_t(start)].empty()) continue;
        seen[std::size_t(start)] = 1;
        n[std::size_t(start)] = 0;
        std::deque<int> queue{start};
        while (!queue.empty()) {
            const int cur = queue.front();
            queue.pop_front();
            for (auto [other, delta] : adj[std::size_t(cur)]) {
                const int want = n[std::size_t(cur)] + delta;
                if (!seen[std::size_t(other)]) {
                    seen[std::size_t(other)] = 1;
                    n[std::size_t(other)] = want;
                    queue.push_back(other);
                } else if (n[std::size_t(other)] != want) {
                    throw NumericError("pulse_propagator: inconsistent rotating-frame assignment");
                }
            }
        }
    }
    return n;
}

// diag(exp(+i 2 pi f n_k t)), with the phase reduced modulo one cycle.
Vector frame_diag(const std::vector<int>& n, double f_mhz, double t_us) {
    Vector d(Eigen::Index(n.size()));
    for (std::size_t k = 0; k < n.size(); ++k) {
        const double cycles = std::fmod(f_mhz * double(n[k]) * t_us, 1.0);
        d(Eigen::Index(k)) = std::polar(1.0, constants::TWO_PI * cycles);
    }
    return d;
}

} // namespace

Propagator pulse_propagator(const ResolvedPulse& pulse, const TransitionCatalog& catalog,
                            double rwa_cutoff_mhz, double t0_us, const ExecutionOptions& opts) {
    if (!(rwa_cutoff_mhz > 0)) throw ConfigError("pulse_propagator: rwa cutoff must be > 0");
    if (pulse.duration_us < 0 || pulse.rabi_mhz < 0)
        throw ConfigError("pulse_propagator: duration and rabi must be >= 0");

    const int dim = int(catalog.levels.size());
    const bool rf = pulse.channel == Channel::RF;

    std::vector<const Transition*> lines;
    for (const auto& t : catalog.transitions) {
        const cxd e = rf ? t.rf_elem : t.mw_elem;
        if (std::abs(e) <= opts.drive_threshold) continue;
        if (std::abs(t.freq_mhz - pulse.freq_mhz) < rwa_cutoff_mhz) lines.push_back(&t);
    }

    Propagator prop;
    prop.duration_us = opts.ideal_pulses ? 0.0 : pulse.duration_us;
    prop.frame.push_back(FramePhase{pulse.channel, pulse.freq_mhz, pulse.freq_mhz * prop.duration_us});

    if (lines.empty()) {
        // no transition inside the RWA window: free evolution, flagged
        prop.empty_resonance = true;
        Vector phases(dim);
        for (int k = 0; k < dim; ++k) {
            const double cycles =
                std::fmod(catalog.levels[std::size_t(k)].energy_mhz * prop.duration_us, 1.0);
            phases(k) = std::polar(1.0, -constants::TWO_PI * cycles);
        }
        prop.u.mat = Matrix(phases.asDiagonal());
        return prop;
    }

    const double scale = opts.angle_scale(pulse.channel);

    if (opts.ideal_pulses) {
        // exact rotation on the nearest resonant transition, zero wall time
        const Transition* best = lines.front();
        for (const Transition* t : lines)
            if (std::abs(t->freq_mhz - pulse.freq_mhz) < std::abs(best->freq_mhz - pulse.freq_mhz))
                best = t;
        const cxd elem = rf ? best->rf_elem : best->mw_elem;
        const double theta = constants::TWO_PI * pulse.rabi_mhz * std::abs(elem) *
                             pulse.duration_us * scale;
        const double axis_phase = pulse.phase_rad + std::arg(elem);
        Matrix u = Matrix::Identity(dim, dim);
        const double c = std::cos(theta / 2), s = std::sin(theta / 2);
        const int lo = best->from, hi = best->to;
        u(lo, lo) = c;
        u(hi, hi) = c;
        u(lo, hi) = cxd(0, -s) * std::polar(1.0, axis_phase);
        u(hi, lo) = cxd(0, -s) * std::polar(1.0, -axis_phase);
        std::vector<int> n(std::size_t(dim), 0);
        n[std::size_t(hi)] = 1;
        const Vector b0 = frame_diag(n, pulse.freq_mhz, t0_us);
        prop.u.mat = b0.asDiagonal().inverse() * u * Matrix(b0.asDiagonal());
        return prop;
    }

    const std::vector<int> n = assign_frame_numbers(dim, lines);

    Matrix h = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k)
        h(k, k) = catalog.levels[std::size_t(k)].energy_mhz - double(n[std::size_t(k)]) * pulse.freq_mhz;
    for (const Transition* t : lines) {
        const cxd elem = rf ? t->rf_elem : t->mw_elem;
        // H(upper, lower) = (rabi/2) conj(elem) e^{-i phase}
        const cxd coupling = 0.5 * pulse.rabi_mhz * scale * std::conj(elem) *
                             std::polar(1.0, -pulse.phase_rad);
        h(t->to, t->from) += coupling;
        h(t->from, t->to) += std::conj(coupling);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw NumericError("pulse_propagator: exponentiation failed");
    Vector phases(dim);
    for (int k = 0; k < dim; ++k) {
        const double cycles = std::fmod(es.eigenvalues()(k) * pulse.duration_us, 1.0);
        phases(k) = std::polar(1.0, -constants::TWO_PI * cycles);
    }
    const Matrix u_hat = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

    const Vector b0 = frame_diag(n, pulse.freq_mhz, t0_us);
    const Vector b1 = frame_diag(n, pulse.freq_mhz, t0_us + pulse.duration_us);
    prop.u.mat = b1.asDiagonal().inverse() * u_hat * Matrix(b0.asDiagonal());
    return prop;
}

// ----------------------------- sequence runner -----------------------------

namespace {

// Per-spin detuning operators in the eigenbasis, with a diagonal fast path.
struct NoiseOps {
    std::vector<Vector> diag;  // valid when diagonal[s]
    std::vector<Matrix> full;
    std::vector<bool> diagonal;
    bool all_diagonal = true;
};

NoiseOps build_noise_ops(const TransitionCatalog& catalog) {
    const int n_sites = 1 + catalog.config.n_nuclei();
    const int dim = int(catalog.levels.size());
    Matrix v(dim, dim);
    for (int k = 0; k < dim; ++k) v.col(k) = catalog.levels[std::size_t(k)].vec;

    NoiseOps ops;
    for (int s = 0; s < n_sites; ++s) {
        Matrix m = v.adjoint() * site_operator(spin_z(), s, n_sites) * v;
        double off = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (i != j) off = std::max(off, std::abs(m(i, j)));
        const bool diag = off < 1e-12;
        ops.diagonal.push_back(diag);
        ops.all_diagonal &= diag;
        ops.diag.push_back(m.diagonal());
        ops.full.push_back(std::move(m));
    }
    return ops;
}

// Trajectory detuning state: quasi-static values fixed at birth, OU values
// advanced with the exact one-step update.
struct NoiseWalker {
    const DephasingNoise* noise = nullptr;
    std::vector<double> values_khz;
    std::mt19937_64 rng;
    std::normal_distribution<double> normal{0.0, 1.0};

    void init(const DephasingNoise& nz, std::uint64_t seed) {
        noise = &nz;
        rng = make_rng(seed);
        values_khz.assign(1 + nz.nuclei.size(), 0.0);
        auto params = [&](std::size_t s) -> const SpinNoise& {
            return s == 0 ? nz.electron : nz.nuclei[s - 1];
        };
        const double r = nz.cross_correlation;
        const double chol = std::sqrt(std::max(0.0, 1.0 - r * r));
        std::vector<double> z(values_khz.size());
        // draw order: electron, then the correlated nuclear pair, then the rest
        z[0] = normal(rng);
        if (values_khz.size() >= 3) {
            const double z1 = normal(rng), z2 = normal(rng);
            z[1] = z1;
            z[2] = r * z1 + chol * z2;
        } else if (values_khz.size() == 2) {
            z[1] = normal(rng);
        }
        for (std::size_t s = 3; s < values_khz.size(); ++s) z[s] = normal(rng);
        for (std::size_t s = 0; s < values_khz.size(); ++s)
            values_khz[s] = params(s).sigma_khz * z[s];
    }

    bool active() const { return noise && !noise->silent(); }

    bool any_ou() const {
        if (!noise) return false;
        auto is_ou = [](const SpinNoise& s) { return s.kind == NoiseKind::ou && s.sigma_khz > 0; };
        if (is_ou(noise->electron)) return true;
        for (const auto& n : noise->nuclei)
            if (is_ou(n)) return true;
        return false;
    }

    double min_tau_c_us() const {
        double t = std::numeric_limits<double>::infinity();
        auto upd = [&](const SpinNoise& s) {
            if (s.kind == NoiseKind::ou && s.sigma_khz > 0) t = std::min(t, s.tau_c_ms * 1e3);
        };
        upd(noise->electron);
        for (const auto& n : noise->nuclei) upd(n);
        return t;
    }

    void advance(double dt_us) {
        if (!noise) return;
        auto params = [&](std::size_t s) -> const SpinNoise& {
            return s == 0 ? noise->electron : noise->nuclei[s - 1];
        };
        const double r = noise->cross_correlation;
        const double chol = std::sqrt(std::max(0.0, 1.0 - r * r));
        std::vector<double> z(values_khz.size(), 0.0);
        z[0] = normal(rng);
        if (values_khz.size() >= 3) {
            const double z1 = normal(rng), z2 = normal(rng);
            z[1] = z1;
            z[2] = r * z1 + chol * z2;
        } else if (values_khz.size() == 2) {
            z[1] = normal(rng);
        }
        for (std::size_t s = 3; s < values_khz.size(); ++s) z[s] = normal(rng);
        for (std::size_t s = 0; s < values_khz.size(); ++s) {
            const SpinNoise& p = params(s);
            if (p.kind != NoiseKind::ou || p.sigma_khz == 0) continue; // quasi-static: frozen
            const double decay = std::exp(-dt_us / (p.tau_c_ms * 1e3));
            values_khz[s] = values_khz[s] * decay + p.sigma_khz * std::sqrt(1.0 - decay * decay) * z[s];
        }
    }
};

struct DelayEvolver {
    const TransitionCatalog* catalog;
    const NoiseOps* ops;
    Vector energies; // MHz

    explicit DelayEvolver(const TransitionCatalog& cat, const NoiseOps& nops) : catalog(&cat), ops(&nops) {
        const int dim = int(cat.levels.size());
        energies.resize(dim);
        for (int k = 0; k < dim; ++k) energies(k) = cat.levels[std::size_t(k)].energy_mhz;
    }

    // one segment with fixed detunings (MHz per spin)
    void step(Matrix& rho, double t_us, const std::vector<double>& detunings_mhz) const {
        const int dim = int(rho.rows());
        bool nontrivial_full = false;
        for (std::size_t s = 0; s < detunings_mhz.size(); ++s)
            if (detunings_mhz[s] != 0.0 && !ops->diagonal[s]) nontrivial_full = true;

        if (!nontrivial_full) {
            Vector u(dim);
            for (int k = 0; k < dim; ++k) {
                double e = std::real(energies(k));
                for (std::size_t s = 0; s < detunings_mhz.size(); ++s)
                    if (detunings_mhz[s] != 0.0) e += detunings_mhz[s] * std::real(ops->diag[s](k));
                u(k) = std::polar(1.0, -constants::TWO_PI * std::fmod(e * t_us, 1.0));
            }
            rho = u.asDiagonal() * rho * u.asDiagonal().inverse();
            return;
        }
        Matrix h = Matrix(energies.asDiagonal());
        for (std::size_t s = 0; s < detunings_mhz.size(); ++s)
            if (detunings_mhz[s] != 0.0) h += detunings_mhz[s] * ops->full[s];
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        Vector ph(dim);
        for (int k = 0; k < dim; ++k)
            ph(k) = std::polar(1.0, -constants::TWO_PI * std::fmod(es.eigenvalues()(k) * t_us, 1.0));
        const Matrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
        rho = u * rho * u.adjoint();
    }
};

} // namespace

std::vector<PointResult> run_sequence(const Matrix& rho0, const Sequence& seq,
                                      const EngineContext& ctx, const Observable& obs) {
    if (!ctx.catalog) throw ConfigError("run_sequence: missing catalog");
    seq.validate();
    if (ctx.meissner) ctx.meissner->validate();
    const TransitionCatalog& catalog = *ctx.catalog;
    const NoiseOps nops = build_noise_ops(catalog);
    const DelayEvolver evolver(catalog, nops);
    const std::size_t n_spins = 1 + std::size_t(catalog.config.n_nuclei());

    const bool has_noise = ctx.noise && !ctx.noise->silent();
    if (ctx.noise && ctx.noise->nuclei.size() != std::size_t(catalog.config.n_nuclei()))
        throw ConfigError("run_sequence: noise spin count does not match the register");
    const int n_traj = has_noise ? std::max(1, ctx.opts.n_traj) : 1;

    std::vector<PointResult> out;
    out.reserve(seq.n_points());

    for (std::size_t point = 0; point < seq.n_points(); ++point) {
        const double s = seq.sweep_value(point);
        PointResult pr;
        pr.sweep_value = s;
        Matrix rho_acc = Matrix::Zero(rho0.rows(), rho0.cols());
        MeanAccumulator acc;

        for (int traj = 0; traj < n_traj; ++traj) {
            NoiseWalker walker;
            if (has_noise)
                walker.init(*ctx.noise, derive_seed(ctx.opts.seed, std::uint64_t(point),
                                                    std::uint64_t(traj)));

            Matrix rho = rho0;
            double wall = 0.0;
            bool first_pulse_done = false;
            double jump_time = std::numeric_limits<double>::infinity();
            Matrix rho_at_read = rho0;
            bool read_seen = false;

            auto delay_with_noise = [&](double duration) {
                if (duration <= 0) return;
                double remaining = duration;
                // substep for OU fluctuation; quasi-static runs one segment
                double dt = remaining;
                if (walker.active() && walker.any_ou())
                    dt = std::max(1e-9, walker.min_tau_c_us() / ctx.opts.ou_substeps_per_tau_c);
                while (remaining > 1e-15) {
                    double step_len = std::min(dt, remaining);
                    // split at the superconducting-film jump
                    if (ctx.meissner && wall < jump_time && wall + step_len > jump_time)
                        step_len = jump_time - wall;
                    std::vector<double> det(n_spins, 0.0);
                    if (walker.active())
                        for (std::size_t k = 0; k < n_spins; ++k) det[k] = walker.values_khz[k] * 1e-3;
                    if (ctx.meissner && wall >= jump_time) det[0] += -ctx.meissner->delta_f_mhz;
                    evolver.step(rho, step_len, det);
                    if (walker.active()) walker.advance(step_len);
                    wall += step_len;
                    remaining -= step_len;
                }
            };

            for (const auto& item : seq.items) {
                if (const auto* p = std::get_if<PulseItem>(&item)) {
                    ResolvedPulse rp;
                    rp.channel = p->channel;
                    rp.freq_mhz = p->freq_mhz.at(s) + ctx.drive_offset_mhz;
                    rp.phase_rad = p->phase_rad.at(s);
                    rp.rabi_mhz = p->rabi_mhz;
                    rp.duration_us = p->duration_us.at(s);
                    const double cutoff = ctx.opts.rwa_cutoff_mhz.value_or(
                        ctx.opts.rwa_cutoff_factor * std::max(rp.rabi_mhz, 1e-12));
                    const Propagator prop = pulse_propagator(rp, catalog, cutoff, wall, ctx.opts);
                    rho = prop.u.mat * rho * prop.u.mat.adjoint();
                    if (walker.active() && prop.duration_us > 0) walker.advance(prop.duration_us);
                    wall += prop.duration_us;
                    if (!first_pulse_done) {
                        first_pulse_done = true;
                        if (ctx.meissner)
                            jump_time = wall + ctx.meissner->t_jump_after_first_pulse_us;
                    }
                } else if (const auto* d = std::get_if<DelayItem>(&item)) {
                    delay_with_noise(d->duration_us.at(s));
                } else if (const auto* l = std::get_if<LaserItem>(&item)) {
                    if (!ctx.readout)
                        throw ConfigError("run_sequence: Laser item requires a readout model");
                    const double dur = l->duration_us.at(s);
                    rho = apply_laser_pump(rho, catalog.levels, l->transition, dur, *ctx.readout);
                    if (walker.active()) walker.advance(dur);
                    wall += dur;
                } else {
                    rho_at_read = rho;
                    read_seen = true;
                }
            }
            if (!read_seen) rho_at_read = rho;
            rho_acc += rho_at_read;
            if (obs) acc.add(obs(rho_at_read));
        }

        pr.rho = rho_acc / double(n_traj);
        pr.obs_mean = acc.mean();
        pr.obs_stderr = acc.stderr_mean();
        out.push_back(std::move(pr));
    }
    return out;
}

// ------------------------------ state helpers ------------------------------

Matrix level_state(const TransitionCatalog& catalog, const std::string& label) {
    const int dim = int(catalog.levels.size());
    Matrix rho = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k)
        if (catalog.levels[std::size_t(k)].label == label) {
            rho(k, k) = 1.0;
            return rho;
        }
    throw ConfigError("level_state: no level labeled |" + label + ">");
}

Matrix mixed_state(const TransitionCatalog& catalog,
                   const std::vector<std::pair<std::string, double>>& weights) {
    const int dim = int(catalog.levels.size());
    Matrix rho = Matrix::Zero(dim, dim);
    double total = 0;
    for (const auto& [label, w] : weights) {
        if (w < 0) throw ConfigError("mixed_state: negative weight");
        bool found = false;
        for (int k = 0; k < dim; ++k)
            if (catalog.levels[std::size_t(k)].label == label) {
                rho(k, k) += w;
                found = true;
                break;
            }
        if (!found) throw ConfigError("mixed_state: no level labeled |" + label + ">");
        total += w;
    }
    if (total <= 0) throw ConfigError("mixed_state: weights sum to zero");
    return rho / total;
}

Matrix sigma_z_op(const TransitionCatalog& catalog, int site) {
    const int n_sites = 1 + catalog.config.n_nuclei();
    const int dim = int(catalog.levels.size());
    Matrix v(dim, dim);
    for (int k = 0; k < dim; ++k) v.col(k) = catalog.levels[std::size_t(k)].vec;
    return v.adjoint() * (2.0 * site_operator(spin_z(), site, n_sites)) * v;
}

double expect(const Matrix& rho, const Matrix& op) { return std::real((rho * op).trace()); }

} // namespace spinreg
