#include "spinreg/experiments.hpp"

#include <cmath>
#include <sstream>

namespace spinreg {

namespace {

const char* ARROW_E_UP = "↑";
const char* ARROW_E_DOWN = "↓";
const char* ARROW_N_UP = "⇑";
const char* ARROW_N_DOWN = "⇓";

constexpr double PI = 3.14159265358979323846;

std::string all_down(int n_nuclei) {
    std::string s;
    for (int k = 0; k < n_nuclei; ++k) s += ARROW_N_DOWN;
    return s;
}

} // namespace

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "rabi") return ExperimentKind::rabi;
    if (s == "ramsey") return ExperimentKind::ramsey;
    if (s == "hahn-echo" || s == "hahn_echo" || s == "echo") return ExperimentKind::hahn_echo;
    if (s == "cpmg") return ExperimentKind::cpmg;
    if (s == "xy4") return ExperimentKind::xy4;
    if (s == "xy8") return ExperimentKind::xy8;
    if (s == "nmr-sweep" || s == "nmr_sweep") return ExperimentKind::nmr_sweep;
    if (s == "odmr-sweep" || s == "odmr_sweep") return ExperimentKind::odmr_sweep;
    if (s == "t1") return ExperimentKind::t1;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::rabi: return "rabi";
        case ExperimentKind::ramsey: return "ramsey";
        case ExperimentKind::hahn_echo: return "hahn-echo";
        case ExperimentKind::cpmg: return "cpmg";
        case ExperimentKind::xy4: return "xy4";
        case ExperimentKind::xy8: return "xy8";
        case ExperimentKind::nmr_sweep: return "nmr-sweep";
        case ExperimentKind::odmr_sweep: return "odmr-sweep";
        case ExperimentKind::t1: return "t1";
    }
    return "?";
}

double pi_duration_us(const Transition& t, Channel ch, double rabi_mhz) {
    const double elem = std::abs(ch == Channel::RF ? t.rf_elem : t.mw_elem);
    if (elem <= 0 || rabi_mhz <= 0)
        throw ConfigError("pi_duration_us: transition is not driveable on this channel");
    return 1.0 / (2.0 * rabi_mhz * elem);
}

namespace {

int flipped_site(const TransitionCatalog& catalog, const Transition& t) {
    // first site whose dominant basis state differs across the transition
    const int n_sites = 1 + catalog.config.n_nuclei();
    const Level& a = catalog.levels[std::size_t(t.from)];
    const Level& b = catalog.levels[std::size_t(t.to)];
    for (int s = 0; s < n_sites; ++s) {
        const int bit_a = (a.index >> (n_sites - 1 - s)) & 1;
        const int bit_b = (b.index >> (n_sites - 1 - s)) & 1;
        if (bit_a != bit_b) return s;
    }
    return 0;
}

} // namespace

Experiment make_experiment(const ExperimentParams& params, const TransitionCatalog& catalog) {
    if (params.grid.empty()) throw ConfigError("make_experiment: empty sweep grid");
    const Transition& target = params.from_label.empty()
                                   ? catalog.esr_line(all_down(catalog.config.n_nuclei()))
                                   : catalog.require(params.from_label, params.to_label);
    const double t_pi = pi_duration_us(target, params.channel, params.rabi_mhz);
    const double f = target.freq_mhz;

    Experiment exp;
    exp.params = params;
    exp.pi_duration_us = t_pi;
    exp.observable_site = params.channel == Channel::MW ? 0 : flipped_site(catalog, target);

    Sequence& seq = exp.sequence;
    auto pulse = [&](Bound freq, Bound phase, Bound duration) {
        PulseItem p;
        p.channel = params.channel;
        p.freq_mhz = freq;
        p.phase_rad = phase;
        p.rabi_mhz = params.rabi_mhz;
        p.duration_us = duration;
        seq.items.emplace_back(p);
    };
    const Bound f_fixed = Bound::fixed(f);
    const Bound ph_x = Bound::fixed(0.0);
    const Bound ph_y = Bound::fixed(PI / 2);
    const Bound half_pi = Bound::fixed(t_pi / 2);
    const Bound full_pi = Bound::fixed(t_pi);

    switch (params.kind) {
        case ExperimentKind::rabi:
            seq.sweep = Sweep{"t_us", params.grid};
            pulse(f_fixed, ph_x, Bound::swept(1.0));
            exp.final_projection = false;
            break;
        case ExperimentKind::ramsey:
            seq.sweep = Sweep{"tau_us", params.grid};
            pulse(f_fixed, ph_x, half_pi);
            seq.items.emplace_back(DelayItem{Bound::swept(1.0)});
            pulse(f_fixed, Bound::swept(constants::TWO_PI * params.virtual_detuning_mhz), half_pi);
            break;
        case ExperimentKind::hahn_echo:
        case ExperimentKind::cpmg:
        case ExperimentKind::xy4:
        case ExperimentKind::xy8: {
            int n = params.kind == ExperimentKind::hahn_echo ? 1 : params.n_pulses;
            if (n < 1) throw ConfigError("make_experiment: refocusing pulse count must be >= 1");
            if (params.kind == ExperimentKind::xy4 && n % 4 != 0)
                throw ConfigError("make_experiment: xy4 needs a multiple of 4 pulses");
            if (params.kind == ExperimentKind::xy8 && n % 8 != 0)
                throw ConfigError("make_experiment: xy8 needs a multiple of 8 pulses");
            auto refocus_phase = [&](int i) -> Bound {
                if (params.kind == ExperimentKind::xy4) {
                    static const double xy4[4] = {0, PI / 2, 0, PI / 2};
                    return Bound::fixed(xy4[i % 4]);
                }
                if (params.kind == ExperimentKind::xy8) {
                    static const double xy8[8] = {0, PI / 2, 0, PI / 2, PI / 2, 0, PI / 2, 0};
                    return Bound::fixed(xy8[i % 8]);
                }
                return ph_y; // CPMG / Hahn
            };
            seq.sweep = Sweep{"tau_us", params.grid};
            pulse(f_fixed, ph_x, half_pi);
            seq.items.emplace_back(DelayItem{Bound::swept(1.0 / (2.0 * n))});
            for (int i = 0; i < n; ++i) {
                pulse(f_fixed, refocus_phase(i), full_pi);
                seq.items.emplace_back(
                    DelayItem{Bound::swept(i + 1 == n ? 1.0 / (2.0 * n) : 1.0 / n)});
            }
            pulse(f_fixed, ph_x, half_pi);
            break;
        }
        case ExperimentKind::nmr_sweep:
        case ExperimentKind::odmr_sweep:
            seq.sweep = Sweep{"f_mhz", params.grid};
            pulse(Bound::swept(1.0), ph_x, full_pi);
            exp.final_projection = false;
            break;
        case ExperimentKind::t1:
            seq.sweep = Sweep{"tau_us", params.grid};
            seq.items.emplace_back(DelayItem{Bound::swept(1.0)});
            exp.final_projection = false;
            break;
    }
    seq.items.emplace_back(ReadItem{});
    seq.validate();
    return exp;
}

Experiment apply_meissner(Experiment exp, const MeissnerEvent& event) {
    event.validate();
    exp.meissner = event;
    return exp;
}

std::vector<CurvePoint> run_experiment(const Experiment& exp, const Matrix& rho0,
                                       EngineContext ctx) {
    ctx.meissner = exp.meissner;
    ctx.drive_offset_mhz += exp.drive_offset_mhz;
    const Matrix op = sigma_z_op(*ctx.catalog, exp.observable_site);
    const Observable obs = [&op](const Matrix& rho) { return expect(rho, op); };

    const auto plus = run_sequence(rho0, exp.sequence, ctx, obs);
    std::vector<CurvePoint> out(plus.size());
    if (!exp.final_projection) {
        for (std::size_t i = 0; i < plus.size(); ++i)
            out[i] = {plus[i].sweep_value, plus[i].obs_mean, plus[i].obs_stderr};
        return out;
    }
    const auto minus = run_sequence(rho0, toggle_final_phase(exp.sequence), ctx, obs);
    for (std::size_t i = 0; i < plus.size(); ++i) {
        out[i].x = plus[i].sweep_value;
        out[i].mean = 0.5 * (plus[i].obs_mean - minus[i].obs_mean);
        out[i].stderr = 0.5 * std::hypot(plus[i].obs_stderr, minus[i].obs_stderr);
    }
    return out;
}

std::vector<CurvePoint> monte_carlo_decay(const Experiment& exp, const DephasingNoise& noise,
                                          int n_traj, const Matrix& rho0, EngineContext ctx) {
    if (n_traj < 1) throw ConfigError("monte_carlo_decay: n_traj must be >= 1");
    ctx.noise = noise;
    ctx.opts.n_traj = n_traj;
    return run_experiment(exp, rho0, ctx);
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream os;
    os << "sweep_value,mean,stderr\n";
    for (const auto& p : curve)
        os << format_double(p.x) << ',' << format_double(p.mean) << ',' << format_double(p.stderr)
           << '\n';
    return os.str();
}

// --------------------------- optical initialization ---------------------------

Sequence initialization_sequence(const std::string& target_label, const TransitionCatalog& catalog,
                                 int cycles, double pump_laser_us, double map_laser_us,
                                 double mw_rabi_mhz) {
    const int n = catalog.config.n_nuclei();
    if (target_label.size() != std::size_t(3 * (1 + n)))
        throw ConfigError("initialization_sequence: bad target label '" + target_label + "'");
    const std::string electron = target_label.substr(0, 3);
    if (electron != ARROW_E_DOWN && electron != ARROW_E_UP)
        throw ConfigError("initialization_sequence: target must start with the electron arrow");
    if (cycles < 1) throw ConfigError("initialization_sequence: cycles must be >= 1");

    // C cycles (and thus empties) the ↑ manifold; B the ↓ manifold.
    const char laser = electron == ARROW_E_DOWN ? 'C' : 'B';

    Sequence seq;
    auto mw_pi = [&](const Transition& t) {
        PulseItem p;
        p.channel = Channel::MW;
        p.freq_mhz = Bound::fixed(t.freq_mhz);
        p.phase_rad = Bound::fixed(0.0);
        p.rabi_mhz = mw_rabi_mhz;
        p.duration_us = Bound::fixed(pi_duration_us(t, Channel::MW, mw_rabi_mhz));
        seq.items.emplace_back(p);
    };

    // stage 1: pump everything into |electron, ⇓⇓..⟩
    for (int c = 0; c < cycles; ++c) {
        for (int nuc = 0; nuc < (1 << n) - 1; ++nuc) {
            // every nuclear configuration except all-down
            std::string arrows;
            for (int k = 0; k < n; ++k)
                arrows += ((nuc >> (n - 1 - k)) & 1) ? ARROW_N_DOWN : ARROW_N_UP;
            if (arrows == all_down(n)) continue;
            mw_pi(catalog.esr_line(arrows));
        }
        seq.items.emplace_back(LaserItem{laser, Bound::fixed(pump_laser_us)});
    }

    // stage 2: map ⇓⇓.. onto the requested nuclear state via nuclear-flipping
    // electron transitions followed by a pump pulse
    int cur = (1 << n) - 1; // all down (1 = down in nuclear index bits)
    int want = 0;
    for (int k = 0; k < n; ++k) {
        const std::string c = target_label.substr(std::size_t(3 * (1 + k)), 3);
        want <<= 1;
        if (c == ARROW_N_DOWN)
            want |= 1;
        else if (c != ARROW_N_UP)
            throw ConfigError("initialization_sequence: bad nuclear arrow in '" + target_label + "'");
    }
    const std::string other_e = electron == ARROW_E_DOWN ? ARROW_E_UP : ARROW_E_DOWN;
    for (int k = 0; k < n; ++k) {
        const int bit = 1 << (n - 1 - k);
        if ((cur & bit) == (want & bit)) continue;
        const int next = cur ^ bit;
        const std::string from = electron + nuclear_label(cur, n);
        const std::string to = other_e + nuclear_label(next, n);
        mw_pi(catalog.require(from, to)); // throws if the drive set cannot flip this spin
        seq.items.emplace_back(LaserItem{laser, Bound::fixed(map_laser_us)});
        cur = next;
    }
    seq.items.emplace_back(ReadItem{});
    return seq;
}

// ------------------------------- Bell states --------------------------------

BellState bell_state_from_string(const std::string& s) {
    if (s == "phi-plus" || s == "phi+") return BellState::phi_plus;
    if (s == "phi-minus" || s == "phi-") return BellState::phi_minus;
    if (s == "psi-plus" || s == "psi+") return BellState::psi_plus;
    if (s == "psi-minus" || s == "psi-") return BellState::psi_minus;
    throw ConfigError("unknown Bell state '" + s + "'");
}

const char* to_string(BellState b) {
    switch (b) {
        case BellState::phi_plus: return "phi-plus";
        case BellState::phi_minus: return "phi-minus";
        case BellState::psi_plus: return "psi-plus";
        case BellState::psi_minus: return "psi-minus";
    }
    return "?";
}

// Azimuthal gate phases follow the spin ladder of the driven nucleus: a
// logical phase phi puts e^{+i phi} on the spin-raising amplitude. The raw
// drive phase that realizes it depends on whether raising the spin raises or
// lowers the energy, and on the sign of the drive element.
double pulse_phase_for(const TransitionCatalog& catalog, const Transition& t, Channel ch,
                       double logical_phi) {
    const int n_sites = 1 + catalog.config.n_nuclei();
    const int site = flipped_site(catalog, t);
    const int upper_state =
        (catalog.levels[std::size_t(t.to)].index >> (n_sites - 1 - site)) & 1; // 0 = spin up
    const double sign = upper_state == 1 ? +1.0 : -1.0;
    const cxd elem = ch == Channel::RF ? t.rf_elem : t.mw_elem;
    return sign * logical_phi - std::arg(elem);
}

namespace {

struct BellGates {
    const Transition* gate1; // nucleus-0 line conditioned on nucleus 1 up
    const Transition* gate2; // nucleus-1 line conditioned on nucleus 0 (down for phi, up for psi)
    double gen_phi1 = 0.0;   // logical azimuths of the generation gates
    double gen_phi2 = 0.0;
};

BellGates bell_gates(BellState which, const TransitionCatalog& catalog) {
    if (catalog.config.n_nuclei() != 2)
        throw ConfigError("bell_sequence: register must have exactly two nuclei");
    BellGates g;
    g.gate1 = &catalog.nmr_line(0, '-', ARROW_N_UP);
    const bool phi = which == BellState::phi_plus || which == BellState::phi_minus;
    g.gate2 = &catalog.nmr_line(1, '-', phi ? ARROW_N_DOWN : ARROW_N_UP);
    const bool minus = which == BellState::phi_minus || which == BellState::psi_minus;
    // zero azimuths give |⇑⇑⟩ - |⇓⇓⟩ (phi-) and |⇑⇓⟩ + |⇓⇑⟩ (psi+)
    g.gen_phi1 = 0.0;
    if (phi)
        g.gen_phi2 = minus ? 0.0 : PI;
    else
        g.gen_phi2 = minus ? PI : 0.0;
    return g;
}

PulseItem rf_pulse(const TransitionCatalog& catalog, const Transition& t, double logical_phase,
                   double angle_fraction_of_pi, double rabi_mhz) {
    PulseItem p;
    p.channel = Channel::RF;
    p.freq_mhz = Bound::fixed(t.freq_mhz);
    p.phase_rad = Bound::fixed(pulse_phase_for(catalog, t, Channel::RF, logical_phase));
    p.rabi_mhz = rabi_mhz;
    p.duration_us = Bound::fixed(angle_fraction_of_pi * pi_duration_us(t, Channel::RF, rabi_mhz));
    return p;
}

} // namespace

Sequence bell_sequence(BellState which, double free_evolution_us,
                       std::optional<std::pair<double, double>> reversal_phases,
                       const TransitionCatalog& catalog, double rabi_rf_mhz) {
    const BellGates g = bell_gates(which, catalog);
    Sequence seq;
    seq.items.emplace_back(rf_pulse(catalog, *g.gate1, g.gen_phi1, 0.5, rabi_rf_mhz));
    seq.items.emplace_back(rf_pulse(catalog, *g.gate2, g.gen_phi2, 1.0, rabi_rf_mhz));
    if (free_evolution_us > 0) seq.items.emplace_back(DelayItem{Bound::fixed(free_evolution_us)});
    if (reversal_phases) {
        seq.items.emplace_back(
            rf_pulse(catalog, *g.gate2, g.gen_phi2 + reversal_phases->second, 1.0, rabi_rf_mhz));
        seq.items.emplace_back(
            rf_pulse(catalog, *g.gate1, g.gen_phi1 + reversal_phases->first, 0.5, rabi_rf_mhz));
    }
    seq.items.emplace_back(ReadItem{});
    return seq;
}

Sequence bell_ramsey_sequence(BellState which, const std::vector<double>& tau_grid_us,
                              double virtual_detuning_mhz, const TransitionCatalog& catalog,
                              double rabi_rf_mhz) {
    const BellGates g = bell_gates(which, catalog);
    Sequence seq;
    seq.sweep = Sweep{"tau_us", tau_grid_us};
    seq.items.emplace_back(rf_pulse(catalog, *g.gate1, g.gen_phi1, 0.5, rabi_rf_mhz));
    seq.items.emplace_back(rf_pulse(catalog, *g.gate2, g.gen_phi2, 1.0, rabi_rf_mhz));
    seq.items.emplace_back(DelayItem{Bound::swept(1.0)});
    // reversal with logical phases phi1 = 0, phi2 = omega * tau
    PulseItem rev2 = rf_pulse(catalog, *g.gate2, g.gen_phi2, 1.0, rabi_rf_mhz);
    const double base = pulse_phase_for(catalog, *g.gate2, Channel::RF, g.gen_phi2);
    const double slope = pulse_phase_for(catalog, *g.gate2, Channel::RF,
                                         g.gen_phi2 + constants::TWO_PI * virtual_detuning_mhz) -
                         base;
    rev2.phase_rad = Bound{base, slope};
    seq.items.emplace_back(rev2);
    seq.items.emplace_back(rf_pulse(catalog, *g.gate1, g.gen_phi1, 0.5, rabi_rf_mhz));
    seq.items.emplace_back(ReadItem{});
    return seq;
}

Eigen::Matrix4cd ideal_bell_density(BellState which) {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    const bool phi = which == BellState::phi_plus || which == BellState::phi_minus;
    const double sign = (which == BellState::phi_plus || which == BellState::psi_plus) ? 1.0 : -1.0;
    if (phi) {
        rho(0, 0) = rho(3, 3) = 0.5;
        rho(0, 3) = rho(3, 0) = 0.5 * sign;
    } else {
        rho(1, 1) = rho(2, 2) = 0.5;
        rho(1, 2) = rho(2, 1) = 0.5 * sign;
    }
    return rho;
}

double bell_state_fidelity(const Matrix& rho, const TransitionCatalog& catalog, BellState which) {
    const int n = catalog.config.n_nuclei();
    if (n != 2) throw ConfigError("bell_state_fidelity: register must have exactly two nuclei");
    const int dim = int(catalog.levels.size());
    Matrix v(dim, dim);
    for (int k = 0; k < dim; ++k) v.col(k) = catalog.levels[std::size_t(k)].vec;
    const Matrix rho_lab = v * rho * v.adjoint();

    // partial trace over the electron, then reorder into |⇓⇓>,|⇓⇑>,|⇑⇓>,|⇑⇑>
    Eigen::Matrix4cd nuc = Eigen::Matrix4cd::Zero();
    for (int e = 0; e < 2; ++e)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) nuc(a, b) += rho_lab(4 * e + a, 4 * e + b);
    Eigen::Matrix4cd tomo;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) tomo(3 - a, 3 - b) = nuc(a, b);
    return std::real((tomo * ideal_bell_density(which)).trace());
}

// ----------------------- phase-reversal tomography run -----------------------

namespace {

NuclearPopulations exact_populations(const Matrix& rho, const TransitionCatalog& catalog) {
    const auto pops = nuclear_populations(rho, catalog.levels, catalog.config.n_nuclei());
    NuclearPopulations p;
    p.up_up = pops[0];
    p.up_down = pops[1];
    p.down_up = pops[2];
    p.down_down = pops[3];
    return p;
}

NuclearPopulations sampled_populations(const Matrix& rho, const TransitionCatalog& catalog,
                                       const ReadoutSampling& sampling, std::uint64_t salt) {
    const auto pops = nuclear_populations(rho, catalog.levels, catalog.config.n_nuclei());
    auto run = [&](int target) {
        return simulate_readout(pops, target, sampling.model, sampling.shots,
                                derive_seed(sampling.seed, salt, std::uint64_t(target)));
    };
    const auto bg = simulate_background(sampling.model, sampling.shots,
                                        derive_seed(sampling.seed, salt, 99));
    return estimate_populations(run(0), run(1), run(2), run(3), bg, sampling.model);
}

} // namespace

BellTomographyRun run_bell_tomography(const EngineContext& ctx, BellState which, const Matrix& rho0,
                                      int n_theta, const std::optional<ReadoutSampling>& sampling,
                                      double rabi_rf_mhz) {
    if (n_theta < 8) throw ConfigError("run_bell_tomography: need at least 8 phase points");
    const TransitionCatalog& catalog = *ctx.catalog;
    const Matrix op = sigma_z_op(catalog, 1);
    const Observable obs = [&op](const Matrix& rho) { return expect(rho, op); };

    BellTomographyRun out;
    for (int i = 0; i < n_theta; ++i) {
        const double theta = PI * double(i) / double(n_theta);
        const Sequence seq =
            bell_sequence(which, 0.0, std::make_pair(theta, 3.0 * theta), catalog, rabi_rf_mhz);
        EngineContext cx = ctx;
        cx.opts.seed = derive_seed(ctx.opts.seed, std::uint64_t(i));
        const auto pts = run_sequence(rho0, seq, cx, obs);
        BellSweepPoint sp;
        sp.theta = theta;
        if (sampling) {
            const NuclearPopulations p =
                sampled_populations(pts[0].rho, catalog, *sampling, std::uint64_t(i));
            sp.sigma_z = nuclear_expectation(p);
        } else {
            sp.sigma_z = pts[0].obs_mean;
            sp.stderr = pts[0].obs_stderr;
        }
        out.sweep.push_back(sp);
    }

    const Sequence gen = bell_sequence(which, 0.0, std::nullopt, catalog, rabi_rf_mhz);
    const auto pts = run_sequence(rho0, gen, ctx, obs);
    out.populations = sampling ? sampled_populations(pts[0].rho, catalog, *sampling, 7777)
                               : exact_populations(pts[0].rho, catalog);
    return out;
}

std::vector<CurvePoint> run_bell_ramsey(const EngineContext& ctx, BellState which, const Matrix& rho0,
                                        const std::vector<double>& tau_grid_us,
                                        double virtual_detuning_mhz, double rabi_rf_mhz) {
    const Sequence seq =
        bell_ramsey_sequence(which, tau_grid_us, virtual_detuning_mhz, *ctx.catalog, rabi_rf_mhz);
    const Matrix op = sigma_z_op(*ctx.catalog, 1);
    const Observable obs = [&op](const Matrix& rho) { return expect(rho, op); };
    const auto pts = run_sequence(rho0, seq, ctx, obs);
    std::vector<CurvePoint> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        out[i] = {pts[i].sweep_value, pts[i].obs_mean, pts[i].obs_stderr};
    return out;
}

} // namespace spinreg
