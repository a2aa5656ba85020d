#include "spinreg/noise.hpp"

#include "spinreg/ini.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace spinreg {

void DephasingNoise::validate() const {
    auto check = [](const SpinNoise& s, const std::string& who) {
        if (!(s.sigma_khz >= 0) || !std::isfinite(s.sigma_khz))
            throw ConfigError("noise sigma for " + who + " must be finite and >= 0");
        if (s.kind == NoiseKind::ou && !(s.tau_c_ms > 0))
            throw ConfigError("OU correlation time for " + who + " must be > 0");
    };
    check(electron, "electron");
    for (std::size_t i = 0; i < nuclei.size(); ++i) check(nuclei[i], "nucleus " + std::to_string(i));
    if (!(std::abs(cross_correlation) <= 1.0))
        throw ConfigError("cross_correlation must lie in [-1, 1]");
}

bool DephasingNoise::silent() const {
    if (electron.sigma_khz != 0) return false;
    for (const auto& n : nuclei)
        if (n.sigma_khz != 0) return false;
    return true;
}

namespace {

// Correlated standard-normal pair for the two nuclear channels.
struct NuclearDraw {
    double r = 0.0;
    double chol = 1.0; // sqrt(1 - r^2)

    explicit NuclearDraw(double corr) : r(corr), chol(std::sqrt(std::max(0.0, 1.0 - corr * corr))) {}

    std::pair<double, double> operator()(std::mt19937_64& rng, std::normal_distribution<double>& n) const {
        const double z1 = n(rng);
        const double z2 = n(rng);
        return {z1, r * z1 + chol * z2};
    }
};

} // namespace

DetuningSeries sample_detuning_series(const DephasingNoise& noise, double dt_us, double total_us,
                                      std::uint64_t trajectory_seed) {
    noise.validate();
    if (!(dt_us > 0)) throw ConfigError("sample_detuning_series: dt must be > 0");
    const std::size_t n_steps = std::size_t(std::ceil(total_us / dt_us)) + 1;
    const std::size_t n_spins = 1 + noise.nuclei.size();

    DetuningSeries out;
    out.dt_us = dt_us;
    out.spins.assign(n_spins, std::vector<double>(n_steps, 0.0));

    std::mt19937_64 rng = make_rng(trajectory_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const NuclearDraw draw(noise.cross_correlation);

    auto spin_params = [&](std::size_t s) -> const SpinNoise& {
        return s == 0 ? noise.electron : noise.nuclei[s - 1];
    };

    // initial values: stationary samples, nuclear pair correlated
    {
        const double ze = normal(rng);
        out.spins[0][0] = noise.electron.sigma_khz * ze;
        if (n_spins >= 3) {
            auto [z1, z2] = draw(rng, normal);
            out.spins[1][0] = noise.nuclei[0].sigma_khz * z1;
            out.spins[2][0] = noise.nuclei[1].sigma_khz * z2;
        } else if (n_spins == 2) {
            out.spins[1][0] = noise.nuclei[0].sigma_khz * normal(rng);
        }
        for (std::size_t s = 3; s < n_spins; ++s)
            out.spins[s][0] = spin_params(s).sigma_khz * normal(rng);
    }

    // step updates; quasi-static spins keep their initial value
    for (std::size_t step = 1; step < n_steps; ++step) {
        auto ou_step = [&](std::size_t s, double z) {
            const SpinNoise& p = spin_params(s);
            if (p.kind == NoiseKind::quasi_static_gaussian || p.sigma_khz == 0) {
                out.spins[s][step] = out.spins[s][step - 1];
                return;
            }
            const double decay = std::exp(-dt_us / (p.tau_c_ms * 1e3));
            const double diff = p.sigma_khz * std::sqrt(1.0 - decay * decay);
            out.spins[s][step] = out.spins[s][step - 1] * decay + diff * z;
        };
        ou_step(0, normal(rng));
        if (n_spins >= 3) {
            auto [z1, z2] = draw(rng, normal);
            ou_step(1, z1);
            ou_step(2, z2);
        } else if (n_spins == 2) {
            ou_step(1, normal(rng));
        }
        for (std::size_t s = 3; s < n_spins; ++s) ou_step(s, normal(rng));
    }
    return out;
}

std::vector<double> sample_static_detunings(const DephasingNoise& noise,
                                            std::uint64_t trajectory_seed) {
    noise.validate();
    std::mt19937_64 rng = make_rng(trajectory_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n_spins = 1 + noise.nuclei.size();
    std::vector<double> out(n_spins, 0.0);
    out[0] = noise.electron.sigma_khz * normal(rng);
    if (n_spins >= 3) {
        const NuclearDraw draw(noise.cross_correlation);
        auto [z1, z2] = draw(rng, normal);
        out[1] = noise.nuclei[0].sigma_khz * z1;
        out[2] = noise.nuclei[1].sigma_khz * z2;
    } else if (n_spins == 2) {
        out[1] = noise.nuclei[0].sigma_khz * normal(rng);
    }
    for (std::size_t s = 3; s < n_spins; ++s) out[s] = noise.nuclei[s - 1].sigma_khz * normal(rng);
    return out;
}

BellT2 analytic_bell_t2(double t2_si_ms, double t2_h_ms, double correlation) {
    if (!(t2_si_ms > 0) || !(t2_h_ms > 0))
        throw ConfigError("analytic_bell_t2: coherence times must be > 0");
    if (!(std::abs(correlation) <= 1.0))
        throw ConfigError("analytic_bell_t2: correlation must lie in [-1, 1]");
    const double a = 1.0 / (t2_si_ms * t2_si_ms);
    const double b = 1.0 / (t2_h_ms * t2_h_ms);
    const double cross = 2.0 * correlation / (t2_si_ms * t2_h_ms);
    const double inv_phi2 = a + b + cross;
    const double inv_psi2 = a + b - cross;
    BellT2 out;
    out.t2_phi_ms = inv_phi2 > 0 ? 1.0 / std::sqrt(inv_phi2) : std::numeric_limits<double>::infinity();
    out.t2_psi_ms = inv_psi2 > 0 ? 1.0 / std::sqrt(inv_psi2) : std::numeric_limits<double>::infinity();
    return out;
}

void MeissnerEvent::validate() const {
    if (!(delta_f_mhz >= 0) || !(t_jump_after_first_pulse_us >= 0))
        throw ConfigError("MeissnerEvent fields must be >= 0");
}

// ------------------------------ config text -------------------------------

DephasingNoise parse_noise_config(const std::string& text, std::size_t n_nuclei) {
    const IniDoc doc = parse_ini(text);
    const IniSection* sec = doc.find("noise");
    if (!sec) throw ConfigError("config missing [noise] section");

    auto kind_of = [](const std::string& s) {
        if (s == "quasi_static") return NoiseKind::quasi_static_gaussian;
        if (s == "ou") return NoiseKind::ou;
        throw ConfigError("noise kind must be quasi_static or ou, got '" + s + "'");
    };

    DephasingNoise noise;
    const std::string* kind = sec->get("kind");
    const NoiseKind k = kind ? kind_of(*kind) : NoiseKind::quasi_static_gaussian;
    const double tau_c = sec->get_double("tau_c_ms", 1.0);

    noise.electron = SpinNoise{k, sec->get_double("sigma_e_khz", 0.0), tau_c};
    noise.nuclei.resize(n_nuclei);
    if (n_nuclei >= 1) noise.nuclei[0] = SpinNoise{k, sec->get_double("sigma_si_khz", 0.0), tau_c};
    if (n_nuclei >= 2) noise.nuclei[1] = SpinNoise{k, sec->get_double("sigma_h_khz", 0.0), tau_c};
    noise.cross_correlation = sec->get_double("correlation", 0.0);
    noise.seed = std::uint64_t(sec->get_double("seed", 0.0));
    noise.validate();
    return noise;
}

std::string noise_config_to_text(const DephasingNoise& noise) {
    std::ostringstream os;
    os << "[noise]\n";
    os << "kind = "
       << (noise.electron.kind == NoiseKind::quasi_static_gaussian ? "quasi_static" : "ou") << "\n";
    os << "sigma_e_khz = " << format_double(noise.electron.sigma_khz) << "\n";
    if (!noise.nuclei.empty()) os << "sigma_si_khz = " << format_double(noise.nuclei[0].sigma_khz) << "\n";
    if (noise.nuclei.size() >= 2)
        os << "sigma_h_khz = " << format_double(noise.nuclei[1].sigma_khz) << "\n";
    os << "tau_c_ms = " << format_double(noise.electron.tau_c_ms) << "\n";
    os << "correlation = " << format_double(noise.cross_correlation) << "\n";
    os << "seed = " << noise.seed << "\n";
    return os.str();
}

} // namespace spinreg
