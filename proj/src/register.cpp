#include "spinreg/register.hpp"

#include "spinreg/ini.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spinreg {

using Eigen::Matrix2cd;

// ------------------------------ species -------------------------------

double SpinSpecies::zeeman_mhz(double b_field_t) const {
    if (is_electron()) return gyro_or_g * constants::MU_B_MHZ_PER_T * b_field_t;
    return std::abs(gyro_or_g) * b_field_t;
}

SpinSpecies electron_species(double g) { return SpinSpecies{SpinKind::electron, g}; }
SpinSpecies hydrogen_species(double gyro) { return SpinSpecies{SpinKind::hydrogen, gyro}; }
SpinSpecies si29_species(double gyro) { return SpinSpecies{SpinKind::si29, gyro}; }

HyperfineTensor HyperfineTensor::secular(double a_zz, double a_xz, double a_yz) {
    HyperfineTensor t;
    t.a(2, 2) = a_zz;
    t.a(2, 0) = t.a(0, 2) = a_xz;
    t.a(2, 1) = t.a(1, 2) = a_yz;
    return t;
}

void HyperfineTensor::validate() const {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (!std::isfinite(a(i, j))) throw ConfigError("hyperfine tensor entry is not finite");
            if (std::abs(a(i, j)) >= 200.0)
                throw ConfigError("hyperfine tensor entry exceeds 200 MHz sanity bound");
        }
}

void RegisterConfig::validate() const {
    if (!std::isfinite(b_field_t) || b_field_t < 0) throw ConfigError("b_field_t must be finite and >= 0");
    if (!std::isfinite(electron.gyro_or_g)) throw ConfigError("electron g-factor is not finite");
    if (!electron.is_electron()) throw ConfigError("electron species must have kind electron");
    if (!std::isfinite(j_nn_khz)) throw ConfigError("j_nn_khz is not finite");
    if (j_nn_khz != 0.0 && n_nuclei() < 2)
        throw ConfigError("j_nn_khz requires at least two nuclei");
    for (const auto& n : nuclei) {
        if (n.species.is_electron()) throw ConfigError("nucleus '" + n.name + "' has electron kind");
        if (!std::isfinite(n.species.gyro_or_g))
            throw ConfigError("nucleus '" + n.name + "' gyro is not finite");
        n.tensor.validate();
    }
}

bool Operator::is_hermitian(double rel_tol) const {
    const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool Operator::is_unitary(double tol) const {
    Matrix d = mat.adjoint() * mat - Matrix::Identity(mat.rows(), mat.cols());
    return d.cwiseAbs().maxCoeff() <= tol;
}

// ----------------------------- spin algebra -----------------------------

Eigen::Matrix2cd spin_x() {
    Matrix2cd m;
    m << 0, 0.5, 0.5, 0;
    return m;
}
Eigen::Matrix2cd spin_y() {
    Matrix2cd m;
    m << 0, cxd(0, -0.5), cxd(0, 0.5), 0;
    return m;
}
Eigen::Matrix2cd spin_z() {
    Matrix2cd m;
    m << 0.5, 0, 0, -0.5;
    return m;
}
Eigen::Matrix2cd pauli_x() { return 2.0 * spin_x(); }

Matrix site_operator(const Eigen::Matrix2cd& op, int site, int n_sites) {
    Matrix out = Matrix::Identity(1, 1);
    for (int s = 0; s < n_sites; ++s) {
        const Matrix& factor = (s == site) ? Matrix(op) : Matrix(Matrix::Identity(2, 2));
        Matrix next(out.rows() * 2, out.cols() * 2);
        for (int i = 0; i < out.rows(); ++i)
            for (int j = 0; j < out.cols(); ++j)
                next.block(2 * i, 2 * j, 2, 2) = out(i, j) * factor;
        out = std::move(next);
    }
    return out;
}

// ------------------------------- labeling -------------------------------

namespace {

std::string spin_char(int site, int state) {
    if (site == 0) return state == 0 ? "↑" : "↓"; // ↑ / ↓
    return state == 0 ? "⇑" : "⇓";                // ⇑ / ⇓
}

std::string basis_label(int basis, int n_sites) {
    std::string out;
    for (int s = 0; s < n_sites; ++s) {
        const int state = (basis >> (n_sites - 1 - s)) & 1;
        out += spin_char(s, state);
    }
    return out;
}

int site_state(int basis, int site, int n_sites) { return (basis >> (n_sites - 1 - site)) & 1; }

} // namespace

// ------------------------------ operations ------------------------------

Operator build_hamiltonian(const RegisterConfig& config) {
    config.validate();
    const int n_sites = 1 + config.n_nuclei();
    const int dim = config.dim();
    Matrix h = Matrix::Zero(dim, dim);

    h += config.electron.zeeman_mhz(config.b_field_t) * site_operator(spin_z(), 0, n_sites);

    const Eigen::Matrix2cd spin_ops[3] = {spin_x(), spin_y(), spin_z()};
    for (int k = 0; k < config.n_nuclei(); ++k) {
        const auto& nuc = config.nuclei[k];
        h += -nuc.species.gyro_or_g * config.b_field_t * site_operator(spin_z(), 1 + k, n_sites);

        const Eigen::Matrix3d& a = nuc.tensor.a;
        if (config.mode == SecularMode::secular) {
            // keep only S_z (A_zz I_z + A_zx I_x + A_zy I_y)
            Matrix sz = site_operator(spin_z(), 0, n_sites);
            for (int j = 0; j < 3; ++j)
                if (a(2, j) != 0.0)
                    h += a(2, j) * (sz * site_operator(spin_ops[j], 1 + k, n_sites));
        } else {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (a(i, j) != 0.0)
                        h += a(i, j) * (site_operator(spin_ops[i], 0, n_sites) *
                                        site_operator(spin_ops[j], 1 + k, n_sites));
        }
    }

    if (config.n_nuclei() >= 2 && config.j_nn_khz != 0.0)
        h += (config.j_nn_khz * 1e-3) *
             (site_operator(spin_z(), 1, n_sites) * site_operator(spin_z(), 2, n_sites));

    return Operator{std::move(h)};
}

std::vector<Level> diagonalize(const Operator& h) {
    if (!h.is_hermitian(1e-12)) throw NumericError("diagonalize: operator is not Hermitian");
    const int dim = h.dim();
    const int n_sites = int(std::lround(std::log2(double(dim))));

    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.mat);
    if (solver.info() != Eigen::Success) throw NumericError("diagonalize: eigensolver failed");

    std::vector<Level> levels(dim);
    for (int i = 0; i < dim; ++i) {
        Level lv;
        lv.energy_mhz = solver.eigenvalues()(i);
        lv.vec = solver.eigenvectors().col(i);
        // deterministic global phase: largest component real positive
        int arg = 0;
        double best = -1;
        for (int b = 0; b < dim; ++b) {
            const double m = std::norm(lv.vec(b));
            if (m > best) {
                best = m;
                arg = b;
            }
        }
        const cxd phase = lv.vec(arg) / std::abs(lv.vec(arg));
        lv.vec /= phase;
        if (best > 0.5) {
            lv.label = basis_label(arg, n_sites);
        } else {
            lv.mixed = true;
        }
        lv.index = arg;
        levels[i] = std::move(lv);
    }

    std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) {
        if (a.energy_mhz != b.energy_mhz) return a.energy_mhz < b.energy_mhz;
        return a.label < b.label;
    });
    for (int i = 0; i < dim; ++i)
        if (levels[i].mixed) levels[i].label = "mixed#" + std::to_string(i);
    return levels;
}

DriveAxes make_drive_axes(const RegisterConfig& config) {
    const int n_sites = 1 + config.n_nuclei();
    DriveAxes axes;
    axes.mw.mat = site_operator(pauli_x(), 0, n_sites);
    axes.rf.mat = Matrix::Zero(config.dim(), config.dim());
    double gyro_ref = 0.0;
    for (const auto& n : config.nuclei) gyro_ref = std::max(gyro_ref, std::abs(n.species.gyro_or_g));
    if (gyro_ref > 0.0)
        for (int k = 0; k < config.n_nuclei(); ++k)
            axes.rf.mat += (config.nuclei[k].species.gyro_or_g / gyro_ref) *
                           site_operator(pauli_x(), 1 + k, n_sites);
    return axes;
}

const char* to_string(TransitionKind k) {
    switch (k) {
        case TransitionKind::electron_conserving: return "electron_conserving";
        case TransitionKind::electron_flipping_nuclear_conserving:
            return "electron_flipping_nuclear_conserving";
        case TransitionKind::nuclear_flipping: return "nuclear_flipping";
    }
    return "?";
}

namespace {

TransitionKind classify(const Level& a, const Level& b, int n_sites) {
    if (a.mixed || b.mixed) return TransitionKind::nuclear_flipping;
    const bool e_flip = site_state(a.index, 0, n_sites) != site_state(b.index, 0, n_sites);
    bool nuc_flip = false;
    for (int s = 1; s < n_sites; ++s)
        if (site_state(a.index, s, n_sites) != site_state(b.index, s, n_sites)) nuc_flip = true;
    if (!e_flip) return TransitionKind::electron_conserving;
    if (!nuc_flip) return TransitionKind::electron_flipping_nuclear_conserving;
    return TransitionKind::nuclear_flipping;
}

} // namespace

TransitionCatalog transition_catalog(const std::vector<Level>& levels, const DriveAxes& axes,
                                     const RegisterConfig& config, double min_abs_drive) {
    TransitionCatalog cat;
    cat.levels = levels;
    cat.config = config;
    const int dim = int(levels.size());
    const int n_sites = 1 + config.n_nuclei();
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            Transition t;
            t.from = i;
            t.to = j;
            t.freq_mhz = levels[j].energy_mhz - levels[i].energy_mhz;
            t.mw_elem = (levels[i].vec.adjoint() * axes.mw.mat * levels[j].vec)(0);
            t.rf_elem = (levels[i].vec.adjoint() * axes.rf.mat * levels[j].vec)(0);
            if (std::abs(t.mw_elem) <= min_abs_drive && std::abs(t.rf_elem) <= min_abs_drive) continue;
            t.kind = classify(levels[i], levels[j], n_sites);
            cat.transitions.push_back(t);
        }
    }
    return cat;
}

TransitionCatalog build_catalog(const RegisterConfig& config) {
    const Operator h = build_hamiltonian(config);
    return transition_catalog(diagonalize(h), make_drive_axes(config), config);
}

cxd TransitionCatalog::drive(int i, int j, bool rf_channel) const {
    for (const auto& t : transitions) {
        const cxd e = rf_channel ? t.rf_elem : t.mw_elem;
        if (t.from == i && t.to == j) return e;
        if (t.from == j && t.to == i) return std::conj(e);
    }
    return cxd(0, 0);
}

const Transition* TransitionCatalog::find(const std::string& from_label,
                                          const std::string& to_label) const {
    for (const auto& t : transitions) {
        const std::string& a = levels[t.from].label;
        const std::string& b = levels[t.to].label;
        if ((a == from_label && b == to_label) || (a == to_label && b == from_label)) return &t;
    }
    return nullptr;
}

const Transition& TransitionCatalog::require(const std::string& from_label,
                                             const std::string& to_label) const {
    const Transition* t = find(from_label, to_label);
    if (!t)
        throw ConfigError("transition |" + from_label + "> <-> |" + to_label +
                          "> not present in catalog (mode=" +
                          (config.mode == SecularMode::secular ? "secular" : "full") + ")");
    return *t;
}

const Level& TransitionCatalog::level_by_label(const std::string& label) const {
    for (const auto& l : levels)
        if (l.label == label) return l;
    throw ConfigError("no level labeled |" + label + ">");
}

std::vector<const Transition*> TransitionCatalog::of_kind(TransitionKind k) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions)
        if (t.kind == k) out.push_back(&t);
    return out;
}

const Transition& TransitionCatalog::esr_line(const std::string& nuclear_labels) const {
    return require("↓" + nuclear_labels, "↑" + nuclear_labels);
}

const Transition& TransitionCatalog::nmr_line(int nuc, char electron_manifold,
                                              const std::string& spectators) const {
    // spectators: one label char per non-flipped nucleus, in register order
    const int n = config.n_nuclei();
    std::string from = electron_manifold == '+' ? "↑" : "↓";
    std::string to = from;
    std::size_t spec_pos = 0;
    // spectators is a UTF-8 string of 3-byte arrows
    auto next_spec = [&]() {
        std::string c = spectators.substr(spec_pos, 3);
        spec_pos += 3;
        return c;
    };
    for (int k = 0; k < n; ++k) {
        if (k == nuc) {
            from += "⇑";
            to += "⇓";
        } else {
            const std::string c = next_spec();
            from += c;
            to += c;
        }
    }
    return require(from, to);
}

std::string TransitionCatalog::to_csv(double /*min_abs_drive*/) const {
    std::ostringstream os;
    os << "from,to,freq_mhz,abs_drive,kind\n";
    for (const auto& t : transitions) {
        const double abs_drive = std::max(std::abs(t.mw_elem), std::abs(t.rf_elem));
        os << levels[t.from].label << ',' << levels[t.to].label << ',' << format_double(t.freq_mhz)
           << ',' << format_double(abs_drive) << ',' << to_string(t.kind) << '\n';
    }
    return os.str();
}

SpinParams extract_spin_params(double f_down_mhz, double f_up_mhz) {
    if (f_down_mhz < 0 || f_up_mhz < 0)
        throw ConfigError("extract_spin_params: frequencies must be nonnegative");
    return SpinParams{(f_up_mhz + f_down_mhz) / 2.0, (f_up_mhz - f_down_mhz) / 2.0};
}

double field_from_esr(double f_e_ghz, double g_e) {
    if (f_e_ghz < 0 || g_e <= 0) throw ConfigError("field_from_esr: inputs must be positive");
    return f_e_ghz * 1e3 / (g_e * constants::MU_B_MHZ_PER_T);
}

std::vector<SpectrumPoint> synthesize_spectrum(const TransitionCatalog& catalog, double linewidth_mhz,
                                               const std::vector<double>& populations,
                                               const std::vector<TransitionKind>& kinds,
                                               bool rf_channel, int n_points, double pad_linewidths) {
    if (linewidth_mhz <= 0) throw ConfigError("synthesize_spectrum: linewidth must be > 0");
    if (populations.size() != catalog.levels.size())
        throw ConfigError("synthesize_spectrum: populations size mismatch");

    struct LineRec {
        double f, w;
    };
    std::vector<LineRec> lines;
    for (const auto& t : catalog.transitions) {
        bool wanted = kinds.empty();
        for (auto k : kinds)
            if (t.kind == k) wanted = true;
        if (!wanted) continue;
        const double elem = std::abs(rf_channel ? t.rf_elem : t.mw_elem);
        const double w = elem * elem * populations[std::size_t(t.from)];
        if (w > 0) lines.push_back({t.freq_mhz, w});
    }
    std::vector<SpectrumPoint> out;
    if (lines.empty()) return out;

    double fmin = lines.front().f, fmax = lines.front().f;
    for (const auto& l : lines) {
        fmin = std::min(fmin, l.f);
        fmax = std::max(fmax, l.f);
    }
    fmin -= pad_linewidths * linewidth_mhz;
    fmax += pad_linewidths * linewidth_mhz;

    const double half = linewidth_mhz / 2.0;
    out.reserve(std::size_t(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double f = fmin + (fmax - fmin) * double(i) / double(n_points - 1);
        double y = 0;
        for (const auto& l : lines) {
            const double d = f - l.f;
            y += l.w * half * half / (d * d + half * half);
        }
        out.push_back({f, y});
    }
    return out;
}

std::vector<SpectrumPoint> find_peaks(const std::vector<SpectrumPoint>& spectrum, double min_rel) {
    std::vector<SpectrumPoint> peaks;
    double top = 0;
    for (const auto& p : spectrum) top = std::max(top, p.intensity);
    for (std::size_t i = 1; i + 1 < spectrum.size(); ++i)
        if (spectrum[i].intensity > spectrum[i - 1].intensity &&
            spectrum[i].intensity >= spectrum[i + 1].intensity &&
            spectrum[i].intensity >= min_rel * top)
            peaks.push_back(spectrum[i]);
    return peaks;
}

// --------------------------- config file (INI) ---------------------------

namespace {

SpinSpecies species_from_string(const std::string& s, double value) {
    if (s == "hydrogen" || s == "h" || s == "H") return hydrogen_species(value);
    if (s == "si29" || s == "Si" || s == "si") return si29_species(value);
    throw ConfigError("unknown nuclear species '" + s + "'");
}

const char* species_to_string(SpinKind k) {
    switch (k) {
        case SpinKind::hydrogen: return "hydrogen";
        case SpinKind::si29: return "si29";
        case SpinKind::electron: return "electron";
    }
    return "?";
}

} // namespace

RegisterConfig parse_register_config(const std::string& text) {
    const IniDoc doc = parse_ini(text);
    const IniSection* reg = doc.find("register");
    if (!reg) throw ConfigError("config missing [register] section");

    RegisterConfig cfg;
    cfg.b_field_t = reg->require_double("b_field_t");
    cfg.electron = electron_species(reg->require_double("g_e"));
    cfg.j_nn_khz = reg->get_double("j_nn_khz", 0.0);
    const std::string* mode = reg->get("secular_mode");
    if (mode) {
        if (*mode == "secular")
            cfg.mode = SecularMode::secular;
        else if (*mode == "full")
            cfg.mode = SecularMode::full;
        else
            throw ConfigError("secular_mode must be 'secular' or 'full', got '" + *mode + "'");
    }

    for (const IniSection* sec : doc.with_prefix("nucleus.")) {
        Nucleus n;
        n.name = sec->name.substr(std::string("nucleus.").size());
        n.species = species_from_string(sec->require("species"), sec->require_double("gyro_mhz_per_t"));
        HyperfineTensor t;
        t.a(2, 2) = sec->get_double("a_zz_mhz", 0.0);
        // z-row entries survive the secular approximation (nuclear-axis tilt)
        t.a(2, 0) = sec->get_double("a_zx_mhz", 0.0);
        t.a(2, 1) = sec->get_double("a_zy_mhz", 0.0);
        // x/y-row entries act only in full mode (electron-transverse couplings)
        t.a(0, 2) = sec->get_double("a_xz_mhz", 0.0);
        t.a(1, 2) = sec->get_double("a_yz_mhz", 0.0);
        t.a(0, 0) = sec->get_double("a_xx_mhz", 0.0);
        t.a(1, 1) = sec->get_double("a_yy_mhz", 0.0);
        t.a(0, 1) = t.a(1, 0) = sec->get_double("a_xy_mhz", 0.0);
        n.tensor = t;
        cfg.nuclei.push_back(std::move(n));
    }
    cfg.validate();
    return cfg;
}

std::string register_config_to_text(const RegisterConfig& config) {
    std::ostringstream os;
    os << "[register]\n";
    os << "b_field_t = " << format_double(config.b_field_t) << "          # tesla\n";
    os << "g_e = " << format_double(config.electron.gyro_or_g) << "       # dimensionless\n";
    os << "j_nn_khz = " << format_double(config.j_nn_khz) << "            # kHz\n";
    os << "secular_mode = " << (config.mode == SecularMode::secular ? "secular" : "full") << "\n";
    for (const auto& n : config.nuclei) {
        os << "\n[nucleus." << n.name << "]\n";
        os << "species = " << species_to_string(n.species.kind) << "\n";
        os << "gyro_mhz_per_t = " << format_double(n.species.gyro_or_g) << "   # MHz/T\n";
        os << "a_zz_mhz = " << format_double(n.tensor.a(2, 2)) << "\n";
        os << "a_zx_mhz = " << format_double(n.tensor.a(2, 0)) << "\n";
        os << "a_zy_mhz = " << format_double(n.tensor.a(2, 1)) << "\n";
        os << "a_xz_mhz = " << format_double(n.tensor.a(0, 2)) << "\n";
        os << "a_yz_mhz = " << format_double(n.tensor.a(1, 2)) << "\n";
        os << "a_xx_mhz = " << format_double(n.tensor.a(0, 0)) << "\n";
        os << "a_yy_mhz = " << format_double(n.tensor.a(1, 1)) << "\n";
        os << "a_xy_mhz = " << format_double(n.tensor.a(0, 1)) << "\n";
    }
    return os.str();
}

RegisterConfig load_register_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_register_config(ss.str());
}

} // namespace spinreg
