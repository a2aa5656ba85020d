// register.hpp — static spin Hamiltonian of an electron–nuclear register,
// labeled eigenlevels, and the transition catalog with drive matrix elements.

#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinreg/constants.hpp"
#include "spinreg/util.hpp"

namespace spinreg {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// ------------------------------ domain types ------------------------------

enum class SpinKind { electron, hydrogen, si29 };

// Spin-1/2 species. For the electron `gyro_or_g` holds the dimensionless
// g-factor; for nuclei it is the signed gyromagnetic ratio in MHz/T.
struct SpinSpecies {
    SpinKind kind = SpinKind::electron;
    double gyro_or_g = 0.0;

    // Magnitude of the bare Zeeman splitting at field b, MHz.
    double zeeman_mhz(double b_field_t) const;
    bool is_electron() const { return kind == SpinKind::electron; }
};

SpinSpecies electron_species(double g = constants::G_E_DEFAULT);
SpinSpecies hydrogen_species(double gyro_mhz_per_t = constants::GYRO_H_MHZ_PER_T);
SpinSpecies si29_species(double gyro_mhz_per_t = constants::GYRO_SI29_MHZ_PER_T);

// Full 3x3 hyperfine tensor in MHz. Secular-relevant entries are the z-row
// (a_zz, a_zx, a_zy); the tensor is kept symmetric when built from the
// convenience setters.
struct HyperfineTensor {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();

    static HyperfineTensor secular(double a_zz, double a_xz = 0.0, double a_yz = 0.0);
    double azz() const { return a(2, 2); }
    double azx() const { return a(2, 0); }
    double azy() const { return a(2, 1); }
    void validate() const; // finite, |entries| < 200 MHz
};

enum class SecularMode { secular, full };

struct Nucleus {
    std::string name; // section key in config files, e.g. "Si", "H"
    SpinSpecies species;
    HyperfineTensor tensor;
};

// Physical identity of one register: field, electron, ordered nuclei,
// effective longitudinal nuclear-nuclear coupling.
struct RegisterConfig {
    double b_field_t = 0.0;
    SpinSpecies electron = electron_species();
    std::vector<Nucleus> nuclei;
    double j_nn_khz = 2.0;
    SecularMode mode = SecularMode::secular;

    int n_nuclei() const { return int(nuclei.size()); }
    int dim() const { return 1 << (1 + n_nuclei()); }
    void validate() const;
};

// Square complex operator on the register Hilbert space. Entries are MHz for
// Hamiltonians and dimensionless for unitaries.
struct Operator {
    Matrix mat;

    int dim() const { return int(mat.rows()); }
    bool is_hermitian(double rel_tol = 1e-12) const;
    bool is_unitary(double tol = 1e-10) const;
};

// ------------------------------ spin algebra ------------------------------

// Pauli/spin operators embedded on one site of the register (site 0 = electron,
// 1.. = nuclei in config order). Basis order per site: index 0 = up.
Matrix site_operator(const Eigen::Matrix2cd& op, int site, int n_sites);
Eigen::Matrix2cd spin_x(); // S_x (eigenvalues +-1/2)
Eigen::Matrix2cd spin_y();
Eigen::Matrix2cd spin_z();
Eigen::Matrix2cd pauli_x();

// ------------------------------- eigenlevels ------------------------------

// One labeled eigenlevel. Labels are UTF-8 strings like "↓⇑⇓" in register
// order (electron, then nuclei); levels whose largest basis amplitude carries
// |amp|^2 <= 0.5 are flagged mixed and labeled "mixed#<index>".
struct Level {
    double energy_mhz = 0.0;
    std::string label;
    Vector vec;
    int index = 0;
    bool mixed = false;
};

enum class TransitionKind { electron_conserving, electron_flipping_nuclear_conserving, nuclear_flipping };

const char* to_string(TransitionKind k);

struct Transition {
    int from = 0; // lower-energy level index
    int to = 0;   // higher-energy level index
    double freq_mhz = 0.0;
    cxd mw_elem{0, 0}; // <from| D_mw |to>
    cxd rf_elem{0, 0}; // <from| D_rf |to>
    TransitionKind kind = TransitionKind::electron_conserving;
};

// Drive operators per channel in the lab basis. MW couples to the electron
// (sigma_x); RF couples to every nucleus weighted by gyro ratio relative to
// the strongest nuclear gyro.
struct DriveAxes {
    Operator mw;
    Operator rf;
};

struct TransitionCatalog {
    std::vector<Level> levels;
    std::vector<Transition> transitions;
    RegisterConfig config;

    // Drive element with orientation: (i->j) and (j->i) are conjugate.
    cxd drive(int i, int j, bool rf_channel) const;

    const Transition* find(const std::string& from_label, const std::string& to_label) const;
    const Transition& require(const std::string& from_label, const std::string& to_label) const;
    const Level& level_by_label(const std::string& label) const;

    std::vector<const Transition*> of_kind(TransitionKind k) const;

    // Electron-flipping, nuclear-conserving line conditioned on the nuclear
    // part of the label (e.g. "⇓⇓" for two nuclei).
    const Transition& esr_line(const std::string& nuclear_labels) const;

    // Nuclear line of nucleus `nuc` (0-based) in electron manifold
    // '↓' or '↑', with the other nuclei fixed to `spectators` (label chars in
    // register order, skipping the flipped nucleus).
    const Transition& nmr_line(int nuc, char electron_manifold, const std::string& spectators) const;

    std::string to_csv(double min_abs_drive = 1e-6) const;
};

// ------------------------------- operations -------------------------------

// H/h in MHz: electron Zeeman + nuclear Zeemans + hyperfine + J_nn I_z I_z.
// Secular mode keeps only the S_z row of each hyperfine tensor.
Operator build_hamiltonian(const RegisterConfig& config);

// Ascending energies, orthonormal eigenvectors, dominant-amplitude labels.
std::vector<Level> diagonalize(const Operator& h);

DriveAxes make_drive_axes(const RegisterConfig& config);

// Every level pair with |mw| or |rf| element above threshold.
TransitionCatalog transition_catalog(const std::vector<Level>& levels, const DriveAxes& axes,
                                     const RegisterConfig& config, double min_abs_drive = 1e-6);

TransitionCatalog build_catalog(const RegisterConfig& config);

// (zeeman, a_parallel) from a pair of manifold-resolved nuclear frequencies.
struct SpinParams {
    double zeeman_mhz = 0.0;
    double a_parallel_mhz = 0.0;
    double gyro_mhz_per_t(double b_field_t) const { return zeeman_mhz / b_field_t; }
};
SpinParams extract_spin_params(double f_down_mhz, double f_up_mhz);

// B = h f_e / (g_e mu_B), inputs in GHz.
double field_from_esr(double f_e_ghz, double g_e);

// Lorentzian line synthesis: sum over transitions of
// |drive|^2 * population(lower level) * L(f; f0, fwhm).
struct SpectrumPoint {
    double freq_mhz;
    double intensity;
};
std::vector<SpectrumPoint> synthesize_spectrum(const TransitionCatalog& catalog, double linewidth_mhz,
                                               const std::vector<double>& populations,
                                               const std::vector<TransitionKind>& kinds,
                                               bool rf_channel = false, int n_points = 4001,
                                               double pad_linewidths = 5.0);

// Local maxima of a synthesized spectrum above `min_rel` of the global peak.
std::vector<SpectrumPoint> find_peaks(const std::vector<SpectrumPoint>& spectrum, double min_rel = 0.05);

// --------------------------- config file (INI) ----------------------------

// Flat sectioned key-value format; see README for the schema.
RegisterConfig parse_register_config(const std::string& text);
std::string register_config_to_text(const RegisterConfig& config);
RegisterConfig load_register_config(const std::string& path);

} // namespace spinreg
