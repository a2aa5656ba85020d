#include <doctest.h>

#include <limits>
#include <random>
#include <set>

#include "helpers.hpp"
#include "spinreg/presets.hpp"
#include "spinreg/register.hpp"

using namespace spinreg;
using namespace testutil;

TEST_SUITE("register") {

TEST_CASE("zero couplings and zero field give the zero operator") {
    RegisterConfig cfg;
    cfg.b_field_t = 0.0;
    cfg.electron = electron_species();
    Nucleus n;
    n.name = "H";
    n.species = hydrogen_species(0.0);
    cfg.nuclei.push_back(n);
    n.name = "Si";
    n.species = si29_species(0.0);
    cfg.nuclei.push_back(n);
    cfg.j_nn_khz = 0.0;
    const Operator h = build_hamiltonian(cfg);
    CHECK(h.mat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("electron-only splitting at 0.26 T is about 7.3 GHz") {
    const Operator h = build_hamiltonian(electron_only_config(0.26));
    const auto levels = diagonalize(h);
    const double split = levels[1].energy_mhz - levels[0].energy_mhz;
    CHECK(split == doctest::Approx(2.005 * constants::MU_B_MHZ_PER_T * 0.26).epsilon(1e-12));
    CHECK(split > 7290.0);
    CHECK(split < 7310.0);
}

TEST_CASE("hydrogen manifold frequencies against a hand-built 4x4 oracle") {
    // gamma B = 11.073 MHz, A_zz = 2.136 MHz
    const double b = 11.073 / 42.577;
    const RegisterConfig cfg = one_nucleus_config(b, 42.577, 2.136);
    const TransitionCatalog cat = build_catalog(cfg);

    // independent oracle: explicit 4x4 secular matrix in the product basis
    const double fe = 2.005 * constants::MU_B_MHZ_PER_T * b;
    const double gz = 42.577 * b;
    Eigen::Matrix4d oracle = Eigen::Matrix4d::Zero();
    // basis |m_S m_I>: (++, +-, -+, --), diag = fe*mS - gz*mI + Azz*mS*mI
    const double ms[4] = {0.5, 0.5, -0.5, -0.5};
    const double mi[4] = {0.5, -0.5, 0.5, -0.5};
    for (int i = 0; i < 4; ++i) oracle(i, i) = fe * ms[i] - gz * mi[i] + 2.136 * ms[i] * mi[i];
    const double f_up_oracle = std::abs(oracle(0, 0) - oracle(1, 1));
    const double f_dn_oracle = std::abs(oracle(2, 2) - oracle(3, 3));

    const double f_dn = cat.nmr_line(0, '-', "").freq_mhz;
    const double f_up = cat.nmr_line(0, '+', "").freq_mhz;
    CHECK(f_dn == doctest::Approx(f_dn_oracle).epsilon(1e-12));
    CHECK(f_up == doctest::Approx(f_up_oracle).epsilon(1e-12));
    // the two manifolds carry 10.005 and 12.141 MHz
    CHECK(std::min(f_dn, f_up) == doctest::Approx(10.005).epsilon(1e-9));
    CHECK(std::max(f_dn, f_up) == doctest::Approx(12.141).epsilon(1e-9));
}

TEST_CASE("diagonalize returns identity eigenvectors for diagonal input") {
    Matrix m = Matrix::Zero(4, 4);
    m.diagonal() << -3.0, -1.0, 2.0, 7.0;
    const auto levels = diagonalize(Operator{m});
    for (int i = 0; i < 4; ++i) {
        CHECK(levels[i].energy_mhz == doctest::Approx(m(i, i).real()));
        CHECK(std::abs(levels[i].vec(i)) == doctest::Approx(1.0));
    }
}

TEST_CASE("canonical register: eight levels grouped 4+4 with the analytic sublevel pattern") {
    const RegisterConfig cfg = preset_register("paper-T1");
    const TransitionCatalog cat = build_catalog(cfg);
    REQUIRE(cat.levels.size() == 8);
    int down = 0;
    for (const auto& l : cat.levels)
        if (l.label.rfind(E_DN, 0) == 0) ++down;
    CHECK(down == 4);

    // secular energies are exactly Zeeman/hyperfine/J combinations
    const double fe = 2.005 * constants::MU_B_MHZ_PER_T * 0.2601;
    const double z_si = 8.465 * 0.2601;
    const double z_h = 42.568242983 * 0.2601;
    const double a_si = -7.230507, a_h = -2.136, j = 0.002;
    for (const auto& l : cat.levels) {
        REQUIRE(!l.mixed);
        const double s = l.label.rfind(E_UP, 0) == 0 ? 0.5 : -0.5;
        const double msi = l.label.substr(3, 3) == N_UP ? 0.5 : -0.5;
        const double mh = l.label.substr(6, 3) == N_UP ? 0.5 : -0.5;
        const double e = fe * s + z_si * msi - z_h * mh + a_si * s * msi + a_h * s * mh + j * msi * mh;
        CHECK(l.energy_mhz == doctest::Approx(e).epsilon(1e-9));
    }
}

TEST_CASE("secular vs full mode: electron-conserving gaps shift below 1 kHz") {
    RegisterConfig cfg = preset_register("paper-T1");
    const TransitionCatalog sec = build_catalog(cfg);
    cfg.mode = SecularMode::full;
    const TransitionCatalog full = build_catalog(cfg);
    for (const Transition* t : sec.of_kind(TransitionKind::electron_conserving)) {
        const Transition* tf = full.find(sec.levels[t->from].label, sec.levels[t->to].label);
        REQUIRE(tf != nullptr);
        CHECK(std::abs(tf->freq_mhz - t->freq_mhz) < 1e-3);
    }
}

TEST_CASE("labeling flags strongly mixed levels") {
    // up-manifold longitudinal fields vanish for both nuclei, so the
    // eigenstates are 25% on every nuclear basis state
    const double b = 0.1;
    const double z_si = 8.465 * b;
    const double z_h = 42.577 * b;
    RegisterConfig cfg;
    cfg.b_field_t = b;
    cfg.electron = electron_species();
    Nucleus si{"Si", si29_species(), HyperfineTensor::secular(-2.0 * z_si, 1.0, 0.0)};
    Nucleus h{"H", hydrogen_species(), HyperfineTensor::secular(2.0 * z_h, 0.7, 0.0)};
    cfg.nuclei = {si, h};
    cfg.j_nn_khz = 0.0;
    const auto levels = diagonalize(build_hamiltonian(cfg));
    int mixed = 0;
    for (const auto& l : levels)
        if (l.mixed) {
            ++mixed;
            CHECK(l.label.rfind("mixed#", 0) == 0);
        }
    CHECK(mixed == 4); // the four up-manifold levels
}

TEST_CASE("pure Zeeman register: one ESR frequency, no nuclear-flipping strength") {
    RegisterConfig cfg;
    cfg.b_field_t = 0.2601;
    cfg.electron = electron_species();
    Nucleus n1{"Si", si29_species(), HyperfineTensor{}};
    Nucleus n2{"H", hydrogen_species(), HyperfineTensor{}};
    cfg.nuclei = {n1, n2};
    cfg.j_nn_khz = 0.0;
    const TransitionCatalog cat = build_catalog(cfg);
    std::set<double> esr_freqs;
    for (const Transition* t : cat.of_kind(TransitionKind::electron_flipping_nuclear_conserving))
        esr_freqs.insert(std::round(t->freq_mhz * 1e6));
    CHECK(esr_freqs.size() == 1);
    CHECK(cat.of_kind(TransitionKind::nuclear_flipping).empty());
}

TEST_CASE("canonical config: four resolved ESR lines with the two conditional splittings") {
    const TransitionCatalog cat = build_catalog(preset_register("paper-T1"));
    const auto esr = cat.of_kind(TransitionKind::electron_flipping_nuclear_conserving);
    REQUIRE(esr.size() == 4);
    std::vector<double> freqs;
    for (const Transition* t : esr) freqs.push_back(t->freq_mhz);
    std::sort(freqs.begin(), freqs.end());
    // resolved: neighbors separated by more than 1 MHz
    for (std::size_t i = 1; i < freqs.size(); ++i) CHECK(freqs[i] - freqs[i - 1] > 1.0);
    // conditioned on the first nucleus: ~6.9-7.3 MHz; on the second: ~2.1-2.5 MHz
    const double si_split = cat.esr_line(std::string(N_DN) + N_DN).freq_mhz -
                            cat.esr_line(std::string(N_UP) + N_DN).freq_mhz;
    CHECK(si_split > 6.4);
    CHECK(si_split < 7.5);
    const double h_split = cat.esr_line(std::string(N_DN) + N_DN).freq_mhz -
                           cat.esr_line(std::string(N_DN) + N_UP).freq_mhz;
    CHECK(h_split > 2.0);
    CHECK(h_split < 2.6);
}

TEST_CASE("full mode adds weak nuclear-flipping lines near the conserving ones") {
    RegisterConfig cfg = preset_register("paper-T1");
    cfg.mode = SecularMode::full;
    const TransitionCatalog cat = build_catalog(cfg);
    const auto esr = cat.of_kind(TransitionKind::electron_flipping_nuclear_conserving);
    double esr_lo = 1e18, esr_hi = 0, esr_elem = 1e18;
    for (const Transition* t : esr) {
        esr_lo = std::min(esr_lo, t->freq_mhz);
        esr_hi = std::max(esr_hi, t->freq_mhz);
        esr_elem = std::min(esr_elem, std::abs(t->mw_elem));
    }
    // single-flip lines of the first nucleus sit inside the conserving span
    int near_count = 0;
    int si_flips = 0;
    for (const Transition* t : cat.of_kind(TransitionKind::nuclear_flipping)) {
        const std::string a = cat.levels[t->from].label, b = cat.levels[t->to].label;
        const bool si_flip = a.substr(3, 3) != b.substr(3, 3);
        const bool h_flip = a.substr(6, 3) != b.substr(6, 3);
        CHECK(std::abs(t->mw_elem) < 0.01 * esr_elem); // far weaker than conserving lines
        if (si_flip && !h_flip) {
            ++si_flips;
            if (t->freq_mhz > esr_lo && t->freq_mhz < esr_hi) ++near_count;
        }
    }
    CHECK(si_flips == 4);
    CHECK(near_count == 4);
}

TEST_CASE("secular catalog has no nuclear-flipping lines for the canonical register") {
    const TransitionCatalog cat = build_catalog(preset_register("paper-T1"));
    CHECK(cat.of_kind(TransitionKind::nuclear_flipping).empty());
}

TEST_CASE("extract_spin_params") {
    const SpinParams p = extract_spin_params(10.005, 12.141);
    CHECK(p.zeeman_mhz == doctest::Approx(11.073).epsilon(1e-12));
    CHECK(p.a_parallel_mhz == doctest::Approx(1.068).epsilon(1e-12));
    const SpinParams q = extract_spin_params(3.5, 3.5);
    CHECK(q.zeeman_mhz == doctest::Approx(3.5));
    CHECK(q.a_parallel_mhz == doctest::Approx(0.0));
}

TEST_CASE("extract_spin_params closes against a rebuilt register") {
    // build a register producing the extracted parameters, re-extract
    const double zeeman = 11.073, a_par = 1.068;
    const double b = 0.2601;
    const RegisterConfig cfg = one_nucleus_config(b, zeeman / b, -2.0 * a_par);
    const TransitionCatalog cat = build_catalog(cfg);
    const double f_dn = cat.nmr_line(0, '-', "").freq_mhz;
    const double f_up = cat.nmr_line(0, '+', "").freq_mhz;
    const SpinParams p = extract_spin_params(std::min(f_dn, f_up), std::max(f_dn, f_up));
    CHECK(p.zeeman_mhz == doctest::Approx(zeeman).epsilon(1e-6));
    CHECK(std::abs(p.a_parallel_mhz) == doctest::Approx(a_par).epsilon(1e-6));
}

TEST_CASE("field_from_esr") {
    CHECK(field_from_esr(7.3, 2.005) == doctest::Approx(0.2601).epsilon(2e-4));
    CHECK(field_from_esr(0.0, 2.0) == 0.0);
    // closure: electron splitting of a register built at this field returns f_e
    const double b = field_from_esr(7.3, 2.005);
    const auto levels = diagonalize(build_hamiltonian(electron_only_config(b)));
    CHECK((levels[1].energy_mhz - levels[0].energy_mhz) / 1e3 ==
          doctest::Approx(7.3).epsilon(1e-9));
}

TEST_CASE("synthesize_spectrum: single line peaks at its frequency") {
    const RegisterConfig cfg = electron_only_config(0.2601);
    const TransitionCatalog cat = build_catalog(cfg);
    std::vector<double> pops = {1.0, 0.0};
    const auto spec = synthesize_spectrum(cat, 3.1, pops, {}, false);
    const auto peaks = find_peaks(spec);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].freq_mhz ==
          doctest::Approx(cat.transitions[0].freq_mhz).epsilon(1e-4));
}

TEST_CASE("canonical spectrum: two composite ESR peaks at 3.1 MHz linewidth") {
    const TransitionCatalog cat = build_catalog(preset_register("paper-T1"));
    std::vector<double> pops(8, 0.0);
    for (int i = 0; i < 8; ++i)
        if (cat.levels[i].label.rfind(E_DN, 0) == 0) pops[i] = 0.25; // uninitialized nuclei
    const auto spec = synthesize_spectrum(
        cat, 3.1, pops, {TransitionKind::electron_flipping_nuclear_conserving}, false);
    const auto peaks = find_peaks(spec, 0.2);
    REQUIRE(peaks.size() == 2);
    const double split = peaks[1].freq_mhz - peaks[0].freq_mhz;
    CHECK(split > 6.4);
    CHECK(split < 7.5);
    const double center = 0.5 * (peaks[0].freq_mhz + peaks[1].freq_mhz);
    CHECK(center > 7250.0);
    CHECK(center < 7310.0);
}

TEST_CASE("canonical spectrum resolves four lines at 0.1 MHz linewidth") {
    const TransitionCatalog cat = build_catalog(preset_register("paper-T1"));
    std::vector<double> pops(8, 0.0);
    for (int i = 0; i < 8; ++i)
        if (cat.levels[i].label.rfind(E_DN, 0) == 0) pops[i] = 0.25;
    const auto spec = synthesize_spectrum(
        cat, 0.1, pops, {TransitionKind::electron_flipping_nuclear_conserving}, false, 20001);
    const auto peaks = find_peaks(spec, 0.2);
    CHECK(peaks.size() == 4);
}

TEST_CASE("hamiltonian invariants on random registers") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        RegisterConfig cfg;
        cfg.b_field_t = 0.05 + 0.3 * std::abs(uni(rng));
        cfg.electron = electron_species(2.005);
        const int n_nuc = 1 + (trial % 2);
        for (int k = 0; k < n_nuc; ++k) {
            Nucleus n;
            n.name = k == 0 ? "Si" : "H";
            n.species = k == 0 ? si29_species() : hydrogen_species();
            n.tensor = HyperfineTensor::secular(20 * uni(rng), 3 * uni(rng), 3 * uni(rng));
            n.tensor.a(0, 0) = 5 * uni(rng);
            n.tensor.a(1, 1) = 5 * uni(rng);
            cfg.nuclei.push_back(n);
        }
        cfg.j_nn_khz = n_nuc == 2 ? 2.0 : 0.0;
        cfg.mode = trial % 3 ? SecularMode::secular : SecularMode::full;

        const Operator h = build_hamiltonian(cfg);
        CHECK(h.is_hermitian(1e-12));
        CHECK(std::abs(h.mat.trace()) < 1e-9);
        if (cfg.mode == SecularMode::secular) {
            const Matrix sz = site_operator(spin_z(), 0, 1 + n_nuc);
            CHECK((h.mat * sz - sz * h.mat).cwiseAbs().maxCoeff() < 1e-10);
        }
        const auto levels = diagonalize(h);
        for (std::size_t i = 1; i < levels.size(); ++i)
            CHECK(levels[i].energy_mhz >= levels[i - 1].energy_mhz);
        // orthonormality
        for (std::size_t i = 0; i < levels.size(); ++i)
            for (std::size_t j = 0; j < levels.size(); ++j) {
                const double ov = std::abs((levels[i].vec.adjoint() * levels[j].vec)(0));
                CHECK(std::abs(ov - (i == j ? 1.0 : 0.0)) < 1e-10);
            }
    }
}

TEST_CASE("catalog antisymmetry: reversed orientation conjugates the drive element") {
    RegisterConfig cfg = preset_register("paper-T1");
    cfg.mode = SecularMode::full;
    const TransitionCatalog cat = build_catalog(cfg);
    for (const auto& t : cat.transitions) {
        const cxd fwd = cat.drive(t.from, t.to, false);
        const cxd rev = cat.drive(t.to, t.from, false);
        CHECK(std::abs(fwd - std::conj(rev)) < 1e-14);
    }
}

TEST_CASE("analytic secular frequencies match the eigensolver for random two-spin registers") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.2, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double b = uni(rng);
        const double gyro = 40.0 * uni(rng);
        const double a_zz = 5.0 * uni(rng) * (trial % 2 ? 1 : -1);
        const RegisterConfig cfg = one_nucleus_config(b, gyro, a_zz, 0.0);
        const TransitionCatalog cat = build_catalog(cfg);
        const double z = gyro * b;
        const double f_dn = std::abs(-z - a_zz / 2);
        const double f_up = std::abs(-z + a_zz / 2);
        CHECK(cat.nmr_line(0, '-', "").freq_mhz == doctest::Approx(f_dn).epsilon(1e-9));
        CHECK(cat.nmr_line(0, '+', "").freq_mhz == doctest::Approx(f_up).epsilon(1e-9));
    }
}

TEST_CASE("configuration errors") {
    RegisterConfig cfg = electron_only_config(0.26);
    cfg.b_field_t = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(build_hamiltonian(cfg), ConfigError);
    RegisterConfig cfg2 = electron_only_config(0.26);
    cfg2.j_nn_khz = 2.0; // no nuclei
    CHECK_THROWS_AS(build_hamiltonian(cfg2), ConfigError);
    RegisterConfig cfg3 = one_nucleus_config(0.26, 42.577, 500.0); // above sanity bound
    CHECK_THROWS_AS(build_hamiltonian(cfg3), ConfigError);
}

TEST_CASE("register config text round-trips") {
    const RegisterConfig cfg = preset_register("paper-T1");
    const RegisterConfig back = parse_register_config(register_config_to_text(cfg));
    CHECK(back.b_field_t == cfg.b_field_t);
    CHECK(back.electron.gyro_or_g == cfg.electron.gyro_or_g);
    REQUIRE(back.nuclei.size() == cfg.nuclei.size());
    for (std::size_t k = 0; k < cfg.nuclei.size(); ++k) {
        CHECK(back.nuclei[k].species.gyro_or_g == cfg.nuclei[k].species.gyro_or_g);
        CHECK((back.nuclei[k].tensor.a - cfg.nuclei[k].tensor.a).cwiseAbs().maxCoeff() == 0.0);
    }
}

} // TEST_SUITE
