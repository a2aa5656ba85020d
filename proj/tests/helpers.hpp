// shared test helpers: label shorthands and small builders
#pragma once

#include <random>
#include <string>

#include "spinreg/presets.hpp"
#include "spinreg/register.hpp"

namespace testutil {

inline const char* E_UP = "↑";
inline const char* E_DN = "↓";
inline const char* N_UP = "⇑";
inline const char* N_DN = "⇓";

inline std::string lbl(const char* e, const char* n1, const char* n2) {
    return std::string(e) + n1 + n2;
}
inline std::string lbl(const char* e, const char* n1) { return std::string(e) + n1; }

// electron + one hydrogen nucleus with a symmetric secular tensor
inline spinreg::RegisterConfig one_nucleus_config(double b_field_t, double gyro, double a_zz,
                                                  double a_zx = 0.0) {
    spinreg::RegisterConfig cfg;
    cfg.b_field_t = b_field_t;
    cfg.electron = spinreg::electron_species();
    spinreg::Nucleus n;
    n.name = "H";
    n.species = spinreg::hydrogen_species(gyro);
    n.tensor = spinreg::HyperfineTensor::secular(a_zz, a_zx, 0.0);
    cfg.nuclei.push_back(n);
    cfg.j_nn_khz = 0.0;
    return cfg;
}

inline spinreg::RegisterConfig electron_only_config(double b_field_t, double g = 2.005) {
    spinreg::RegisterConfig cfg;
    cfg.b_field_t = b_field_t;
    cfg.electron = spinreg::electron_species(g);
    cfg.j_nn_khz = 0.0;
    return cfg;
}

} // namespace testutil
