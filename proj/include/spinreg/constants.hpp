// constants.hpp — physical constants and unit conventions.
//
// Internal units everywhere: frequency MHz, time microseconds, field tesla.
// Noise amplitudes are specified in kHz at API boundaries and converted here.

#pragma once

namespace spinreg::constants {

// CODATA 2018
inline constexpr double PLANCK_J_PER_HZ = 6.62607015e-34;
inline constexpr double BOHR_MAGNETON_J_PER_T = 9.2740100783e-24;

// Electron Zeeman conversion: f[MHz] = g * MU_B_MHZ_PER_T * B[T]
inline constexpr double MU_B_MHZ_PER_T = BOHR_MAGNETON_J_PER_T / PLANCK_J_PER_HZ * 1e-6;

// Literature gyromagnetic ratios, MHz/T (signed)
inline constexpr double GYRO_H_MHZ_PER_T = 42.577;
inline constexpr double GYRO_SI29_MHZ_PER_T = -8.465;

inline constexpr double G_E_DEFAULT = 2.005;

// Natural abundance of spin-1/2 silicon
inline constexpr double SI29_ABUNDANCE = 0.0467;

inline constexpr double TWO_PI = 6.283185307179586476925286766559;

} // namespace spinreg::constants
