#pragma once

// Unit system used throughout: energies and angular frequencies in eV
// (hbar*omega convention), lengths in nm, times in fs.

namespace nmse::constants {

inline constexpr double hbar_ev_fs = 0.6582119569;        // eV fs
inline constexpr double c_nm_fs = 299.792458;             // nm/fs
inline constexpr double alpha0 = 1.0 / 137.035999084;     // fine-structure constant
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// angular frequency (rad/fs) corresponding to an energy in eV
inline constexpr double omega_rad_fs(double energy_ev) { return energy_ev / hbar_ev_fs; }

}  // namespace nmse::constants
