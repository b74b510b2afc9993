#pragma once

#include <numbers>

namespace spinvar::constants {

// CODATA 2018
inline constexpr double mu0 = 1.25663706212e-6;        // vacuum permeability, N/A^2
inline constexpr double hbar = 1.054571817e-34;        // reduced Planck constant, J s
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// NV center electronic gyromagnetic ratio, rad s^-1 T^-1 (28.03 GHz/T)
inline constexpr double gamma_nv = two_pi * 28.03e9;

// Experimentally reported platform parameters kept as presets for the Ramsey
// noise model and the CLI. Times in seconds, frequencies in Hz, fidelities in [0,1].
struct PlatformPreset {
  const char* name;
  double fdd_hz;         // mean nearest-neighbor dipolar coupling
  double t2_dd_s;        // coherence time under dynamical decoupling
  double init_fidelity;
  double readout_fidelity;
  double nu_min;         // stretch factor range of the coherence decay
  double nu_max;
};

inline constexpr PlatformPreset platform_presets[] = {
    {"nv-ensemble", 35.0e3, 7.9e-6, 0.975, 0.975, 2.0, 4.0},
    {"p1-centers", 0.92e6, 4.4e-6, 0.95, 0.95, 2.0, 2.0},
    {"rare-earth", 1.96e6, 2.5e-6, 0.97, 0.946, 2.4, 2.4},
    {"cold-molecules", 52.0, 80.0e-3, 0.97, 0.97, 1.0, 1.0},
};

}  // namespace spinvar::constants
