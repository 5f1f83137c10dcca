#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "nmse/spectrum.hpp"

namespace nmse {

enum class RwaMode { With, Beyond };

// The energy-shift prefactor is written ambiguously in the defining
// expression; both readings are available and neither is asserted.
enum class ShiftPrefactor { TwoPi, InvTwoPi };

struct EmitterConfig {
    double omega0_ev = 0.0;  // free-space transition energy
    double gamma0_ev = 0.0;  // free-space decay width Gamma_0(omega_0)
    double z_nm = 0.0;       // distance from the disk center along the axis
    RwaMode rwa = RwaMode::With;
    ShiftPrefactor shift_prefactor = ShiftPrefactor::InvTwoPi;

    void validate() const;  // throws std::invalid_argument
};

// counter-rotating correction (2 w0/(w0+w))^2; 1 in the rotating-wave mode
double counter_rotating_factor(double omega_ev, const EmitterConfig& emitter);

// Emitter-reservoir spectral density J(omega) (eV) and its cubic-corrected
// form Jt(omega) = J(omega) (omega/omega0)^3.
double spectral_density(double omega_ev, const EmitterConfig& emitter,
                        const PurcellSpectrum& spec);
double spectral_density_tilde(double omega_ev, const EmitterConfig& emitter,
                              const PurcellSpectrum& spec);

struct ShiftOptions {
    // Abort when the induced spectrum has not decayed at the top of the
    // support: estimated tail (edge integrand x support width) must stay
    // below guard_tol x |integral|.  Infinity disables the guard.
    double guard_tol = 0.1;
    double rel_tol = 1e-11;  // quadrature tolerance
};

// Non-dynamical level shift from counter-rotating coupling, integrated over
// the spectrum support.  Exactly zero in the rotating-wave mode.
double nondyn_shift(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                    const ShiftOptions& opts = {});

// Integrand samples for the oscillatory kernel integral: Jt on a panel grid
// covering the spectrum support plus the rotating-frame frequency.
struct KernelQuadrature {
    std::vector<double> omega;   // panel nodes (eV), strictly increasing
    std::vector<double> jtilde;  // Jt at the nodes (eV)
    double omega0p_ev = 0.0;     // omega_0' = omega_0 - delta_ndyn
};

// Build the base quadrature grid (optionally pre-subdivided); throws on
// spectra without a usable grid (Greens series must be tabulated first).
KernelQuadrature kernel_quadrature(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                                   double delta_ndyn_ev, int subdivisions = 0,
                                   double omega_cut_ev = std::numeric_limits<double>::infinity());

// Direct Filon evaluation of K(tau) on the grid: each panel integrates
// (linear Jt) x exp(-i omega tau) exactly, so accuracy is uniform in tau.
std::complex<double> filon_kernel_eval(const KernelQuadrature& q, double tau_fs);

// Same rule evaluated for a block of equally spaced tau via phase
// recurrences; bit-identical results for a fixed block decomposition.
void filon_kernel_eval_block(const KernelQuadrature& q, double tau0_fs, double dtau_fs,
                             std::complex<double>* out, std::size_t count);

struct KernelBuildOptions {
    double tol_rel = 1e-6;  // refinement target, relative to max |K|
    int max_refine = 11;
    double omega_cut_ev = std::numeric_limits<double>::infinity();
    ShiftOptions shift;
};

// Sampled memory kernel K(tau) on a uniform tau >= 0 grid, with the
// quadrature-refinement metadata needed to trust it.
struct KernelTable {
    double dt_fs = 0.0;
    std::vector<std::complex<double>> values;  // K(i*dt), 1/fs^2
    double omega_cut_ev = 0.0;
    std::string quadrature;
    double delta_ndyn_ev = 0.0;
    bool converged = false;
    double refine_delta_rel = 0.0;  // last halving change, relative to max |K|
    double tol_rel = 0.0;
    std::size_t panels = 0;
};

// One-shot kernel value; grid refined until the value is stable.
std::complex<double> memory_kernel(double tau_fs, const EmitterConfig& emitter,
                                   const PurcellSpectrum& spec,
                                   const KernelBuildOptions& opts = {});

// Table covering [0, tmax]; refinement is certified against all stored nodes.
// The OpenMP build fans out over tau blocks with a fixed decomposition, so
// results are bit-identical for any thread count; the serial variant is the
// plain reference used in tests and benchmarks.
KernelTable build_kernel_table(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                               double tmax_fs, double dt_fs, const KernelBuildOptions& opts = {});
KernelTable build_kernel_table_serial(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                                      double tmax_fs, double dt_fs,
                                      const KernelBuildOptions& opts = {});

}  // namespace nmse
