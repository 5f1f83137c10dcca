#pragma once

#include <complex>
#include <string>
#include <vector>

#include "nmse/kernel.hpp"
#include "nmse/spectrum.hpp"

namespace nmse {

// Single Lorentzian line of the spectral density: center omega_c, half width
// beta, strength = Gamma_0 * lambda (eV), detuning = omega_0 - omega_c.
struct LorentzianModeParams {
    double omega_c_ev = 0.0;
    double beta_ev = 0.0;
    double strength_ev = 0.0;
    double detuning_ev = 0.0;
};

enum class SolverId { Volterra, Pseudomode, Analytic };
const char* solver_name(SolverId id);

struct ConvergenceReport {
    bool checked = false;
    double max_pop_diff = 0.0;  // dt vs dt/2 population discrepancy
    double tol = 0.0;
    bool converged = true;
};

struct DynamicsResult {
    std::vector<double> t_fs;                 // uniform grid from 0
    std::vector<std::complex<double>> c1;     // excited-state amplitude, c1(0) = 1
    std::vector<double> population;           // |c1|^2
    SolverId solver = SolverId::Volterra;
    double dt_fs = 0.0;
    double delta_ndyn_ev = 0.0;
    ConvergenceReport convergence;
};

struct SolveOptions {
    bool check_convergence = true;  // re-run at dt/2 and compare populations
    double conv_tol = 1e-4;
};

// Closed-form amplitude for a single Lorentzian line extended over the whole
// real axis; the degenerate q -> 0 branch is evaluated by series.
std::complex<double> analytic_lorentzian(double t_fs, const LorentzianModeParams& params);
DynamicsResult solve_analytic(const LorentzianModeParams& params, double tmax_fs, double dt_fs);

// Exact exponential kernel of a single extended Lorentzian line.
KernelTable lorentzian_kernel_table(const LorentzianModeParams& params, double tmax_fs,
                                    double dt_fs);

// Direct integro-differential propagation with trapezoidal history sums; the
// implicit endpoint is solved in closed form (the amplitude enters linearly),
// giving a second-order A-stable step.  O(N^2) in the step count.  History
// sums reduce over fixed-size chunks, so populations are bit-identical for
// any OpenMP thread count.  The table must resolve dt (and dt/2 when the
// convergence check is on).
DynamicsResult solve_volterra(const KernelTable& table, double tmax_fs, double dt_fs,
                              const SolveOptions& opts = {});
DynamicsResult solve_volterra(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                              double tmax_fs, double dt_fs, const SolveOptions& opts = {},
                              const KernelBuildOptions& kopts = {});

// Plain serial implementation kept as the reference for testing.
DynamicsResult solve_volterra_reference(const KernelTable& table, double tmax_fs, double dt_fs);

// Coupled emitter + damped-mode ODE system (one mode per Lorentzian line),
// g_j^2 = strength_j * beta_j / 2, propagated with a stiffly accurate
// two-stage SDIRK step (L-stable, order 2).
DynamicsResult solve_pseudomode(const EmitterConfig& emitter,
                                const std::vector<LorentzianModeParams>& modes, double tmax_fs,
                                double dt_fs, double delta_ndyn_ev = 0.0,
                                const SolveOptions& opts = {});

// Pseudomode parameters from spectrum peaks: the cubic and counter-rotating
// factors are folded into the strength at each peak center.
std::vector<LorentzianModeParams> pseudomode_params(const EmitterConfig& emitter,
                                                    const std::vector<LorentzianPeak>& peaks);

// Golden-rule reference rate Gamma_0 * lambda(omega_0, z).
double markov_rate(const EmitterConfig& emitter, const PurcellSpectrum& spec);

enum class Regime { Markovian, Strong, UltrastrongTrapping };
const char* regime_name(Regime r);

struct RegimeThresholds {
    double prominence = 0.01;       // minimum rise counting as a revival
    double period_factor = 1.25;    // early period bound, x 2*pi/omega_0
    double plateau_mean_min = 0.05;
    double plateau_std_max = 0.01;
    double late_fraction = 0.2;     // trailing window used for the plateau
};

// Refuses (throws) unconverged results.
Regime classify_regime(const DynamicsResult& result, const EmitterConfig& emitter,
                       const RegimeThresholds& thresholds = {});

// First time the population reaches `fraction`; -1 when it never does.
double time_to_fraction(const DynamicsResult& result, double fraction = 0.01);

}  // namespace nmse
