#include "nmse/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "nmse/constants.hpp"

namespace nmse {

using std::complex;
using namespace constants;

const char* solver_name(SolverId id) {
    switch (id) {
        case SolverId::Volterra: return "volterra";
        case SolverId::Pseudomode: return "pseudomode";
        case SolverId::Analytic: return "analytic";
    }
    return "?";
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Markovian: return "markovian";
        case Regime::Strong: return "strong";
        case Regime::UltrastrongTrapping: return "ultrastrong+trapping";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// closed-form single-Lorentzian amplitude
// ---------------------------------------------------------------------------

complex<double> analytic_lorentzian(double t_fs, const LorentzianModeParams& p) {
    if (t_fs < 0.0) throw std::invalid_argument("analytic_lorentzian: t must be >= 0");
    const complex<double> bt(p.beta_ev, -p.detuning_ev);  // beta - i Delta
    const complex<double> q = std::sqrt(bt * bt - 2.0 * p.strength_ev * p.beta_ev);
    const double th = t_fs / hbar_ev_fs;
    if (std::abs(q) * th < 1e-6) {
        // q -> 0: cosh + (bt/q) sinh -> 1 + bt t/2 plus O((q t)^2) corrections
        const complex<double> qt = 0.5 * q * th;
        const complex<double> btt = 0.5 * bt * th;
        return std::exp(-btt) * (1.0 + 0.5 * qt * qt + btt * (1.0 + qt * qt / 6.0));
    }
    // exponential form: both pole rates (-bt +- q)/2 have non-positive real
    // part for physical parameters, so neither term overflows
    const complex<double> w = bt / q;
    return 0.5 * (1.0 + w) * std::exp(0.5 * (q - bt) * th) +
           0.5 * (1.0 - w) * std::exp(-0.5 * (q + bt) * th);
}

namespace {

std::size_t step_count(double tmax, double dt) {
    if (!(tmax > 0.0) || !(dt > 0.0)) throw std::invalid_argument("tmax and dt must be positive");
    return static_cast<std::size_t>(std::llround(std::ceil(tmax / dt - 1e-9)));
}

void fill_time_and_population(DynamicsResult& r) {
    const std::size_t n = r.c1.size();
    r.t_fs.resize(n);
    r.population.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.t_fs[i] = double(i) * r.dt_fs;
        r.population[i] = std::norm(r.c1[i]);
    }
}

}  // namespace

DynamicsResult solve_analytic(const LorentzianModeParams& p, double tmax_fs, double dt_fs) {
    const std::size_t steps = step_count(tmax_fs, dt_fs);
    DynamicsResult r;
    r.solver = SolverId::Analytic;
    r.dt_fs = dt_fs;
    r.c1.resize(steps + 1);
    r.c1[0] = 1.0;
    for (std::size_t i = 1; i <= steps; ++i) r.c1[i] = analytic_lorentzian(double(i) * dt_fs, p);
    fill_time_and_population(r);
    r.convergence = ConvergenceReport{false, 0.0, 0.0, true};
    return r;
}

KernelTable lorentzian_kernel_table(const LorentzianModeParams& p, double tmax_fs, double dt_fs) {
    const std::size_t steps = step_count(tmax_fs, dt_fs);
    KernelTable t;
    t.dt_fs = dt_fs;
    t.values.resize(steps + 1);
    // K(tau) = i (strength*beta/2) exp((i Delta - beta) tau), rates in 1/fs
    const double amp = 0.5 * p.strength_ev * p.beta_ev / (hbar_ev_fs * hbar_ev_fs);
    const complex<double> rate(-p.beta_ev / hbar_ev_fs, p.detuning_ev / hbar_ev_fs);
    for (std::size_t i = 0; i <= steps; ++i) {
        const double tau = double(i) * dt_fs;
        t.values[i] = complex<double>(0.0, amp) * std::exp(rate * tau);
    }
    t.omega_cut_ev = std::numeric_limits<double>::infinity();
    t.quadrature = "closed-form-lorentzian";
    t.delta_ndyn_ev = 0.0;
    t.converged = true;
    t.tol_rel = 0.0;
    return t;
}

// ---------------------------------------------------------------------------
// Volterra propagation
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kSumChunk = 4096;  // fixed reduction unit (bit-stable for any thread count)

// history sum S_n = 1/2 K[n+1] c[0] + sum_{m=1..n} K[n+1-m] c[m];
// kernel values are read at stride `ks` from a finer table
complex<double> history_sum(const complex<double>* k, std::size_t ks, const complex<double>* c,
                            std::size_t n, bool parallel) {
    double sr = 0.5 * (k[(n + 1) * ks].real() * c[0].real() - k[(n + 1) * ks].imag() * c[0].imag());
    double si = 0.5 * (k[(n + 1) * ks].real() * c[0].imag() + k[(n + 1) * ks].imag() * c[0].real());
    if (n == 0) return {sr, si};
    const std::size_t nchunks = (n + kSumChunk - 1) / kSumChunk;
    std::vector<complex<double>> partial(nchunks);
#pragma omp parallel for schedule(static) if (parallel && nchunks > 3)
    for (std::ptrdiff_t ch = 0; ch < static_cast<std::ptrdiff_t>(nchunks); ++ch) {
        const std::size_t m0 = 1 + static_cast<std::size_t>(ch) * kSumChunk;
        const std::size_t m1 = std::min(n, m0 + kSumChunk - 1);
        double pr = 0.0, pi_ = 0.0;
        for (std::size_t m = m0; m <= m1; ++m) {
            const double kr = k[(n + 1 - m) * ks].real();
            const double ki = k[(n + 1 - m) * ks].imag();
            const double cr = c[m].real(), ci = c[m].imag();
            pr += kr * cr - ki * ci;
            pi_ += kr * ci + ki * cr;
        }
        partial[static_cast<std::size_t>(ch)] = {pr, pi_};
    }
    for (const auto& p : partial) {
        sr += p.real();
        si += p.imag();
    }
    return {sr, si};
}

DynamicsResult volterra_impl(const KernelTable& table, double tmax_fs, double dt_fs,
                             bool parallel) {
    const std::size_t steps = step_count(tmax_fs, dt_fs);
    const double ratio = dt_fs / table.dt_fs;
    const auto ks = static_cast<std::size_t>(std::llround(ratio));
    if (ks == 0 || std::abs(ratio - double(ks)) > 1e-9 * ratio)
        throw std::invalid_argument("solve_volterra: dt must be an integer multiple of the kernel table step");
    if (steps * ks + 1 > table.values.size())
        throw std::invalid_argument("solve_volterra: kernel table does not cover tmax");

    DynamicsResult r;
    r.solver = SolverId::Volterra;
    r.dt_fs = dt_fs;
    r.delta_ndyn_ev = table.delta_ndyn_ev;
    r.c1.assign(steps + 1, complex<double>(0.0, 0.0));
    r.c1[0] = 1.0;

    const complex<double>* k = table.values.data();
    const complex<double> i_unit(0.0, 1.0);
    const complex<double> k0 = k[0];
    // trapezoidal step with the implicit endpoint solved in closed form:
    // c_{n+1} (1 - i dt^2 K0 / 4) = c_n + dt/2 F_n + (i dt^2 / 2) S_n
    const complex<double> denom = 1.0 - i_unit * dt_fs * dt_fs * 0.25 * k0;
    complex<double> f_prev(0.0, 0.0);  // F_0 = 0 (empty history integral)
    for (std::size_t n = 0; n < steps; ++n) {
        const complex<double> s = history_sum(k, ks, r.c1.data(), n, parallel);
        const complex<double> c_next =
            (r.c1[n] + 0.5 * dt_fs * f_prev + i_unit * 0.5 * dt_fs * dt_fs * s) / denom;
        r.c1[n + 1] = c_next;
        f_prev = i_unit * dt_fs * (s + 0.5 * k0 * c_next);
    }
    fill_time_and_population(r);
    return r;
}

}  // namespace

DynamicsResult solve_volterra(const KernelTable& table, double tmax_fs, double dt_fs,
                              const SolveOptions& opts) {
    if (opts.check_convergence && table.dt_fs > 0.5 * dt_fs * (1.0 + 1e-9))
        throw std::invalid_argument(
            "solve_volterra: the dt/2 convergence check needs a kernel table with step <= dt/2");
    DynamicsResult r = volterra_impl(table, tmax_fs, dt_fs, true);
    if (opts.check_convergence) {
        DynamicsResult half = volterra_impl(table, tmax_fs, 0.5 * dt_fs, true);
        double dmax = 0.0;
        for (std::size_t i = 0; i < r.population.size(); ++i)
            dmax = std::max(dmax, std::abs(r.population[i] - half.population[2 * i]));
        r.convergence = ConvergenceReport{true, dmax, opts.conv_tol, dmax <= opts.conv_tol};
    } else {
        r.convergence = ConvergenceReport{false, 0.0, opts.conv_tol, true};
    }
    return r;
}

DynamicsResult solve_volterra(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                              double tmax_fs, double dt_fs, const SolveOptions& opts,
                              const KernelBuildOptions& kopts) {
    const double table_dt = opts.check_convergence ? 0.5 * dt_fs : dt_fs;
    const KernelTable table = build_kernel_table(emitter, spec, tmax_fs, table_dt, kopts);
    return solve_volterra(table, tmax_fs, dt_fs, opts);
}

DynamicsResult solve_volterra_reference(const KernelTable& table, double tmax_fs, double dt_fs) {
    // same scheme, plain sequential accumulation; kept as the test oracle for
    // the chunked OpenMP path
    const std::size_t steps = step_count(tmax_fs, dt_fs);
    const auto ks = static_cast<std::size_t>(std::llround(dt_fs / table.dt_fs));
    if (ks == 0 || (steps + 1) * ks >= table.values.size() + ks)
        throw std::invalid_argument("solve_volterra_reference: kernel table too short");
    DynamicsResult r;
    r.solver = SolverId::Volterra;
    r.dt_fs = dt_fs;
    r.delta_ndyn_ev = table.delta_ndyn_ev;
    r.c1.assign(steps + 1, complex<double>(0.0, 0.0));
    r.c1[0] = 1.0;
    const complex<double> i_unit(0.0, 1.0);
    const complex<double> k0 = table.values[0];
    const complex<double> denom = 1.0 - i_unit * dt_fs * dt_fs * 0.25 * k0;
    complex<double> f_prev(0.0, 0.0);
    for (std::size_t n = 0; n < steps; ++n) {
        complex<double> s = 0.5 * table.values[(n + 1) * ks] * r.c1[0];
        for (std::size_t m = 1; m <= n; ++m) s += table.values[(n + 1 - m) * ks] * r.c1[m];
        const complex<double> c_next =
            (r.c1[n] + 0.5 * dt_fs * f_prev + i_unit * 0.5 * dt_fs * dt_fs * s) / denom;
        r.c1[n + 1] = c_next;
        f_prev = i_unit * dt_fs * (s + 0.5 * k0 * c_next);
    }
    fill_time_and_population(r);
    r.convergence = ConvergenceReport{false, 0.0, 0.0, true};
    return r;
}

// ---------------------------------------------------------------------------
// pseudomode ODE propagation
// ---------------------------------------------------------------------------

namespace {

// y = (c1, b_1..b_M):  c1' = -i sum g_j b_j,
//                      b_j' = (i(w0' - w_j) - beta_j) b_j - i g_j c1
Eigen::MatrixXcd pseudomode_matrix(const EmitterConfig& emitter,
                                   const std::vector<LorentzianModeParams>& modes,
                                   double delta_ndyn_ev) {
    const auto m = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m + 1, m + 1);
    const double w0p = (emitter.omega0_ev - delta_ndyn_ev) / hbar_ev_fs;
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& md = modes[static_cast<std::size_t>(j)];
        if (!(md.beta_ev > 0.0))
            throw std::invalid_argument("solve_pseudomode: every mode needs beta > 0");
        const double g = std::sqrt(std::max(0.0, 0.5 * md.strength_ev * md.beta_ev)) / hbar_ev_fs;
        const double wj = md.omega_c_ev / hbar_ev_fs;
        const double bj = md.beta_ev / hbar_ev_fs;
        a(0, j + 1) = complex<double>(0.0, -g);
        a(j + 1, 0) = complex<double>(0.0, -g);
        a(j + 1, j + 1) = complex<double>(-bj, w0p - wj);
    }
    return a;
}

std::vector<complex<double>> sdirk2_run(const Eigen::MatrixXcd& a, double dt, std::size_t steps) {
    // Alexander's two-stage SDIRK: gamma = 1 - 1/sqrt(2), L-stable, stiffly
    // accurate; the system is linear so each stage is one solve with a
    // factorization computed once
    const double gamma = 1.0 - 1.0 / std::sqrt(2.0);
    const Eigen::Index dim = a.rows();
    const Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(dim, dim) - gamma * dt * a;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(lhs);

    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim);
    y(0) = 1.0;
    std::vector<complex<double>> c1(steps + 1);
    c1[0] = 1.0;
    for (std::size_t n = 1; n <= steps; ++n) {
        const Eigen::VectorXcd k1 = lu.solve(a * y);
        const Eigen::VectorXcd k2 = lu.solve(a * (y + (1.0 - gamma) * dt * k1));
        y += dt * ((1.0 - gamma) * k1 + gamma * k2);
        c1[n] = y(0);
    }
    return c1;
}

}  // namespace

DynamicsResult solve_pseudomode(const EmitterConfig& emitter,
                                const std::vector<LorentzianModeParams>& modes, double tmax_fs,
                                double dt_fs, double delta_ndyn_ev, const SolveOptions& opts) {
    const std::size_t steps = step_count(tmax_fs, dt_fs);
    const Eigen::MatrixXcd a = pseudomode_matrix(emitter, modes, delta_ndyn_ev);

    DynamicsResult r;
    r.solver = SolverId::Pseudomode;
    r.dt_fs = dt_fs;
    r.delta_ndyn_ev = delta_ndyn_ev;
    r.c1 = sdirk2_run(a, dt_fs, steps);
    fill_time_and_population(r);
    if (opts.check_convergence) {
        const auto half = sdirk2_run(a, 0.5 * dt_fs, 2 * steps);
        double dmax = 0.0;
        for (std::size_t i = 0; i <= steps; ++i)
            dmax = std::max(dmax, std::abs(r.population[i] - std::norm(half[2 * i])));
        r.convergence = ConvergenceReport{true, dmax, opts.conv_tol, dmax <= opts.conv_tol};
    } else {
        r.convergence = ConvergenceReport{false, 0.0, opts.conv_tol, true};
    }
    return r;
}

std::vector<LorentzianModeParams> pseudomode_params(const EmitterConfig& emitter,
                                                    const std::vector<LorentzianPeak>& peaks) {
    std::vector<LorentzianModeParams> modes;
    modes.reserve(peaks.size());
    for (const auto& p : peaks) {
        const double r = p.omega_ev / emitter.omega0_ev;
        const double strength = emitter.gamma0_ev * p.lambda * r * r * r *
                                counter_rotating_factor(p.omega_ev, emitter);
        modes.push_back({p.omega_ev, p.beta_ev, strength, emitter.omega0_ev - p.omega_ev});
    }
    return modes;
}

double markov_rate(const EmitterConfig& emitter, const PurcellSpectrum& spec) {
    return emitter.gamma0_ev * eval_spectrum(spec, emitter.omega0_ev);
}

// ---------------------------------------------------------------------------
// regime classification
// ---------------------------------------------------------------------------

namespace {

struct Extremum {
    std::size_t idx;
    bool is_max;
};

std::vector<Extremum> local_extrema(const std::vector<double>& y) {
    std::vector<Extremum> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.push_back({i, true});
        else if (y[i] < y[i - 1] && y[i] <= y[i + 1]) out.push_back({i, false});
    }
    return out;
}

}  // namespace

Regime classify_regime(const DynamicsResult& result, const EmitterConfig& emitter,
                       const RegimeThresholds& th) {
    if (!result.convergence.converged)
        throw std::invalid_argument("classify_regime: refusing an unconverged result");
    if (result.population.size() < 8)
        throw std::invalid_argument("classify_regime: trajectory too short");
    const auto& pop = result.population;

    // ultrastrong + trapping: sub-optical-cycle early oscillation and a late
    // plateau that stays put
    const double t_cycle = two_pi * hbar_ev_fs / emitter.omega0_ev;
    {
        const double early_t = 20.0 * t_cycle;
        std::size_t n_early = std::min(pop.size(), static_cast<std::size_t>(early_t / result.dt_fs) + 1);
        std::vector<double> head(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(n_early));
        std::vector<double> tmin;
        auto ext = local_extrema(head);
        for (const auto& e : ext)
            if (!e.is_max) tmin.push_back(result.t_fs[e.idx]);
        if (tmin.size() >= 2) {
            const double period = (tmin.back() - tmin.front()) / double(tmin.size() - 1);
            const std::size_t tail_start =
                pop.size() - std::max<std::size_t>(2, static_cast<std::size_t>(th.late_fraction * double(pop.size())));
            double mean = 0.0;
            for (std::size_t i = tail_start; i < pop.size(); ++i) mean += pop[i];
            mean /= double(pop.size() - tail_start);
            double var = 0.0;
            for (std::size_t i = tail_start; i < pop.size(); ++i)
                var += (pop[i] - mean) * (pop[i] - mean);
            const double sd = std::sqrt(var / double(pop.size() - tail_start));
            if (period <= th.period_factor * t_cycle && mean > th.plateau_mean_min &&
                sd < th.plateau_std_max)
                return Regime::UltrastrongTrapping;
        }
    }

    // strong: at least one revival (local max rising above the preceding
    // minimum by more than the prominence threshold)
    auto ext = local_extrema(pop);
    double run_min = pop.front();
    bool seen_min = false;
    for (const auto& e : ext) {
        if (!e.is_max) {
            run_min = seen_min ? std::min(run_min, pop[e.idx]) : pop[e.idx];
            seen_min = true;
        } else if (seen_min && pop[e.idx] - run_min > th.prominence) {
            return Regime::Strong;
        }
    }
    return Regime::Markovian;
}

double time_to_fraction(const DynamicsResult& result, double fraction) {
    for (std::size_t i = 0; i < result.population.size(); ++i)
        if (result.population[i] <= fraction) return result.t_fs[i];
    return -1.0;
}

}  // namespace nmse
