#include "nmse/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nmse/constants.hpp"

namespace nmse {

using std::complex;
using namespace constants;

void EmitterConfig::validate() const {
    if (!(omega0_ev > 0.0)) throw std::invalid_argument("emitter: omega0 must be positive");
    if (!(gamma0_ev > 0.0)) throw std::invalid_argument("emitter: gamma0 must be positive");
    if (!(z_nm > 0.0)) throw std::invalid_argument("emitter: z must be positive");
}

double counter_rotating_factor(double omega_ev, const EmitterConfig& emitter) {
    if (emitter.rwa == RwaMode::With) return 1.0;
    const double r = 2.0 * emitter.omega0_ev / (emitter.omega0_ev + omega_ev);
    return r * r;
}

double spectral_density(double omega_ev, const EmitterConfig& emitter,
                        const PurcellSpectrum& spec) {
    if (!(omega_ev > 0.0)) throw std::domain_error("spectral_density: omega must be positive");
    return counter_rotating_factor(omega_ev, emitter) * emitter.gamma0_ev *
           eval_spectrum(spec, omega_ev) / two_pi;
}

double spectral_density_tilde(double omega_ev, const EmitterConfig& emitter,
                              const PurcellSpectrum& spec) {
    const double r = omega_ev / emitter.omega0_ev;
    return spectral_density(omega_ev, emitter, spec) * r * r * r;
}

// ---------------------------------------------------------------------------
// panel grids over the spectrum support
// ---------------------------------------------------------------------------

namespace {

std::vector<double> spectrum_panel_nodes(const PurcellSpectrum& spec, double lo, double hi) {
    std::vector<double> nodes;
    if (const auto* t = spec.tabulated_data()) {
        nodes.push_back(lo);
        for (double w : t->omega)
            if (w > lo && w < hi) nodes.push_back(w);
        nodes.push_back(hi);
    } else if (const auto* l = spec.lorentzian_data()) {
        nodes.push_back(lo);
        nodes.push_back(hi);
        const int coarse = 64;
        for (int i = 1; i < coarse; ++i) nodes.push_back(lo + (hi - lo) * i / coarse);
        // graded nodes resolving each peak out to its far wings
        static const double offs[] = {0.0,  0.25, 0.5,  0.75, 1.0,  1.25, 1.5, 1.75, 2.0,
                                      2.25, 2.5,  2.75, 3.0,  3.5,  4.0,  5.0, 6.5,  8.5,
                                      11.0, 14.5, 19.0, 25.0};
        for (const auto& p : l->peaks) {
            for (double s : offs) {
                for (double sign : {1.0, -1.0}) {
                    const double w = p.omega_ev + sign * s * p.beta_ev;
                    if (w > lo && w < hi) nodes.push_back(w);
                    if (s == 0.0) break;
                }
            }
        }
    } else {
        throw std::invalid_argument(
            "kernel quadrature requires a tabulated or Lorentzian-sum spectrum; sample the "
            "Greens series onto its coefficient grid first");
    }
    std::sort(nodes.begin(), nodes.end());
    const double min_gap = (hi - lo) * 1e-12;
    std::vector<double> out;
    for (double w : nodes)
        if (out.empty() || w - out.back() > min_gap) out.push_back(w);
    out.back() = hi;
    return out;
}

// adaptive Simpson on one interval
double adaptive_simpson(const std::function<double(double)>& f, double a, double fa, double b,
                        double fb, double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate_panels(const std::function<double(double)>& f, const std::vector<double>& nodes,
                        double rel_tol) {
    // rough composite pass to size the absolute tolerance
    double rough = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double a = nodes[i], b = nodes[i + 1], m = 0.5 * (a + b);
        rough += (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    }
    const double tol_total = std::max(std::abs(rough), 1e-300) * rel_tol;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double a = nodes[i], b = nodes[i + 1], m = 0.5 * (a + b);
        const double fa = f(a), fb = f(b), fm = f(m);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        const double tol = tol_total * (b - a) / (nodes.back() - nodes.front());
        sum += adaptive_simpson(f, a, fa, b, fb, fm, whole, tol, 48);
    }
    return sum;
}

}  // namespace

double nondyn_shift(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                    const ShiftOptions& opts) {
    if (emitter.rwa == RwaMode::With) return 0.0;
    const double w0 = emitter.omega0_ev;
    const double lo = spec.support_lo(), hi = spec.support_hi();
    auto integrand = [&](double w) {
        const double s = w0 + w;
        return 2.0 * w * w * w / (w0 * w0 * s * s) * emitter.gamma0_ev * eval_spectrum(spec, w);
    };
    const auto nodes = spectrum_panel_nodes(spec, lo, hi);
    const double integral = integrate_panels(integrand, nodes, opts.rel_tol);

    // the baseline extends past any finite support by convention; only an
    // undecayed *induced* part at the top edge signals a truncated spectrum
    const double induced_edge = std::max(0.0, eval_spectrum(spec, hi) - spec.baseline());
    const double s_hi = w0 + hi;
    const double tail_est =
        2.0 * hi * hi * hi / (w0 * w0 * s_hi * s_hi) * emitter.gamma0_ev * induced_edge * (hi - lo);
    if (tail_est > opts.guard_tol * std::abs(integral))
        throw std::runtime_error(
            "nondyn_shift: spectrum support too narrow (induced part has not decayed at the "
            "upper edge; estimated tail " +
            std::to_string(tail_est) + " eV vs integral " + std::to_string(integral) + " eV)");

    return emitter.shift_prefactor == ShiftPrefactor::TwoPi ? two_pi * integral
                                                            : integral / two_pi;
}

// ---------------------------------------------------------------------------
// oscillatory kernel quadrature
// ---------------------------------------------------------------------------

KernelQuadrature kernel_quadrature(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                                   double delta_ndyn_ev, int subdivisions, double omega_cut_ev) {
    const double lo = spec.support_lo();
    const double hi = std::min(spec.support_hi(), omega_cut_ev);
    if (!(hi > lo))
        throw std::invalid_argument("kernel_quadrature: omega cut below the spectrum support");
    auto base = spectrum_panel_nodes(spec, lo, hi);

    KernelQuadrature q;
    q.omega0p_ev = emitter.omega0_ev - delta_ndyn_ev;
    const std::size_t splits = std::size_t{1} << subdivisions;
    q.omega.reserve((base.size() - 1) * splits + 1);
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
        for (std::size_t k = 0; k < splits; ++k)
            q.omega.push_back(base[i] + (base[i + 1] - base[i]) * double(k) / double(splits));
    }
    q.omega.push_back(base.back());
    q.jtilde.resize(q.omega.size());
    for (std::size_t i = 0; i < q.omega.size(); ++i)
        q.jtilde[i] = spectral_density_tilde(q.omega[i], emitter, spec);
    return q;
}

namespace {

// sinc(x) = sin x / x and psi(x) = (sin x - x cos x)/x^2, series-expanded for
// small arguments where the direct forms cancel
inline void sinc_psi(double x, double sx, double cx, double& sinc, double& psi) {
    const double ax = std::abs(x);
    if (ax < 0.1) {
        const double x2 = x * x;
        sinc = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
        psi = x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0));
    } else {
        sinc = sx / x;
        psi = (sx - x * cx) / (x * x);
    }
}

}  // namespace

complex<double> filon_kernel_eval(const KernelQuadrature& q, double tau_fs) {
    const double theta = tau_fs / hbar_ev_fs;
    double acc_re = 0.0, acc_im = 0.0;
    for (std::size_t i = 0; i + 1 < q.omega.size(); ++i) {
        const double a = q.omega[i], b = q.omega[i + 1];
        const double h = b - a, m = 0.5 * (a + b);
        const double gbar = 0.5 * (q.jtilde[i] + q.jtilde[i + 1]);
        const double dg = q.jtilde[i + 1] - q.jtilde[i];
        const double x = 0.5 * theta * h;
        double sinc, psi;
        sinc_psi(x, std::sin(x), std::cos(x), sinc, psi);
        // exact integral of (linear Jt) * exp(-i theta w) over the panel:
        // exp(-i theta m) * [gbar h sinc(x) - i dg (h/2) psi(x)]
        const double pr = std::cos(theta * m), pi_ = -std::sin(theta * m);
        const double tr = gbar * h * sinc;         // real part before phase
        const double ti = -0.5 * dg * h * psi;     // imag part before phase
        acc_re += pr * tr - pi_ * ti;
        acc_im += pr * ti + pi_ * tr;
    }
    // K(tau) = (i/hbar^2) exp(+i omega0' tau/hbar) * integral
    const double phi = q.omega0p_ev * theta;
    const double cr = std::cos(phi), ci = std::sin(phi);
    const double vr = cr * acc_re - ci * acc_im;
    const double vi = cr * acc_im + ci * acc_re;
    const double s = 1.0 / (hbar_ev_fs * hbar_ev_fs);
    return complex<double>(-vi * s, vr * s);
}

void filon_kernel_eval_block(const KernelQuadrature& q, double tau0_fs, double dtau_fs,
                             complex<double>* out, std::size_t count) {
    if (count == 0) return;
    std::vector<double> acc_re(count, 0.0), acc_im(count, 0.0);
    const double theta0 = tau0_fs / hbar_ev_fs;
    const double dtheta = dtau_fs / hbar_ev_fs;
    for (std::size_t i = 0; i + 1 < q.omega.size(); ++i) {
        const double a = q.omega[i], b = q.omega[i + 1];
        const double h = b - a, m = 0.5 * (a + b);
        const double gbar = 0.5 * (q.jtilde[i] + q.jtilde[i + 1]);
        const double dg = q.jtilde[i + 1] - q.jtilde[i];
        // phase exp(-i theta m) and oscillation argument advance by fixed
        // rotations per tau step; exact trig only at the block start
        double pr = std::cos(theta0 * m), pi_ = -std::sin(theta0 * m);
        const double prs = std::cos(dtheta * m), pis = -std::sin(dtheta * m);
        double x = 0.5 * theta0 * h;
        const double dx = 0.5 * dtheta * h;
        double sx = std::sin(x), cx = std::cos(x);
        const double sdx = std::sin(dx), cdx = std::cos(dx);
        for (std::size_t k = 0; k < count; ++k) {
            double sinc, psi;
            sinc_psi(x, sx, cx, sinc, psi);
            const double tr = gbar * h * sinc;
            const double ti = -0.5 * dg * h * psi;
            acc_re[k] += pr * tr - pi_ * ti;
            acc_im[k] += pr * ti + pi_ * tr;
            const double npr = pr * prs - pi_ * pis;
            pi_ = pr * pis + pi_ * prs;
            pr = npr;
            const double nsx = sx * cdx + cx * sdx;
            cx = cx * cdx - sx * sdx;
            sx = nsx;
            x += dx;
        }
    }
    const double s = 1.0 / (hbar_ev_fs * hbar_ev_fs);
    double phr = std::cos(q.omega0p_ev * theta0), phi_ = std::sin(q.omega0p_ev * theta0);
    const double phrs = std::cos(q.omega0p_ev * dtheta), phis = std::sin(q.omega0p_ev * dtheta);
    for (std::size_t k = 0; k < count; ++k) {
        const double vr = phr * acc_re[k] - phi_ * acc_im[k];
        const double vi = phr * acc_im[k] + phi_ * acc_re[k];
        out[k] = complex<double>(-vi * s, vr * s);
        const double nr = phr * phrs - phi_ * phis;
        phi_ = phr * phis + phi_ * phrs;
        phr = nr;
    }
}

// ---------------------------------------------------------------------------
// kernel tables
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kTauBlock = 2048;  // fixed fan-out unit; part of the numeric contract

void eval_table_parallel(const KernelQuadrature& q, double dt, std::vector<complex<double>>& out) {
    const std::size_t n = out.size();
    const std::size_t nblocks = (n + kTauBlock - 1) / kTauBlock;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
        const std::size_t k0 = static_cast<std::size_t>(b) * kTauBlock;
        const std::size_t cnt = std::min(kTauBlock, n - k0);
        filon_kernel_eval_block(q, double(k0) * dt, dt, out.data() + k0, cnt);
    }
}

void eval_table_serial(const KernelQuadrature& q, double dt, std::vector<complex<double>>& out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = filon_kernel_eval(q, double(i) * dt);
}

KernelTable build_table_impl(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                             double tmax_fs, double dt_fs, const KernelBuildOptions& opts,
                             bool parallel) {
    if (!(tmax_fs > 0.0) || !(dt_fs > 0.0))
        throw std::invalid_argument("kernel table: tmax and dt must be positive");
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(tmax_fs / dt_fs - 1e-9)));
    const std::size_t n = steps + 1;

    const double delta =
        emitter.rwa == RwaMode::Beyond ? nondyn_shift(emitter, spec, opts.shift) : 0.0;

    std::vector<complex<double>> prev(n), cur(n);
    double delta_rel = 0.0;
    std::size_t panels = 0;
    bool done = false;
    for (int level = 0; level <= opts.max_refine; ++level) {
        KernelQuadrature q = kernel_quadrature(emitter, spec, delta, level, opts.omega_cut_ev);
        panels = q.omega.size() - 1;
        if (parallel)
            eval_table_parallel(q, dt_fs, cur);
        else
            eval_table_serial(q, dt_fs, cur);
        if (level > 0) {
            double dmax = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dmax = std::max(dmax, std::abs(cur[i] - prev[i]));
                scale = std::max(scale, std::abs(cur[i]));
            }
            delta_rel = dmax / std::max(scale, 1e-300);
            if (dmax <= opts.tol_rel * std::max(scale, 1e-300)) {
                done = true;
                break;
            }
        }
        std::swap(prev, cur);
    }
    if (!done)
        throw std::runtime_error(
            "kernel table quadrature did not converge: last halving changed the kernel by " +
            std::to_string(delta_rel) + " (relative) with " + std::to_string(panels) +
            " panels; target " + std::to_string(opts.tol_rel));

    KernelTable table;
    table.dt_fs = dt_fs;
    table.values = std::move(cur);
    table.omega_cut_ev = std::min(spec.support_hi(), opts.omega_cut_ev);
    table.quadrature = "filon-linear";
    table.delta_ndyn_ev = delta;
    table.converged = true;
    table.refine_delta_rel = delta_rel;
    table.tol_rel = opts.tol_rel;
    table.panels = panels;
    return table;
}

}  // namespace

KernelTable build_kernel_table(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                               double tmax_fs, double dt_fs, const KernelBuildOptions& opts) {
    return build_table_impl(emitter, spec, tmax_fs, dt_fs, opts, true);
}

KernelTable build_kernel_table_serial(const EmitterConfig& emitter, const PurcellSpectrum& spec,
                                      double tmax_fs, double dt_fs,
                                      const KernelBuildOptions& opts) {
    return build_table_impl(emitter, spec, tmax_fs, dt_fs, opts, false);
}

complex<double> memory_kernel(double tau_fs, const EmitterConfig& emitter,
                              const PurcellSpectrum& spec, const KernelBuildOptions& opts) {
    if (tau_fs < 0.0) throw std::invalid_argument("memory_kernel: tau must be >= 0");
    const double delta =
        emitter.rwa == RwaMode::Beyond ? nondyn_shift(emitter, spec, opts.shift) : 0.0;
    complex<double> prev(0.0, 0.0);
    for (int level = 0; level <= opts.max_refine; ++level) {
        KernelQuadrature q = kernel_quadrature(emitter, spec, delta, level, opts.omega_cut_ev);
        const complex<double> v = filon_kernel_eval(q, tau_fs);
        const double scale = std::max(std::abs(filon_kernel_eval(q, 0.0)), 1e-300);
        if (level > 0 && std::abs(v - prev) <= opts.tol_rel * scale) return v;
        prev = v;
    }
    throw std::runtime_error("memory_kernel: quadrature did not converge at tau = " +
                             std::to_string(tau_fs) + " fs");
}

}  // namespace nmse
