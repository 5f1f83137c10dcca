#include "nmse/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmse/constants.hpp"

namespace nmse {

double purcell_factor(double omega_ev, double im_gxx, double eps) {
    if (!(omega_ev > 0.0)) throw std::domain_error("purcell_factor: omega must be positive");
    if (!(eps >= 1.0)) throw std::invalid_argument("purcell_factor: eps must be >= 1");
    const double omega_rad = constants::omega_rad_fs(omega_ev);
    const double lam = std::sqrt(eps) + 6.0 * constants::pi * constants::c_nm_fs / omega_rad * im_gxx;
    if (lam < 0.0)
        throw std::domain_error("purcell_factor: negative value, coefficient data inconsistent");
    return lam;
}

PurcellSpectrum PurcellSpectrum::tabulated(std::vector<double> omega, std::vector<double> lambda,
                                           double eps) {
    if (omega.size() != lambda.size() || omega.size() < 2)
        throw std::invalid_argument("tabulated spectrum needs >= 2 matching samples");
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (i > 0 && !(omega[i] > omega[i - 1]))
            throw std::invalid_argument("tabulated omega grid must be strictly increasing");
        if (!(lambda[i] >= 0.0)) throw std::invalid_argument("tabulated lambda must be >= 0");
    }
    if (!(eps >= 1.0)) throw std::invalid_argument("eps must be >= 1");
    PurcellSpectrum s;
    s.lo_ = omega.front();
    s.hi_ = omega.back();
    s.eps_ = eps;
    s.repr_ = Tabulated{std::move(omega), std::move(lambda)};
    return s;
}

PurcellSpectrum PurcellSpectrum::lorentzian_sum(std::vector<LorentzianPeak> peaks,
                                                double support_lo, double support_hi, double eps) {
    if (!(support_lo < support_hi) || !std::isfinite(support_lo) || !std::isfinite(support_hi))
        throw std::invalid_argument("spectrum support must be a finite interval");
    if (!(eps >= 1.0)) throw std::invalid_argument("eps must be >= 1");
    for (const auto& p : peaks) {
        if (!(p.beta_ev > 0.0)) throw std::invalid_argument("peak width must be positive");
        if (!(p.lambda >= 0.0)) throw std::invalid_argument("peak height must be >= 0");
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const LorentzianPeak& a, const LorentzianPeak& b) { return a.omega_ev < b.omega_ev; });
    PurcellSpectrum s;
    s.lo_ = support_lo;
    s.hi_ = support_hi;
    s.eps_ = eps;
    s.repr_ = LorentzianSum{std::move(peaks)};
    return s;
}

PurcellSpectrum PurcellSpectrum::greens_series(double z_nm, double radius_nm,
                                               std::shared_ptr<const GreensCoefficients> coeffs,
                                               double eps) {
    if (!coeffs || coeffs->size() == 0)
        throw std::invalid_argument("greens_series: no coefficients supplied");
    if (!(eps >= 1.0)) throw std::invalid_argument("eps must be >= 1");
    auto grid = coeffs->omega_grid(z_nm);
    if (grid.size() < 2)
        throw std::invalid_argument("greens_series: fewer than 2 coefficient grid points at this z");
    PurcellSpectrum s;
    s.lo_ = grid.front();
    s.hi_ = grid.back();
    s.eps_ = eps;
    s.repr_ = GreensSeries{z_nm, radius_nm, std::move(coeffs)};
    return s;
}

double PurcellSpectrum::baseline() const { return std::sqrt(eps_); }

double PurcellSpectrum::operator()(double omega_ev) const {
    if (omega_ev < lo_ || omega_ev > hi_) return baseline();
    if (const auto* t = std::get_if<Tabulated>(&repr_)) {
        const auto& w = t->omega;
        auto it = std::upper_bound(w.begin(), w.end(), omega_ev);
        if (it == w.begin()) return t->lambda.front();
        if (it == w.end()) return t->lambda.back();
        const std::size_t i = static_cast<std::size_t>(it - w.begin());
        const double f = (omega_ev - w[i - 1]) / (w[i] - w[i - 1]);
        return t->lambda[i - 1] + f * (t->lambda[i] - t->lambda[i - 1]);
    }
    if (const auto* l = std::get_if<LorentzianSum>(&repr_)) {
        double v = baseline();
        for (const auto& p : l->peaks) {
            const double d = omega_ev - p.omega_ev;
            v += p.lambda * p.beta_ev * p.beta_ev / (d * d + p.beta_ev * p.beta_ev);
        }
        return v;
    }
    const auto& g = std::get<GreensSeries>(repr_);
    const GreensValue gv = green_xx(g.z_nm, omega_ev, *g.coeffs, g.radius_nm);
    return purcell_factor(omega_ev, gv.value.imag(), eps_);
}

PurcellSpectrum PurcellSpectrum::to_tabulated() const {
    if (is_tabulated()) return *this;
    if (const auto* g = std::get_if<GreensSeries>(&repr_)) {
        return to_tabulated(g->coeffs->omega_grid(g->z_nm));
    }
    throw std::invalid_argument("to_tabulated: a Lorentzian sum needs an explicit grid");
}

PurcellSpectrum PurcellSpectrum::to_tabulated(const std::vector<double>& grid) const {
    std::vector<double> lam(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) lam[i] = (*this)(grid[i]);
    return tabulated(grid, std::move(lam), eps_);
}

std::vector<std::string> PurcellSpectrum::sampling_warnings() const {
    std::vector<std::string> out;
    const auto* t = std::get_if<Tabulated>(&repr_);
    if (!t) return out;
    const auto& w = t->omega;
    const auto& y = t->lambda;
    const double base = baseline();
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;  // local maximum
        const double height = y[i] - base;
        if (height <= 0.0) continue;
        const double half = base + 0.5 * height;
        // distance out to the half-height crossings on both sides
        std::size_t l = i, r = i;
        while (l > 0 && y[l] > half) --l;
        while (r + 1 < w.size() && y[r] > half) ++r;
        const double fwhm = w[r] - w[l];
        std::size_t inside = 0;
        for (std::size_t k = l; k <= r; ++k) ++inside;
        if (inside < 10) {
            out.push_back("peak near " + std::to_string(w[i]) + " eV sampled with only " +
                          std::to_string(inside) + " points per linewidth (" +
                          std::to_string(fwhm) + " eV); need >= 10 for faithful interpolation");
        }
    }
    return out;
}

}  // namespace nmse
