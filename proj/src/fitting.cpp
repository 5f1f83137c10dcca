#include "nmse/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace nmse {

namespace {

struct FitData {
    std::vector<double> w;  // sample frequencies in the window
    std::vector<double> y;  // induced part (baseline subtracted)
};

FitData window_samples(const PurcellSpectrum& spec, double lo, double hi) {
    const auto* t = spec.tabulated_data();
    if (!t) throw std::invalid_argument("fit_lorentzians: spectrum must be tabulated");
    if (!(lo < hi) || lo < spec.support_lo() - 1e-12 || hi > spec.support_hi() + 1e-12)
        throw std::invalid_argument("fit_lorentzians: window must lie inside the spectrum support");
    FitData d;
    const double base = spec.baseline();
    for (std::size_t i = 0; i < t->omega.size(); ++i) {
        if (t->omega[i] < lo || t->omega[i] > hi) continue;
        d.w.push_back(t->omega[i]);
        d.y.push_back(t->lambda[i] - base);
    }
    if (d.w.size() < 4) throw std::invalid_argument("fit_lorentzians: window holds too few samples");
    return d;
}

// model: sum_j  lam_j * beta_j^2 / ((w - w_j)^2 + beta_j^2)
double model_eval(const std::vector<LorentzianPeak>& peaks, double w) {
    double v = 0.0;
    for (const auto& p : peaks) {
        const double d = w - p.omega_ev;
        v += p.lambda * p.beta_ev * p.beta_ev / (d * d + p.beta_ev * p.beta_ev);
    }
    return v;
}

double rel_l2_residual(const std::vector<LorentzianPeak>& peaks, const FitData& d) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d.w.size(); ++i) {
        const double r = model_eval(peaks, d.w[i]) - d.y[i];
        num += r * r;
        den += d.y[i] * d.y[i];
    }
    if (den == 0.0) throw std::invalid_argument("fit residual undefined: window data is all baseline");
    return std::sqrt(num / den);
}

std::vector<LorentzianPeak> initial_guesses(const FitData& d, int n_peaks,
                                            const std::optional<double>& pinned) {
    // tallest local maxima, then the tallest unused samples as a fallback
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < d.w.size(); ++i)
        if (d.y[i] > d.y[i - 1] && d.y[i] >= d.y[i + 1]) maxima.push_back(i);
    std::sort(maxima.begin(), maxima.end(),
              [&](std::size_t a, std::size_t b) { return d.y[a] != d.y[b] ? d.y[a] > d.y[b] : a < b; });

    auto hwhm_at = [&](std::size_t i) {
        const double half = 0.5 * d.y[i];
        std::size_t l = i, r = i;
        while (l > 0 && d.y[l] > half) --l;
        while (r + 1 < d.w.size() && d.y[r] > half) ++r;
        double width = 0.5 * (d.w[r] - d.w[l]);
        const double grid = (d.w.back() - d.w.front()) / double(d.w.size() - 1);
        return std::max(width, 2.0 * grid);
    };

    std::vector<LorentzianPeak> peaks;
    std::vector<bool> used(d.w.size(), false);
    for (std::size_t mi = 0; mi < maxima.size() && peaks.size() < std::size_t(n_peaks); ++mi) {
        const std::size_t i = maxima[mi];
        peaks.push_back({std::max(d.y[i], 1e-12), d.w[i], hwhm_at(i)});
        used[i] = true;
    }
    while (peaks.size() < std::size_t(n_peaks)) {
        std::size_t best = d.w.size();
        for (std::size_t i = 0; i < d.w.size(); ++i)
            if (!used[i] && (best == d.w.size() || d.y[i] > d.y[best])) best = i;
        if (best == d.w.size()) throw std::invalid_argument("fit_lorentzians: not enough data for n_peaks");
        peaks.push_back({std::max(d.y[best], 1e-12), d.w[best], hwhm_at(best)});
        used[best] = true;
    }
    if (pinned) {
        // the pinned peak is the first one; move it onto the requested center
        peaks[0].omega_ev = *pinned;
    }
    return peaks;
}

void check_sampling(const FitData& d, const std::vector<LorentzianPeak>& init) {
    for (const auto& p : init) {
        std::size_t inside = 0;
        for (double w : d.w)
            if (std::abs(w - p.omega_ev) <= p.beta_ev) ++inside;
        if (inside < 5)
            throw std::invalid_argument(
                "fit_lorentzians: fewer than 5 samples per candidate linewidth near " +
                std::to_string(p.omega_ev) + " eV");
    }
}

}  // namespace

FitReport fit_lorentzians(const PurcellSpectrum& spec, int n_peaks, double window_lo,
                          double window_hi, std::optional<double> pinned_center) {
    if (n_peaks < 1) throw std::invalid_argument("fit_lorentzians: n_peaks must be >= 1");
    FitData data = window_samples(spec, window_lo, window_hi);

    // normalize heights so the optimizer path is exactly scale-equivariant
    double scale = 0.0;
    for (double v : data.y) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw std::invalid_argument("fit_lorentzians: window data is all baseline");
    FitData d = data;
    for (double& v : d.y) v /= scale;

    std::vector<LorentzianPeak> peaks = initial_guesses(d, n_peaks, pinned_center);
    check_sampling(d, peaks);

    // parameter layout: (lam_j, [w_j], beta_j) with the pinned center omitted
    const std::size_t np = peaks.size();
    std::vector<int> w_param(np, 1);
    if (pinned_center) w_param[0] = 0;
    std::size_t n_par = 0;
    for (std::size_t j = 0; j < np; ++j) n_par += 2 + std::size_t(w_param[j]);

    const std::size_t ns = d.w.size();
    Eigen::VectorXd r(ns);
    Eigen::MatrixXd jac(ns, n_par);

    auto fill = [&](const std::vector<LorentzianPeak>& pk) {
        for (std::size_t i = 0; i < ns; ++i) {
            r(static_cast<Eigen::Index>(i)) = model_eval(pk, d.w[i]) - d.y[i];
            std::size_t col = 0;
            for (std::size_t j = 0; j < np; ++j) {
                const double dw = d.w[i] - pk[j].omega_ev;
                const double b = pk[j].beta_ev;
                const double den = dw * dw + b * b;
                const double li = b * b / den;
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col++)) = li;
                if (w_param[j])
                    jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col++)) =
                        pk[j].lambda * b * b * 2.0 * dw / (den * den);
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col++)) =
                    pk[j].lambda * 2.0 * b * dw * dw / (den * den);
            }
        }
    };

    fill(peaks);
    double cost = 0.5 * r.squaredNorm();
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;
    double mu = 1e-3 * jtj.diagonal().maxCoeff();
    double nu = 2.0;
    int iters = 0;

    for (; iters < 400; ++iters) {
        if (g.lpNorm<Eigen::Infinity>() < 1e-14) break;
        Eigen::MatrixXd a = jtj;
        a.diagonal() += mu * jtj.diagonal();
        a.diagonal() = a.diagonal().cwiseMax(1e-300);
        Eigen::VectorXd step = a.ldlt().solve(-g);

        std::vector<LorentzianPeak> trial = peaks;
        std::size_t col = 0;
        for (std::size_t j = 0; j < np; ++j) {
            trial[j].lambda += step(static_cast<Eigen::Index>(col++));
            if (w_param[j]) trial[j].omega_ev += step(static_cast<Eigen::Index>(col++));
            trial[j].beta_ev += step(static_cast<Eigen::Index>(col++));
            if (trial[j].beta_ev <= 0.0) trial[j].beta_ev = 0.5 * peaks[j].beta_ev;
        }

        Eigen::VectorXd r_trial(ns);
        for (std::size_t i = 0; i < ns; ++i)
            r_trial(static_cast<Eigen::Index>(i)) = model_eval(trial, d.w[i]) - d.y[i];
        const double cost_trial = 0.5 * r_trial.squaredNorm();
        const double predicted = 0.5 * step.dot(mu * (jtj.diagonal().asDiagonal() * step) - g);
        const double rho = predicted > 0.0 ? (cost - cost_trial) / predicted : -1.0;

        if (cost_trial < cost && rho > 0.0) {
            const double improvement = cost - cost_trial;
            peaks = trial;
            fill(peaks);
            cost = cost_trial;
            jtj = jac.transpose() * jac;
            g = jac.transpose() * r;
            mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
            nu = 2.0;
            if (improvement < 1e-24 * (1.0 + cost) && step.norm() < 1e-13) break;
        } else {
            mu *= nu;
            nu *= 2.0;
            if (mu > 1e60) break;
        }
    }

    // undo the normalization and sort for the report
    for (auto& p : peaks) p.lambda *= scale;
    std::vector<LorentzianPeak> sorted = peaks;
    std::sort(sorted.begin(), sorted.end(),
              [](const LorentzianPeak& a, const LorentzianPeak& b) { return a.omega_ev < b.omega_ev; });

    FitReport rep;
    rep.peaks = std::move(sorted);
    rep.residual = rel_l2_residual(rep.peaks, data);
    rep.window_lo = window_lo;
    rep.window_hi = window_hi;
    rep.pinned_center_ev = pinned_center;
    rep.poor_fit = rep.residual > 0.2;
    rep.iterations = iters;
    return rep;
}

double fit_quality(const FitReport& report, const PurcellSpectrum& spec) {
    FitData d = window_samples(spec, report.window_lo, report.window_hi);
    const double res = rel_l2_residual(report.peaks, d);
    if (std::abs(res - report.residual) > 1e-8)
        throw std::logic_error("fit_quality: stored residual disagrees with recomputation (" +
                               std::to_string(report.residual) + " vs " + std::to_string(res) + ")");
    return res;
}

}  // namespace nmse
