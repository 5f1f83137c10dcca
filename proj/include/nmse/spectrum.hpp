#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nmse/greens.hpp"

namespace nmse {

// One peak of a Lorentzian-sum Purcell spectrum: lambda is the peak height of
// the induced part, omega the center (eV), beta the half width (eV).
struct LorentzianPeak {
    double lambda;
    double omega_ev;
    double beta_ev;
};

// Purcell factor relative to free space.  im_gxx is Im G_xx (1/nm) of the
// induced Green's tensor; the sqrt(eps) host baseline is added here.
// Dipole orientation is fixed along x (parallel to the disk).
double purcell_factor(double omega_ev, double im_gxx, double eps);

// Decay-rate enhancement spectrum lambda(omega) at a fixed emitter position,
// in one of three representations.  Immutable after construction; evaluation
// is pure and thread-safe.  Outside [support_lo, support_hi] the induced part
// is zero and evaluation returns the sqrt(eps) baseline.
class PurcellSpectrum {
public:
    struct Tabulated {
        std::vector<double> omega;   // strictly increasing (eV)
        std::vector<double> lambda;  // total Purcell factor, >= 0
    };
    struct LorentzianSum {
        std::vector<LorentzianPeak> peaks;
    };
    struct GreensSeries {
        double z_nm;
        double radius_nm;
        std::shared_ptr<const GreensCoefficients> coeffs;
    };

    static PurcellSpectrum tabulated(std::vector<double> omega, std::vector<double> lambda,
                                     double eps = 1.0);
    static PurcellSpectrum lorentzian_sum(std::vector<LorentzianPeak> peaks, double support_lo,
                                          double support_hi, double eps = 1.0);
    static PurcellSpectrum greens_series(double z_nm, double radius_nm,
                                         std::shared_ptr<const GreensCoefficients> coeffs,
                                         double eps = 1.0);

    double operator()(double omega_ev) const;

    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    double eps() const { return eps_; }
    double baseline() const;  // sqrt(eps)

    bool is_tabulated() const { return std::holds_alternative<Tabulated>(repr_); }
    bool is_lorentzian_sum() const { return std::holds_alternative<LorentzianSum>(repr_); }
    bool is_greens_series() const { return std::holds_alternative<GreensSeries>(repr_); }

    const Tabulated* tabulated_data() const { return std::get_if<Tabulated>(&repr_); }
    const LorentzianSum* lorentzian_data() const { return std::get_if<LorentzianSum>(&repr_); }
    const GreensSeries* greens_data() const { return std::get_if<GreensSeries>(&repr_); }

    // Greens-series spectra sampled onto the coefficient grid; tabulated
    // spectra returned as-is.  Lorentzian sums need an explicit grid.
    PurcellSpectrum to_tabulated() const;
    PurcellSpectrum to_tabulated(const std::vector<double>& grid) const;

    // warnings about under-resolved tabulated peaks (< 10 samples/linewidth)
    std::vector<std::string> sampling_warnings() const;

private:
    PurcellSpectrum() = default;
    std::variant<Tabulated, LorentzianSum, GreensSeries> repr_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    double eps_ = 1.0;
};

// Uniform evaluation facade over the three representations.
inline double eval_spectrum(const PurcellSpectrum& spec, double omega_ev) {
    return spec(omega_ev);
}

}  // namespace nmse
