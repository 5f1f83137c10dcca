#pragma once

#include <optional>
#include <vector>

#include "nmse/spectrum.hpp"

namespace nmse {

struct FitReport {
    std::vector<LorentzianPeak> peaks;  // sorted by center
    double residual = 0.0;              // relative L2 error over the window
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::optional<double> pinned_center_ev;
    bool poor_fit = false;  // residual > 0.2
    int iterations = 0;
};

// Least-squares decomposition of the induced part (baseline subtracted) of a
// tabulated spectrum into n_peaks Lorentzians.  Damped Gauss-Newton with the
// analytic Jacobian; initial guesses from the tallest local maxima, so the
// whole fit is deterministic.  With pinned_center set the first peak's
// center is held fixed.
FitReport fit_lorentzians(const PurcellSpectrum& spec, int n_peaks, double window_lo,
                          double window_hi, std::optional<double> pinned_center = {});

// Recomputes the relative L2 residual from scratch and checks it against the
// report (must agree to 1e-8); returns the recomputed value.
double fit_quality(const FitReport& report, const PurcellSpectrum& spec);

}  // namespace nmse
