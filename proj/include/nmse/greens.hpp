#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace nmse {

// Externally supplied expansion coefficients c_n^1(z, omega) of the induced
// Green's tensor image series.  Entries exist only at the (z, omega) pairs
// present in the input; lookups never interpolate.
class GreensCoefficients {
public:
    void insert(double z_nm, double omega_ev, std::vector<std::complex<double>> coeffs);

    bool has(double z_nm, double omega_ev) const;

    // throws std::runtime_error when no entry exists at (z, omega)
    const std::vector<std::complex<double>>& at(double z_nm, double omega_ev) const;

    // sorted unique omega values stored for a given z
    std::vector<double> omega_grid(double z_nm) const;

    std::size_t size() const { return entries_.size(); }

    // visit all entries in (z, omega) order
    void visit(const std::function<void(double z_nm, double omega_ev,
                                        const std::vector<std::complex<double>>&)>& f) const;

private:
    struct Entry {
        double z;
        double omega;
        std::vector<std::complex<double>> coeffs;
    };
    std::vector<Entry> entries_;  // sorted by (z, omega)

    const Entry* find(double z_nm, double omega_ev) const;
};

struct GreensValue {
    std::complex<double> value;  // G_xx (1/nm)
    double tail_estimate;        // bound on the dropped series tail
    int n_terms;                 // number of coefficients summed
};

// Induced Green's tensor G_xx on the symmetry axis of a disk of radius R,
// from the truncated image series with geometry factor Rt = sqrt((z/R)^2+1).
GreensValue green_xx(double z_nm, double omega_ev, const GreensCoefficients& coeffs,
                     double radius_nm);

}  // namespace nmse
