#include "nmse/greens.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmse/constants.hpp"

namespace nmse {

namespace {

// coefficient files carry plain decimal keys, so an exact-valued match with a
// small relative slack is enough; interpolation between entries is never done
bool key_eq(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void GreensCoefficients::insert(double z_nm, double omega_ev,
                                std::vector<std::complex<double>> coeffs) {
    auto pos = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) {
        return key_eq(e.z, z_nm) && key_eq(e.omega, omega_ev);
    });
    if (pos != entries_.end()) {
        pos->coeffs = std::move(coeffs);
        return;
    }
    Entry e{z_nm, omega_ev, std::move(coeffs)};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), e, [](const Entry& a, const Entry& b) {
        return a.z != b.z ? a.z < b.z : a.omega < b.omega;
    });
    entries_.insert(it, std::move(e));
}

const GreensCoefficients::Entry* GreensCoefficients::find(double z_nm, double omega_ev) const {
    for (const Entry& e : entries_) {
        if (key_eq(e.z, z_nm) && key_eq(e.omega, omega_ev)) return &e;
    }
    return nullptr;
}

bool GreensCoefficients::has(double z_nm, double omega_ev) const {
    return find(z_nm, omega_ev) != nullptr;
}

const std::vector<std::complex<double>>& GreensCoefficients::at(double z_nm,
                                                                double omega_ev) const {
    const Entry* e = find(z_nm, omega_ev);
    if (!e)
        throw std::runtime_error("Greens coefficients unavailable at z = " + std::to_string(z_nm) +
                                 " nm, omega = " + std::to_string(omega_ev) + " eV");
    return e->coeffs;
}

void GreensCoefficients::visit(
    const std::function<void(double, double, const std::vector<std::complex<double>>&)>& f) const {
    for (const Entry& e : entries_) f(e.z, e.omega, e.coeffs);
}

std::vector<double> GreensCoefficients::omega_grid(double z_nm) const {
    std::vector<double> grid;
    for (const Entry& e : entries_)
        if (key_eq(e.z, z_nm)) grid.push_back(e.omega);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

GreensValue green_xx(double z_nm, double omega_ev, const GreensCoefficients& coeffs,
                     double radius_nm) {
    if (!(radius_nm > 0.0)) throw std::invalid_argument("green_xx: radius must be positive");
    if (z_nm < 0.0) throw std::invalid_argument("green_xx: z must be non-negative");
    const auto& cn = coeffs.at(z_nm, omega_ev);

    const double x = z_nm / radius_nm;
    const double rt = std::sqrt(x * x + 1.0);
    const double bracket = rt - x;          // in (0, 1]; 1 only at z = 0
    const double ratio = bracket * bracket; // geometric step between terms

    const double omega_rad = constants::omega_rad_fs(omega_ev);
    const double pref = constants::c_nm_fs * constants::c_nm_fs / (2.0 * omega_rad * omega_rad);

    std::complex<double> sum(0.0, 0.0);
    double geom = ratio / rt;  // [bracket]^{2n+2}/Rt at n = 0
    double last_term = 0.0;
    for (const auto& c : cn) {
        sum += c * geom;
        last_term = std::abs(c) * geom;
        geom *= ratio;
    }

    // Tail bound assuming |c_n| stays at the last magnitude; at z = 0 the
    // geometric ratio is 1 and no finite bound exists, report the last term.
    double tail = 0.0;
    if (!cn.empty()) tail = ratio < 1.0 ? pref * last_term * ratio / (1.0 - ratio) : pref * last_term;

    return GreensValue{-pref * sum, tail, static_cast<int>(cn.size())};
}

}  // namespace nmse
