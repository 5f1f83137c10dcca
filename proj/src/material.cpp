#include "nmse/material.hpp"

#include <cmath>
#include <stdexcept>

#include "nmse/constants.hpp"

namespace nmse {

MaterialParams MaterialParams::preset(MaterialQuality q, double sigma0) {
    MaterialParams p;
    if (q == MaterialQuality::High) {
        p.gamma_A = 0.5e-3;
        p.gamma_B = 1.1e-3;
    } else {
        p.gamma_A = 2.5e-3;
        p.gamma_B = 5.6e-3;
    }
    p.sigma0 = sigma0;
    p.validate();
    return p;
}

void MaterialParams::validate() const {
    if (!(omega_A > 0.0) || !(omega_B > 0.0)) throw std::invalid_argument("exciton energies must be positive");
    if (!(omega_A < omega_B)) throw std::invalid_argument("omega_A must be below omega_B");
    if (!(gamma_A > 0.0) || !(gamma_B > 0.0)) throw std::invalid_argument("exciton dampings must be positive");
    if (!(a_ex > 0.0) || !(v > 0.0)) throw std::invalid_argument("a_ex and v must be positive");
    if (!(omegaB_beta >= 0.0)) throw std::invalid_argument("omegaB_beta must be non-negative");
}

std::complex<double> sigma_res(double omega_ev, const MaterialParams& mat) {
    if (!(omega_ev > 0.0)) throw std::domain_error("sigma_res: omega must be positive");
    using namespace constants;
    const double pref = 4.0 * alpha0 * c_nm_fs * mat.v * mat.v / (pi * mat.a_ex * mat.a_ex * omega_ev);
    const std::complex<double> mi(0.0, -1.0);
    std::complex<double> sum = mi / std::complex<double>(mat.omega_A - omega_ev, -mat.gamma_A) +
                               mi / std::complex<double>(mat.omega_B - omega_ev, -mat.gamma_B);
    return pref * sum;
}

double sigma_inter_re(double omega_ev, const MaterialParams& mat) {
    if (!(omega_ev > 0.0)) throw std::domain_error("sigma_inter_re: omega must be positive");
    if (!std::isfinite(mat.sigma0))
        throw std::invalid_argument("sigma_inter_re: sigma0 is not set (no default exists)");
    if (omega_ev < mat.omega_B) return 0.0;  // below the interband edge
    const double q = mat.omegaB_beta;
    const double big_omega = omega_ev / mat.omega_B;
    const double energy = std::sqrt(1.0 + 2.0 * q + big_omega * big_omega);
    const double energy_tilde = mat.m_scale / energy;
    return mat.sigma0 * energy_tilde *
           (1.0 + (1.0 + 2.0 * q) / (big_omega * big_omega) * (1.0 + q - energy));
}

}  // namespace nmse
