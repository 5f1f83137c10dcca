#pragma once

#include <complex>
#include <limits>

namespace nmse {

enum class MaterialQuality { High, Low };

// Excitonic and interband parameters of the monolayer surface conductivity.
struct MaterialParams {
    double omega_A = 1.9;     // A-exciton energy (eV)
    double omega_B = 2.1;     // B-exciton energy (eV)
    double gamma_A = 0.5e-3;  // A-exciton damping (eV)
    double gamma_B = 1.1e-3;  // B-exciton damping (eV)
    double a_ex = 0.8;        // exciton Bohr radius (nm)
    double v = 0.55;          // hopping velocity (nm/fs)
    double omegaB_beta = 0.84;  // dimensionless mixing product
    double m_scale = 1.0;       // interband absorption scaling
    double sigma0 = std::numeric_limits<double>::quiet_NaN();  // interband conductivity
                                                               // scale; must be set
                                                               // explicitly before use

    static MaterialParams preset(MaterialQuality q, double sigma0);

    void validate() const;  // throws std::invalid_argument on violated invariants
};

// Resonant (excitonic) part of the surface conductivity.  Units follow the
// eV/nm/fs system of the prefactor 4*alpha0*c*v^2/(pi*a_ex^2*omega).
std::complex<double> sigma_res(double omega_ev, const MaterialParams& mat);

// Real part of the interband conductivity; zero below the B-exciton edge.
double sigma_inter_re(double omega_ev, const MaterialParams& mat);

}  // namespace nmse
