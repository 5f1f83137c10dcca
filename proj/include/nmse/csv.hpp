#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nmse/dynamics.hpp"
#include "nmse/fitting.hpp"
#include "nmse/greens.hpp"
#include "nmse/kernel.hpp"

namespace nmse::csv {

// `omega_eV,lambda`
void write_spectrum(const std::string& path, const std::vector<double>& omega,
                    const std::vector<double>& lambda);
std::pair<std::vector<double>, std::vector<double>> read_spectrum(const std::string& path);

// `z_nm,omega_eV,n,re_c,im_c`
GreensCoefficients read_greens(const std::string& path);
void write_greens(const std::string& path, const GreensCoefficients& coeffs);

// `tau_fs,re_K,im_K` plus comment header with quadrature metadata
void write_kernel(const std::string& path, const KernelTable& table);

// `t_fs,re_c1,im_c1,population` plus comment header
void write_trajectory(const std::string& path, const DynamicsResult& result,
                      const std::string& regime_label);

// `peak_index,lambda_j,omega_j_eV,beta_j_eV` plus residual in the header
void write_fit(const std::string& path, const FitReport& report);

// stable float formatting used for all numeric output
std::string format_double(double v);

}  // namespace nmse::csv
