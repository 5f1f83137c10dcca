#include "nmse/csv.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nmse::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);  // binary: byte-stable newlines
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": malformed number '" + s + "'");
    }
}

}  // namespace

void write_spectrum(const std::string& path, const std::vector<double>& omega,
                    const std::vector<double>& lambda) {
    if (omega.size() != lambda.size()) throw std::invalid_argument("spectrum column size mismatch");
    auto f = open_out(path);
    f << "omega_eV,lambda\n";
    for (std::size_t i = 0; i < omega.size(); ++i)
        f << format_double(omega[i]) << ',' << format_double(lambda[i]) << '\n';
}

std::pair<std::vector<double>, std::vector<double>> read_spectrum(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    std::vector<double> omega, lambda;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (!header_seen) {
            if (fields.size() != 2 || fields[0] != "omega_eV" || fields[1] != "lambda")
                throw std::runtime_error(path + ": expected header 'omega_eV,lambda'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 2) throw std::runtime_error(path + ": expected 2 columns");
        omega.push_back(parse_num(fields[0], path));
        lambda.push_back(parse_num(fields[1], path));
    }
    if (!header_seen) throw std::runtime_error(path + ": empty spectrum file");
    return {std::move(omega), std::move(lambda)};
}

GreensCoefficients read_greens(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    bool header_seen = false;
    // rows may arrive in any order; group by (z, omega) and index by n
    struct Key {
        double z, w;
        bool operator<(const Key& o) const { return z != o.z ? z < o.z : w < o.w; }
    };
    std::map<Key, std::vector<std::complex<double>>> groups;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (!header_seen) {
            if (fields.size() != 5 || fields[0] != "z_nm" || fields[1] != "omega_eV" ||
                fields[2] != "n" || fields[3] != "re_c" || fields[4] != "im_c")
                throw std::runtime_error(path + ": expected header 'z_nm,omega_eV,n,re_c,im_c'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 5) throw std::runtime_error(path + ": expected 5 columns");
        const double z = parse_num(fields[0], path);
        const double w = parse_num(fields[1], path);
        const auto n = static_cast<std::size_t>(parse_num(fields[2], path));
        auto& vec = groups[Key{z, w}];
        if (vec.size() <= n) vec.resize(n + 1, {0.0, 0.0});
        vec[n] = {parse_num(fields[3], path), parse_num(fields[4], path)};
    }
    if (!header_seen) throw std::runtime_error(path + ": empty coefficient file");
    GreensCoefficients coeffs;
    for (auto& [key, vec] : groups) coeffs.insert(key.z, key.w, std::move(vec));
    return coeffs;
}

void write_greens(const std::string& path, const GreensCoefficients& coeffs) {
    auto f = open_out(path);
    f << "z_nm,omega_eV,n,re_c,im_c\n";
    coeffs.visit([&](double z, double w, const std::vector<std::complex<double>>& cn) {
        for (std::size_t n = 0; n < cn.size(); ++n) {
            f << format_double(z) << ',' << format_double(w) << ',' << n << ','
              << format_double(cn[n].real()) << ',' << format_double(cn[n].imag()) << '\n';
        }
    });
}

void write_kernel(const std::string& path, const KernelTable& table) {
    auto f = open_out(path);
    f << "# omega_cut_eV: " << format_double(table.omega_cut_ev) << '\n';
    f << "# quadrature: " << table.quadrature << '\n';
    f << "# delta_ndyn_eV: " << format_double(table.delta_ndyn_ev) << '\n';
    f << "# converged: " << (table.converged ? 1 : 0) << '\n';
    f << "# refine_delta_rel: " << format_double(table.refine_delta_rel) << '\n';
    f << "# panels: " << table.panels << '\n';
    f << "tau_fs,re_K,im_K\n";
    for (std::size_t i = 0; i < table.values.size(); ++i) {
        f << format_double(double(i) * table.dt_fs) << ',' << format_double(table.values[i].real())
          << ',' << format_double(table.values[i].imag()) << '\n';
    }
}

void write_trajectory(const std::string& path, const DynamicsResult& result,
                      const std::string& regime_label) {
    auto f = open_out(path);
    f << "# solver: " << solver_name(result.solver) << '\n';
    f << "# dt_fs: " << format_double(result.dt_fs) << '\n';
    f << "# delta_ndyn_eV: " << format_double(result.delta_ndyn_ev) << '\n';
    f << "# regime: " << regime_label << '\n';
    f << "# converged: " << (result.convergence.converged ? 1 : 0) << '\n';
    f << "t_fs,re_c1,im_c1,population\n";
    for (std::size_t i = 0; i < result.t_fs.size(); ++i) {
        f << format_double(result.t_fs[i]) << ',' << format_double(result.c1[i].real()) << ','
          << format_double(result.c1[i].imag()) << ',' << format_double(result.population[i])
          << '\n';
    }
}

void write_fit(const std::string& path, const FitReport& report) {
    auto f = open_out(path);
    f << "# residual: " << format_double(report.residual) << '\n';
    f << "# window_eV: " << format_double(report.window_lo) << ',' << format_double(report.window_hi)
      << '\n';
    f << "# poor_fit: " << (report.poor_fit ? 1 : 0) << '\n';
    if (report.pinned_center_ev)
        f << "# pinned_center_eV: " << format_double(*report.pinned_center_ev) << '\n';
    f << "peak_index,lambda_j,omega_j_eV,beta_j_eV\n";
    for (std::size_t i = 0; i < report.peaks.size(); ++i) {
        f << i << ',' << format_double(report.peaks[i].lambda) << ','
          << format_double(report.peaks[i].omega_ev) << ','
          << format_double(report.peaks[i].beta_ev) << '\n';
    }
}

}  // namespace nmse::csv
