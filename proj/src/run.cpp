#include "nmse/run.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nmse/csv.hpp"
#include "nmse/dynamics.hpp"

namespace nmse {

namespace fs = std::filesystem;

PurcellSpectrum build_spectrum(const RunConfig& cfg) {
    if (const auto* src = std::get_if<SpectrumCsvSource>(&cfg.source)) {
        auto [omega, lambda] = csv::read_spectrum(src->path);
        return PurcellSpectrum::tabulated(std::move(omega), std::move(lambda), cfg.eps);
    }
    if (const auto* src = std::get_if<SpectrumLorentzianSource>(&cfg.source)) {
        return PurcellSpectrum::lorentzian_sum(src->peaks, src->support_lo, src->support_hi,
                                               cfg.eps);
    }
    const auto& src = std::get<SpectrumGreensSource>(cfg.source);
    auto coeffs = std::make_shared<GreensCoefficients>(csv::read_greens(src.coeffs_path));
    // sample onto the coefficient grid at the emitter height; the series is
    // never interpolated between its grid points
    return PurcellSpectrum::greens_series(cfg.emitter.z_nm, src.radius_nm, std::move(coeffs),
                                          cfg.eps)
        .to_tabulated();
}

std::string point_id(const std::string& param, const std::string& token) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : param + "=" + token) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%012llx", static_cast<unsigned long long>(h & 0xffffffffffffull));
    return buf;
}

namespace {

void ensure_outdir(const RunConfig& cfg) { fs::create_directories(cfg.output_dir); }

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
}

void require_time_grid(const RunConfig& cfg) {
    if (!(cfg.tmax_fs > 0.0) || !(cfg.dt_fs > 0.0))
        throw std::invalid_argument("config: tmax_fs and dt_fs must be positive for this command");
}

std::vector<double> uniform_grid(const GridSpec& g) {
    std::vector<double> grid(static_cast<std::size_t>(g.n));
    if (g.n == 1) {
        grid[0] = g.lo;
        return grid;
    }
    for (int i = 0; i < g.n; ++i)
        grid[static_cast<std::size_t>(i)] = g.lo + (g.hi - g.lo) * double(i) / double(g.n - 1);
    return grid;
}

// single-Lorentzian parameters for the closed-form solver
LorentzianModeParams analytic_params(const RunConfig& cfg, const PurcellSpectrum& spec) {
    if (const auto* src = std::get_if<SpectrumLorentzianSource>(&cfg.source)) {
        if (src->peaks.size() == 1) {
            const auto& p = src->peaks.front();
            return {p.omega_ev, p.beta_ev, cfg.emitter.gamma0_ev * p.lambda,
                    cfg.emitter.omega0_ev - p.omega_ev};
        }
    }
    // cavity-like reduction: one Lorentzian pinned at the emitter frequency
    const PurcellSpectrum tab = spec.is_tabulated() ? spec : spec.to_tabulated();
    const double lo = cfg.fit_window_lo.value_or(tab.support_lo());
    const double hi = cfg.fit_window_hi.value_or(tab.support_hi());
    const double pinned = cfg.fit_pinned_center.value_or(cfg.emitter.omega0_ev);
    FitReport rep = fit_lorentzians(tab, 1, lo, hi, pinned);
    const auto& p = rep.peaks.front();
    return {p.omega_ev, p.beta_ev, cfg.emitter.gamma0_ev * p.lambda,
            cfg.emitter.omega0_ev - p.omega_ev};
}

std::vector<LorentzianModeParams> point_modes(const RunConfig& cfg, const PurcellSpectrum& spec) {
    if (const auto* src = std::get_if<SpectrumLorentzianSource>(&cfg.source))
        return pseudomode_params(cfg.emitter, src->peaks);
    const PurcellSpectrum tab = spec.is_tabulated() ? spec : spec.to_tabulated();
    const double lo = cfg.fit_window_lo.value_or(tab.support_lo());
    const double hi = cfg.fit_window_hi.value_or(tab.support_hi());
    FitReport rep = fit_lorentzians(tab, cfg.fit_n_peaks, lo, hi, cfg.fit_pinned_center);
    return pseudomode_params(cfg.emitter, rep.peaks);
}

struct PointFiles {
    std::vector<std::string> names;
};

// runs every requested solver for one configuration and appends summary rows;
// returns the written trajectory files
PointFiles run_point(const RunConfig& cfg, const std::string& pid, const std::string& param,
                     const std::string& token, const std::string& traj_prefix,
                     std::string& summary_rows) {
    require_time_grid(cfg);
    PointFiles files;
    const PurcellSpectrum spec = build_spectrum(cfg);
    const double delta = nondyn_shift(cfg.emitter, spec, cfg.kernel.shift);
    const double markov = markov_rate(cfg.emitter, spec);

    std::vector<SolverId> solvers;
    switch (cfg.solver) {
        case SolverChoice::Volterra: solvers = {SolverId::Volterra}; break;
        case SolverChoice::Pseudomode: solvers = {SolverId::Pseudomode}; break;
        case SolverChoice::Analytic: solvers = {SolverId::Analytic}; break;
        case SolverChoice::All:
            solvers = {SolverId::Volterra, SolverId::Pseudomode, SolverId::Analytic};
            break;
    }

    KernelTable table;  // built once, shared by the volterra runs
    bool have_table = false;

    for (SolverId id : solvers) {
        DynamicsResult result;
        switch (id) {
            case SolverId::Volterra: {
                if (!have_table) {
                    const double table_dt = cfg.solve.check_convergence ? 0.5 * cfg.dt_fs : cfg.dt_fs;
                    KernelBuildOptions kopts = cfg.kernel;
                    table = build_kernel_table(cfg.emitter, spec, cfg.tmax_fs, table_dt, kopts);
                    have_table = true;
                }
                result = solve_volterra(table, cfg.tmax_fs, cfg.dt_fs, cfg.solve);
                break;
            }
            case SolverId::Pseudomode:
                result = solve_pseudomode(cfg.emitter, point_modes(cfg, spec), cfg.tmax_fs,
                                          cfg.dt_fs, delta, cfg.solve);
                break;
            case SolverId::Analytic:
                result = solve_analytic(analytic_params(cfg, spec), cfg.tmax_fs, cfg.dt_fs);
                break;
        }
        std::string regime;
        if (!result.convergence.converged) {
            regime = "unconverged";
        } else {
            try {
                regime = regime_name(classify_regime(result, cfg.emitter));
            } catch (const std::exception&) {
                regime = "n/a";
            }
        }
        const std::string name = traj_prefix + solver_name(id) + ".csv";
        csv::write_trajectory(out_path(cfg, name), result, regime);
        files.names.push_back(name);

        summary_rows += pid + ',' + param + ',' + token + ',' + csv::format_double(delta) + ',' +
                        csv::format_double(markov) + ',' + regime + ',' +
                        csv::format_double(time_to_fraction(result)) + ',' + solver_name(id) +
                        ',' + (result.convergence.converged ? '1' : '0') + '\n';
    }
    return files;
}

constexpr const char* kSummaryHeader =
    "point_id,param,value,delta_ndyn_eV,markov_rate_eV,regime,t99_fs,solver,converged\n";

void write_summary(const RunConfig& cfg, const std::string& rows) {
    std::ofstream f(out_path(cfg, "summary.csv"), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write summary.csv");
    f << kSummaryHeader << rows;
}

}  // namespace

void cmd_spectrum(const RunConfig& cfg, std::ostream& log) {
    ensure_outdir(cfg);
    const PurcellSpectrum spec = build_spectrum(cfg);
    for (const auto& w : spec.sampling_warnings()) log << "warning: " << w << '\n';

    std::vector<double> grid;
    if (cfg.spectrum_grid) {
        grid = uniform_grid(*cfg.spectrum_grid);
    } else if (const auto* t = spec.tabulated_data()) {
        grid = t->omega;
    } else {
        throw std::invalid_argument(
            "spectrum: an evaluation grid (spectrum.grid_eV) is required for this source");
    }
    std::vector<double> lambda(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) lambda[i] = eval_spectrum(spec, grid[i]);
    csv::write_spectrum(out_path(cfg, "spectrum.csv"), grid, lambda);
    log << "wrote " << out_path(cfg, "spectrum.csv") << '\n';

    if (cfg.conductivity_grid) {
        if (!cfg.material)
            throw std::invalid_argument("spectrum: conductivity table needs material.preset");
        std::ofstream f(out_path(cfg, "conductivity.csv"), std::ios::binary);
        f << "omega_eV,re_sigma_res,im_sigma_res,sigma_inter_re\n";
        for (double w : uniform_grid(*cfg.conductivity_grid)) {
            const auto sr = sigma_res(w, *cfg.material);
            f << csv::format_double(w) << ',' << csv::format_double(sr.real()) << ','
              << csv::format_double(sr.imag()) << ','
              << csv::format_double(sigma_inter_re(w, *cfg.material)) << '\n';
        }
        log << "wrote " << out_path(cfg, "conductivity.csv") << '\n';
    }
}

void cmd_kernel(const RunConfig& cfg, std::ostream& log) {
    ensure_outdir(cfg);
    require_time_grid(cfg);
    const PurcellSpectrum spec = build_spectrum(cfg);
    const KernelTable table =
        build_kernel_table(cfg.emitter, spec, cfg.tmax_fs, cfg.dt_fs, cfg.kernel);
    csv::write_kernel(out_path(cfg, "kernel.csv"), table);
    log << "wrote " << out_path(cfg, "kernel.csv") << '\n';
}

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
    ensure_outdir(cfg);
    PurcellSpectrum spec = build_spectrum(cfg);
    if (!spec.is_tabulated()) {
        if (!cfg.spectrum_grid)
            throw std::invalid_argument("fit: this source needs spectrum.grid_eV to tabulate");
        spec = spec.to_tabulated(uniform_grid(*cfg.spectrum_grid));
    }
    const double lo = cfg.fit_window_lo.value_or(spec.support_lo());
    const double hi = cfg.fit_window_hi.value_or(spec.support_hi());
    const FitReport rep =
        fit_lorentzians(spec, cfg.fit_n_peaks, lo, hi, cfg.fit_pinned_center);
    csv::write_fit(out_path(cfg, "fit.csv"), rep);
    log << "wrote " << out_path(cfg, "fit.csv") << " (residual "
        << csv::format_double(rep.residual) << (rep.poor_fit ? ", poor fit)" : ")") << '\n';
}

void cmd_simulate(const RunConfig& cfg, const RawConfig&, std::ostream& log) {
    ensure_outdir(cfg);
    std::string rows;
    PointFiles files = run_point(cfg, "base", "none", "", "traj_", rows);
    write_summary(cfg, rows);
    for (const auto& n : files.names) log << "wrote " << out_path(cfg, n) << '\n';
    log << "wrote " << out_path(cfg, "summary.csv") << '\n';
}

void cmd_sweep(const RunConfig& cfg, const RawConfig& raw, int jobs, std::ostream& log) {
    if (!cfg.sweep) throw std::invalid_argument("sweep: config has no sweep.param/sweep.values");
    ensure_outdir(cfg);
    const auto& sweep = *cfg.sweep;
    const auto npoints = static_cast<std::ptrdiff_t>(sweep.value_tokens.size());
    std::vector<std::string> rows(sweep.value_tokens.size());
    std::vector<std::string> messages(sweep.value_tokens.size());

#ifdef _OPENMP
    const int nthreads = jobs > 0 ? jobs : omp_get_max_threads();
#else
    (void)jobs;
#endif
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::ptrdiff_t i = 0; i < npoints; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const std::string& token = sweep.value_tokens[idx];
        const std::string pid = point_id(sweep.param, token);
        try {
            const RawConfig point_raw = override_key(raw, sweep.param, token);
            RunConfig point_cfg = build_run_config(point_raw);
            point_cfg.output_dir = cfg.output_dir;  // --output overrides propagate
            PointFiles files = run_point(point_cfg, pid, sweep.param, token,
                                         "traj_" + pid + "_", rows[idx]);
            std::string msg;
            for (const auto& n : files.names) msg += "wrote " + out_path(cfg, n) + "\n";
            messages[idx] = msg;
        } catch (const std::exception& e) {
            rows[idx] = pid + ',' + sweep.param + ',' + token + ",nan,nan,error,-1,-,0\n";
            messages[idx] = std::string("point ") + pid + " failed: " + e.what() + "\n";
        }
    }

    std::string all_rows;
    for (const auto& r : rows) all_rows += r;
    write_summary(cfg, all_rows);
    for (const auto& m : messages) log << m;
    log << "wrote " << out_path(cfg, "summary.csv") << '\n';
}

}  // namespace nmse
