#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nmse/dynamics.hpp"
#include "nmse/fitting.hpp"
#include "nmse/kernel.hpp"
#include "nmse/material.hpp"

namespace nmse {

// Flat key = value configuration file; `#` starts a comment.  Unknown keys
// are rejected so typos cannot silently change a run.
struct RawConfig {
    std::map<std::string, std::string> kv;

    static RawConfig parse_file(const std::string& path);
    static RawConfig parse_text(const std::string& text);
};

enum class SolverChoice { Volterra, Pseudomode, Analytic, All };

struct SweepSpec {
    std::string param;                      // config key being swept
    std::vector<std::string> value_tokens;  // raw tokens, applied verbatim
};

struct SpectrumCsvSource {
    std::string path;
};
struct SpectrumLorentzianSource {
    std::vector<LorentzianPeak> peaks;
    double support_lo = 0.0;
    double support_hi = 0.0;
};
struct SpectrumGreensSource {
    std::string coeffs_path;
    double radius_nm = 0.0;
};
using SpectrumSource =
    std::variant<SpectrumCsvSource, SpectrumLorentzianSource, SpectrumGreensSource>;

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;
};

// Fully validated run configuration; exactly one spectrum source.
struct RunConfig {
    EmitterConfig emitter;
    SpectrumSource source;
    double eps = 1.0;
    SolverChoice solver = SolverChoice::Volterra;
    double tmax_fs = 0.0;
    double dt_fs = 0.0;
    std::string output_dir = "out";

    std::optional<MaterialParams> material;
    std::optional<GridSpec> spectrum_grid;      // for `spectrum` on analytic sources
    std::optional<GridSpec> conductivity_grid;  // optional conductivity table

    int fit_n_peaks = 1;
    std::optional<double> fit_window_lo, fit_window_hi;
    std::optional<double> fit_pinned_center;

    KernelBuildOptions kernel;
    SolveOptions solve;

    std::optional<SweepSpec> sweep;
};

// Builds and validates a RunConfig; throws std::invalid_argument with a
// descriptive message on any violation.
RunConfig build_run_config(const RawConfig& raw);

// Copy of `raw` with one key overridden (used for sweep points).
RawConfig override_key(const RawConfig& raw, const std::string& key, const std::string& value);

}  // namespace nmse
