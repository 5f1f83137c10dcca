#include "nmse/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nmse {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "emitter.omega0_eV", "emitter.gamma0_eV", "emitter.z_nm", "emitter.rwa",
        "emitter.shift_prefactor",
        "material.preset", "material.sigma0",
        "spectrum.csv", "spectrum.lorentzians", "spectrum.coeffs", "spectrum.radius_nm",
        "spectrum.support_eV", "spectrum.eps", "spectrum.grid_eV",
        "conductivity.grid_eV",
        "solver", "tmax_fs", "dt_fs", "output_dir",
        "fit.n_peaks", "fit.window_eV", "fit.pinned_center_eV",
        "kernel.tol_rel", "kernel.omega_cut_eV",
        "shift.guard_tol",
        "solve.check_convergence", "solve.conv_tol",
        "sweep.param", "sweep.values",
    };
    return keys;
}

double to_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (trim(s.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: " + key + " = '" + s + "' is not a number");
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
    return out;
}

}  // namespace

RawConfig RawConfig::parse_text(const std::string& text) {
    RawConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().count(key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
        if (cfg.kv.count(key)) throw std::invalid_argument("config: duplicate key '" + key + "'");
        cfg.kv[key] = value;
    }
    return cfg;
}

RawConfig RawConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str());
}

RawConfig override_key(const RawConfig& raw, const std::string& key, const std::string& value) {
    if (!known_keys().count(key))
        throw std::invalid_argument("sweep: unknown config key '" + key + "'");
    RawConfig out = raw;
    out.kv[key] = value;
    return out;
}

RunConfig build_run_config(const RawConfig& raw) {
    const auto& kv = raw.kv;
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto require = [&](const std::string& key) -> const std::string& {
        const std::string* v = get(key);
        if (!v) throw std::invalid_argument("config: missing required key '" + key + "'");
        return *v;
    };

    RunConfig cfg;
    cfg.emitter.omega0_ev = to_double("emitter.omega0_eV", require("emitter.omega0_eV"));
    cfg.emitter.gamma0_ev = to_double("emitter.gamma0_eV", require("emitter.gamma0_eV"));
    cfg.emitter.z_nm = to_double("emitter.z_nm", require("emitter.z_nm"));
    if (const auto* v = get("emitter.rwa")) {
        if (*v == "with") cfg.emitter.rwa = RwaMode::With;
        else if (*v == "beyond") cfg.emitter.rwa = RwaMode::Beyond;
        else throw std::invalid_argument("config: emitter.rwa must be 'with' or 'beyond'");
    }
    if (const auto* v = get("emitter.shift_prefactor")) {
        if (*v == "two_pi") cfg.emitter.shift_prefactor = ShiftPrefactor::TwoPi;
        else if (*v == "inv_two_pi") cfg.emitter.shift_prefactor = ShiftPrefactor::InvTwoPi;
        else throw std::invalid_argument("config: emitter.shift_prefactor must be 'two_pi' or 'inv_two_pi'");
    }
    cfg.emitter.validate();

    // exactly one spectrum source
    const std::string* csv = get("spectrum.csv");
    const std::string* lor = get("spectrum.lorentzians");
    const std::string* gre = get("spectrum.coeffs");
    const int n_sources = (csv != nullptr) + (lor != nullptr) + (gre != nullptr);
    if (n_sources != 1)
        throw std::invalid_argument(
            "config: exactly one of spectrum.csv, spectrum.lorentzians, spectrum.coeffs is required");
    if (const auto* v = get("spectrum.eps")) {
        cfg.eps = to_double("spectrum.eps", *v);
        if (!(cfg.eps >= 1.0)) throw std::invalid_argument("config: spectrum.eps must be >= 1");
    }
    if (csv) {
        cfg.source = SpectrumCsvSource{*csv};
    } else if (lor) {
        // "lambda:omega_eV:beta_eV; ..." plus a support interval
        SpectrumLorentzianSource src;
        for (const auto& tok : split_list(*lor, ';')) {
            auto parts = split_list(tok, ':');
            if (parts.size() != 3)
                throw std::invalid_argument(
                    "config: spectrum.lorentzians entries must be 'lambda:omega_eV:beta_eV'");
            src.peaks.push_back({to_double("lambda", parts[0]), to_double("omega", parts[1]),
                                 to_double("beta", parts[2])});
        }
        if (src.peaks.empty())
            throw std::invalid_argument("config: spectrum.lorentzians holds no peaks");
        auto sup = split_list(require("spectrum.support_eV"), ',');
        if (sup.size() != 2)
            throw std::invalid_argument("config: spectrum.support_eV must be 'lo,hi'");
        src.support_lo = to_double("support lo", sup[0]);
        src.support_hi = to_double("support hi", sup[1]);
        cfg.source = std::move(src);
    } else {
        SpectrumGreensSource src;
        src.coeffs_path = *gre;
        src.radius_nm = to_double("spectrum.radius_nm", require("spectrum.radius_nm"));
        if (!(src.radius_nm > 0.0))
            throw std::invalid_argument("config: spectrum.radius_nm must be positive");
        cfg.source = std::move(src);
    }

    if (const auto* v = get("solver")) {
        if (*v == "volterra") cfg.solver = SolverChoice::Volterra;
        else if (*v == "pseudomode") cfg.solver = SolverChoice::Pseudomode;
        else if (*v == "analytic") cfg.solver = SolverChoice::Analytic;
        else if (*v == "all") cfg.solver = SolverChoice::All;
        else throw std::invalid_argument("config: solver must be volterra|pseudomode|analytic|all");
    }
    if (const auto* v = get("tmax_fs")) cfg.tmax_fs = to_double("tmax_fs", *v);
    if (const auto* v = get("dt_fs")) cfg.dt_fs = to_double("dt_fs", *v);
    if (const auto* v = get("output_dir")) cfg.output_dir = *v;

    if (const auto* v = get("material.preset")) {
        const double sigma0 = get("material.sigma0")
                                  ? to_double("material.sigma0", *get("material.sigma0"))
                                  : std::numeric_limits<double>::quiet_NaN();
        if (*v == "high") cfg.material = MaterialParams::preset(MaterialQuality::High, sigma0);
        else if (*v == "low") cfg.material = MaterialParams::preset(MaterialQuality::Low, sigma0);
        else throw std::invalid_argument("config: material.preset must be 'high' or 'low'");
    }

    auto parse_grid = [&](const std::string& key) -> std::optional<GridSpec> {
        const std::string* v = get(key);
        if (!v) return std::nullopt;
        auto parts = split_list(*v, ',');
        if (parts.size() != 3)
            throw std::invalid_argument("config: " + key + " must be 'lo,hi,n'");
        GridSpec g{to_double(key, parts[0]), to_double(key, parts[1]),
                   static_cast<int>(to_double(key, parts[2]))};
        if (g.n <= 0) throw std::invalid_argument("config: " + key + " has an empty grid");
        if (!(g.lo < g.hi)) throw std::invalid_argument("config: " + key + " needs lo < hi");
        return g;
    };
    cfg.spectrum_grid = parse_grid("spectrum.grid_eV");
    cfg.conductivity_grid = parse_grid("conductivity.grid_eV");

    if (const auto* v = get("fit.n_peaks")) {
        cfg.fit_n_peaks = static_cast<int>(to_double("fit.n_peaks", *v));
        if (cfg.fit_n_peaks < 1) throw std::invalid_argument("config: fit.n_peaks must be >= 1");
    }
    if (const auto* v = get("fit.window_eV")) {
        auto parts = split_list(*v, ',');
        if (parts.size() != 2) throw std::invalid_argument("config: fit.window_eV must be 'lo,hi'");
        cfg.fit_window_lo = to_double("fit window lo", parts[0]);
        cfg.fit_window_hi = to_double("fit window hi", parts[1]);
    }
    if (const auto* v = get("fit.pinned_center_eV"))
        cfg.fit_pinned_center = to_double("fit.pinned_center_eV", *v);

    if (const auto* v = get("kernel.tol_rel")) cfg.kernel.tol_rel = to_double("kernel.tol_rel", *v);
    if (const auto* v = get("kernel.omega_cut_eV"))
        cfg.kernel.omega_cut_ev = to_double("kernel.omega_cut_eV", *v);
    if (const auto* v = get("shift.guard_tol"))
        cfg.kernel.shift.guard_tol = to_double("shift.guard_tol", *v);
    if (const auto* v = get("solve.check_convergence")) {
        if (*v == "true" || *v == "1") cfg.solve.check_convergence = true;
        else if (*v == "false" || *v == "0") cfg.solve.check_convergence = false;
        else throw std::invalid_argument("config: solve.check_convergence must be true or false");
    }
    if (const auto* v = get("solve.conv_tol")) cfg.solve.conv_tol = to_double("solve.conv_tol", *v);

    const std::string* sp = get("sweep.param");
    const std::string* sv = get("sweep.values");
    if ((sp != nullptr) != (sv != nullptr))
        throw std::invalid_argument("config: sweep.param and sweep.values must appear together");
    if (sp) {
        SweepSpec sweep;
        sweep.param = *sp;
        if (!known_keys().count(sweep.param))
            throw std::invalid_argument("config: sweep.param '" + sweep.param +
                                        "' is not a config key");
        sweep.value_tokens = split_list(*sv, ',');
        if (sweep.value_tokens.empty())
            throw std::invalid_argument("config: sweep.values is empty");
        for (const auto& tok : sweep.value_tokens) {
            const double v = to_double("sweep.values", tok);
            if (!std::isfinite(v)) throw std::invalid_argument("config: sweep value not finite");
        }
        cfg.sweep = std::move(sweep);
    }
    return cfg;
}

}  // namespace nmse
