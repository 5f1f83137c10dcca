#pragma once

#include <iosfwd>
#include <string>

#include "nmse/config.hpp"

namespace nmse {

// Spectrum object for a run; Greens-series sources are tabulated onto the
// coefficient grid at the configured emitter height.
PurcellSpectrum build_spectrum(const RunConfig& cfg);

// Deterministic short id for a sweep point (FNV-1a of "param=token").
std::string point_id(const std::string& param, const std::string& token);

// CLI verbs.  Each writes CSV artifacts into cfg.output_dir (created if
// missing) and logs one line per file to `log`.  Outputs are byte-stable:
// re-running an identical configuration reproduces them exactly, for any
// number of workers.
void cmd_spectrum(const RunConfig& cfg, std::ostream& log);
void cmd_kernel(const RunConfig& cfg, std::ostream& log);
void cmd_fit(const RunConfig& cfg, std::ostream& log);
void cmd_simulate(const RunConfig& cfg, const RawConfig& raw, std::ostream& log);
void cmd_sweep(const RunConfig& cfg, const RawConfig& raw, int jobs, std::ostream& log);

}  // namespace nmse
