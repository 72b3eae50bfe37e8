#pragma once

#include <iosfwd>
#include <string>

#include "thermoshift/fuchsian.hpp"
#include "thermoshift/potential.hpp"
#include "thermoshift/shift.hpp"
#include "thermoshift/thermo.hpp"

namespace thermoshift {

// Parsed run configuration: shift/potential/group sections plus one command.
// The JSON schema is documented in the README; defaults are injected here and
// echoed into the report provenance.
struct RunConfig;

struct LoadedConfig {
  std::shared_ptr<RunConfig> cfg;  // opaque; holds the parsed document
};

LoadedConfig load_config_text(const std::string& text);
LoadedConfig load_config_file(const std::string& path);

struct RunResult {
  int exit_code = 0;
  std::string report;       // full report (format per config)
  std::string output_path;  // where the report was written ("" = not written)
  std::string summary;      // one-line status for the console
};

// Executes the configured command and writes the report. Deterministic given
// config + seed. Exit codes: 0 ok, 2 config error, 3 numerical
// non-convergence, 4 budget exceeded.
RunResult run(const LoadedConfig& cfg, const std::string& output_override = "",
              const std::string& format_override = "");

// Builders shared with tests: construct domain objects from config sections.
ShiftSpec shift_spec_from_config(const LoadedConfig& cfg);
TruncationRule truncation_from_config(const LoadedConfig& cfg);
PotentialPtr potential_from_config(const LoadedConfig& cfg, const TruncatedShift& shift,
                                   const std::string& section = "potential");
GroupPresentation group_from_config(const LoadedConfig& cfg,
                                    const std::string& section = "group");

}  // namespace thermoshift
