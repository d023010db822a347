#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poroscat/forward.hpp"
#include "poroscat/inversion.hpp"
#include "poroscat/scenario.hpp"

namespace poroscat {

/// Command-line overrides applied on top of a scenario.
struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<Method> method;
  std::optional<SolveMode> mode;
  int threads = 0;
};

Scenario apply_overrides(Scenario s, const RunOptions& o);

struct ForwardResult {
  ScatteringMatrix clean;
  ScatteringMatrix noisy;
  nlohmann::json meta;
};

/// Assembles Lambda and Lambda^delta; no files are written.
ForwardResult compute_forward(const Scenario& s, int threads = 0);
IndicatorMap compute_map(const Scenario& s, const ScatteringMatrix& data, int threads = 0);

/// lambda.csv, lambda_noisy.csv, meta.json, timings.json, resolved_scenario.json.
ForwardResult run_forward(const Scenario& s, const RunOptions& o);
/// Reads lambda_noisy.csv from the output directory; writes map_<method>.csv/.pgm.
IndicatorMap run_invert(const Scenario& s, const RunOptions& o);
IndicatorMap run_map(const Scenario& s, const RunOptions& o);

struct CheckEntry {
  CheckEntry() = default;
  explicit CheckEntry(std::string n) : name(std::move(n)) {}

  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

/// Property suite on the scenario; writes check.json when an output dir is set.
std::vector<CheckEntry> run_check(const Scenario& s, const RunOptions& o);

/// Published modal speeds of the reference background at omega = 3.91.
struct SpeedComparison {
  cplx computed[3];   // s, p1, p2
  cplx reference[3];
  bool real_ok[3];
  bool imag_ok[3];
  bool pass = false;
};
SpeedComparison compare_reference_speeds(const WaveState& wave);

}  // namespace poroscat
