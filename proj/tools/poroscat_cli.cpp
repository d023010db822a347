// poroscat: forward synthesis and sampling-method imaging of fracture scenes.
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid input/scenario,
// 3 numerical failure, 4 I/O failure, 5 `check` found a failing property.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "poroscat/errors.hpp"
#include "poroscat/pipeline.hpp"
#include "poroscat/scenario.hpp"

using namespace poroscat;

namespace {

struct Flags {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string method;
  std::string mode;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "scenario JSON file")->required();
  cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
  cmd->add_option("--seed", f.seed, "noise seed (overrides noise.seed)");
  cmd->add_option("--threads", f.threads, "worker threads, 0 = all")->check(CLI::NonNegativeNumber);
  cmd->add_option("--method", f.method, "inversion method")->check(CLI::IsMember({"lsm", "glsm"}));
  cmd->add_option("--mode", f.mode, "forward closure")->check(CLI::IsMember({"local", "interacting"}));
}

RunOptions options_from(const CLI::App& cmd, const Flags& f) {
  RunOptions o;
  o.threads = f.threads;
  if (cmd.count("--out")) o.out_dir = f.out;
  if (cmd.count("--seed")) o.seed = f.seed;
  if (cmd.count("--method")) o.method = parse_method(f.method);
  if (cmd.count("--mode")) o.mode = parse_solve_mode(f.mode);
  return o;
}

void print_map_summary(const IndicatorMap& map) {
  std::size_t best = 0;
  for (std::size_t p = 0; p < map.raw.size(); ++p) {
    if (map.normalized[p] == 1.0) {
      best = p;
      break;
    }
  }
  const Vec3 x = map.grid.point(best);
  std::printf("%s map: %zu points, peak at (%.3f, %.3f), delta %.3g%s\n", to_string(map.method).c_str(),
              map.raw.size(), x.x(), x.y(), map.delta, map.degenerate ? " [degenerate]" : "");
  for (const std::string& w : map.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poroelastic near-field scattering synthesis and fracture imaging"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* fwd = app.add_subcommand("forward", "assemble the clean and noisy scattering matrices");
  CLI::App* inv = app.add_subcommand("invert", "compute an indicator map from lambda_noisy.csv");
  CLI::App* map = app.add_subcommand("map", "forward followed by invert");
  CLI::App* chk = app.add_subcommand("check", "run the property suite on a scenario");
  for (CLI::App* c : {fwd, inv, map, chk}) add_common(c, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    const RunOptions opts = options_from(*cmd, f);
    const Scenario sc = apply_overrides(load_scenario(f.scenario), opts);
    if (cmd == fwd) {
      const ForwardResult r = run_forward(sc, opts);
      std::printf("forward: %zu x %zu matrix, delta %.6g -> %s\n", r.clean.dimension(), r.clean.dimension(),
                  r.noisy.delta, sc.output_dir.c_str());
    } else if (cmd == inv) {
      print_map_summary(run_invert(sc, opts));
    } else if (cmd == map) {
      print_map_summary(run_map(sc, opts));
    } else {
      bool all = true;
      for (const CheckEntry& e : run_check(sc, opts)) {
        std::printf("%-32s %s  %.3e  %s\n", e.name.c_str(), e.pass ? "PASS" : "FAIL", e.value, e.detail.c_str());
        all = all && e.pass;
      }
      return all ? 0 : 5;
    }
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
