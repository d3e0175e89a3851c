// Command-line experiment runner.
//
//   vlab_cli <kind> [--config FILE] [--out DIR] [--seed N] [--resolution NR,NT] [--check NAME]
//   vlab_cli run --config FILE ...
//
// Exit codes: 0 all indicators pass, 1 an indicator failed, 2 usage or
// config error, 3 solver or data failure.

#include "vlab/experiments.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string resolution;
  std::string check;
  long long seed = -1;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "INI experiment config")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory (default out/<kind>)");
  sub->add_option("--seed", o.seed, "random seed (overrides [experiment] seed)");
  sub->add_option("--resolution", o.resolution, "grid NR,NT (overrides [experiment] resolution)");
  sub->add_option("--check", o.check, "sub-check for kinds with several");
}

int run(const std::string& subcommand, const Options& o) {
  vlab::Config cfg = o.config.empty() ? vlab::Config() : vlab::Config::from_file(o.config);
  if (subcommand != "run") {
    const std::string kind = cfg.has("experiment.kind") ? cfg.get_string("experiment.kind", "") : "";
    if (!kind.empty() && kind != subcommand) {
      throw vlab::ConfigError("config kind '" + kind + "' does not match subcommand '" + subcommand + "'");
    }
    cfg.set("experiment.kind", subcommand);
  }
  if (!o.resolution.empty()) {
    vlab::parse_resolution(o.resolution);
    cfg.set("experiment.resolution", o.resolution);
  }
  if (o.seed >= 0) cfg.set("experiment.seed", std::to_string(o.seed));
  if (!o.check.empty()) cfg.set("experiment.check", o.check);

  const vlab::Report rep = vlab::run_experiment(cfg);
  const std::string out = o.out.empty() ? "out/" + rep.kind : o.out;
  vlab::write_report(rep, cfg.entries(), out);

  std::printf("%s: %s\n", rep.kind.c_str(), rep.summary.c_str());
  for (const auto& i : rep.indicators) {
    std::printf("  [%s] %s\n", i.passed() ? "PASS" : "FAIL", i.describe().c_str());
  }
  for (const auto& [k, v] : rep.scalars) std::printf("  %s = %.6g\n", k.c_str(), v);
  std::printf("report written to %s\n", out.c_str());
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-viscosity Stokes identifiability lab"};
  app.require_subcommand(1, 1);
  Options opt;
  std::vector<std::string> names = vlab::experiment_kinds();
  names.push_back("run");
  for (const auto& k : names) {
    auto* sub = app.add_subcommand(k, k == "run" ? "run the kind named in --config" : "run a " + k + " experiment");
    add_common(sub, opt);
    if (k == "run") sub->get_option("--config")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run(sub, opt);
  } catch (const vlab::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const vlab::Error& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
