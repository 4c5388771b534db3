#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "tbeam/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::map<std::string, std::string> values;
  bool conservative = false;
};

void add_options(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key=value configuration file");
  const std::pair<const char*, const char*> opts[] = {
      {"params", "a,b,k1,k2,k3,k4"},
      {"kmax", "largest frequency index"},
      {"grid-n", "finite-difference resolution"},
      {"horizon", "simulation end time"},
      {"dt", "time step (default h/2)"},
      {"out", "output path prefix"},
      {"tolerance", "Newton residual tolerance"},
      {"riesz-k", "Riesz truncation index"},
      {"modes", "number of modes to emit"},
      {"seed", "initial-data seed"},
      {"width", "SVG width"},
      {"height", "SVG height"},
  };
  for (const auto& [name, help] : opts) {
    sub->add_option_function<std::string>(
        std::string("--") + name, [&f, key = std::string(name)](const std::string& v) { f.values[key] = v; }, help);
  }
  sub->add_flag("--conservative", f.conservative, "use the undamped twin operator");
}

const std::map<std::string, std::string> kDescriptions{
    {"spectrum", "eigenvalues in the strip up to kmax (CSV + JSON report)"},
    {"predict", "asymptotic eigenvalue predictions (CSV)"},
    {"modes", "lowest normalized eigenmodes with residuals (JSON)"},
    {"riesz", "closeness of damped and undamped modes (CSV)"},
    {"decay", "finite-difference energy decay run (CSV + JSON fit)"},
    {"table", "k^2 Re(lambda) at k = 200, 400, ..., 1000"},
    {"plot", "SVG scatter of the computed spectrum"},
};

std::string message_of(const tbeam::Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(tbeam::to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis and decay simulation of a damped Timoshenko beam with tip body"};
  app.require_subcommand(1);
  Flags flags;
  for (const auto& name : tbeam::cli::commands()) add_options(app.add_subcommand(name, kDescriptions.at(name)), flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << tbeam::cli::error_json("InvalidConfig", e.what()) << "\n";
    return 2;
  }
  try {
    tbeam::cli::RunConfig cfg;
    if (!flags.config.empty()) tbeam::cli::apply_config_file(cfg, flags.config);
    cfg.command = app.get_subcommands().front()->get_name();
    for (const auto& [k, v] : flags.values) tbeam::cli::apply_entry(cfg, k, v);
    if (flags.conservative) cfg.conservative = true;
    const auto artifacts = tbeam::cli::run(cfg);
    tbeam::cli::emit(cfg, artifacts, std::cout);
  } catch (const tbeam::Error& e) {
    std::cerr << tbeam::cli::error_json(std::string(tbeam::to_string(e.code())), message_of(e)) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << tbeam::cli::error_json("InternalError", e.what()) << "\n";
    return 3;
  }
  return 0;
}
