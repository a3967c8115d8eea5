#include <iostream>

#include "CLI11.hpp"
#include "critvar/version.hpp"
#include "runner/runner.hpp"

int main(int argc, char** argv) {
  using namespace critvar::runner;
  CLI::App app{"Variational experiments for critical elliptic problems with Hardy potentials", "critvar"};
  app.set_version_flag("--version", critvar::kVersion);
  app.require_subcommand(1);

  RunOptions opts;
  opts.log = &std::cerr;
  std::string out;
  for (const std::string& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", opts.config_path, "Experiment YAML file")->required();
    sub->add_option("--out", out, "Output directory (overrides CRITVAR_OUT_DIR and output.dir)");
    sub->add_option("--workers", opts.workers, "Concurrent sweep points")->check(CLI::PositiveNumber);
    sub->callback([&opts, sub] { opts.subcommand = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (!out.empty()) opts.out_dir = out;
  const RunOutcome outcome = run(opts);
  return outcome.exit_code;
}
