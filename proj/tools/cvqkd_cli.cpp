#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cvqkd/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discrete-modulation CV-QKD key rates, security boundaries and Wigner grids"};
  app.require_subcommand(1);

  cvqkd::CommandOptions opt;
  int threads = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config_path, "INI config or a manifest.json to replay");
    if (needs_config) c->required();
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--seedless", opt.seedless, "assert the run uses no random numbers");
  };

  auto* rate = app.add_subcommand("rate-sweep", "key rate R(s) over a signal-amplitude grid");
  auto* boundary = app.add_subcommand("boundary", "security boundary r_E*(omega)");
  auto* wigner = app.add_subcommand("wigner", "Wigner function of one traced environment mode");
  auto* validate = app.add_subcommand("validate", "oracle cross-checks and invariants");
  add_common(rate, true);
  add_common(boundary, true);
  add_common(wigner, true);
  add_common(validate, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cvqkd::kExitConfig;
  }
  if (threads > 0) opt.threads = threads;
  // Nothing in the library draws random numbers, so --seedless holds by construction.

  if (rate->parsed()) return cvqkd::cmd_rate_sweep(opt, std::cout, std::cerr);
  if (boundary->parsed()) return cvqkd::cmd_boundary(opt, std::cout, std::cerr);
  if (wigner->parsed()) return cvqkd::cmd_wigner(opt, std::cout, std::cerr);
  return cvqkd::cmd_validate(opt, std::cout, std::cerr);
}
