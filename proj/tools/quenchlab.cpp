#include <CLI11.hpp>

#include <iostream>

#include "quenchlab/experiment.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Quench simulator for two harmonic chains joined at t = 0"};
  app.require_subcommand(1);

  quenchlab::Invocation inv;
  std::string config, preset, out;
  double floor = 0.0;
  long long seed = 0;

  for (const char *name : {"run", "sweep"}) {
    auto *sub = app.add_subcommand(name, std::string(name) == "run" ? "Run the analyses listed in a config or preset"
                                                                    : "Run the size-scaling sweep of a config");
    sub->add_option("--config", config, "Config file (key = value)");
    sub->add_option("--preset", preset, "Built-in preset: fig1, table1, gscale, oracle, covariance");
    sub->add_option("--out", out, "Output directory (falls back to $QUENCHLAB_OUT)");
    sub->add_option("--threads", inv.threads, "Worker threads for time-sample parallelism")->check(CLI::PositiveNumber);
    sub->add_flag("--dump-bogoliubov", inv.dump_bogoliubov, "Write alpha, beta and F as CSV");
    sub->add_option("--floor", floor, "Amplitude floor for delocalization counts");
    sub->add_option("--seed", seed, "Reserved; no randomness is used");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : quenchlab::exit_code::config;
  }

  auto *active = app.get_subcommands().front();
  inv.command = active->get_name();
  if (active->count("--config"))
    inv.config_path = config;
  if (active->count("--preset"))
    inv.preset = preset;
  if (active->count("--out"))
    inv.out_dir = out;
  if (active->count("--floor"))
    inv.floor = floor;
  if (active->count("--seed"))
    inv.seed = seed;
  return quenchlab::execute(inv, std::cerr);
}
