#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "cglb/cli.hpp"
#include "cglb/errors.hpp"

extern char** environ;

int main(int argc, char** argv) {
  using namespace cglb::cli;
  CLI::App app{"cglb: coupled Ginzburg-Landau / Burgers experiments"};
  RunOptions opts;
  std::string config_path, out_dir;
  long long seed = 0;
  int threads = 1;
  app.add_option("command", opts.command, "subcommand")
      ->required()
      ->check(CLI::IsMember(commands()));
  auto* config_opt = app.add_option("--config", config_path, "INI configuration file");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomised inputs")->check(CLI::NonNegativeNumber);
  auto* threads_opt = app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*out_opt) opts.out_dir = out_dir;
    if (*seed_opt) opts.seed = std::uint64_t(seed);
    if (*threads_opt) opts.threads = threads;
    apply_environment_defaults(opts, environ, bool(*seed_opt), bool(*threads_opt), bool(*out_opt));
    Config config = *config_opt ? Config::from_file(config_path) : Config{};
    config.apply_environment(environ);
    return run(opts, config, std::cout, std::cerr);
  } catch (const cglb::Error& e) {
    const nlohmann::json d = {
        {"status", "error"}, {"command", opts.command}, {"kind", e.kind()}, {"message", e.what()}};
    std::cerr << d.dump() << "\n";
    return kExitUsage;
  }
}
