#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "sigmav/sigmav.h"

int main(int argc, char** argv) {
  CLI::App app{"Level-set sampling and entropy-derivative experiments"};
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = -1;
  bool check_only = false;
  app.add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--seed", seed, "64-bit seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  app.add_flag("--check", check_only, "validate the config and exit");
  app.set_version_flag("--version", sigmav_version());
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  if (check_only) {
    if (sigmav_config_check(text.c_str(), seed.has_value()) != SIGMAV_OK) {
      std::cerr << config_path << ": " << sigmav_last_error() << '\n';
      return 1;
    }
    std::cout << "ok\n";
    return 0;
  }

  int exit_code = 1;
  const sigmav_status st = sigmav_run_config_text(text.c_str(), out_dir.c_str(), threads, seed.has_value(),
                                                  seed.value_or(0), &exit_code);
  if (st != SIGMAV_OK) {
    std::cerr << config_path << ": " << sigmav_last_error() << '\n';
    return 1;
  }
  if (exit_code == 1) std::cerr << "run failed: " << sigmav_last_error() << '\n';
  if (exit_code == 2) std::cerr << "run completed with flagged results; see manifest.json\n";
  return exit_code;
}
