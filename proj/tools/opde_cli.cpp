#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "opde/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Weighted half-line solver for the fourth-order pencil (-mu + A)(mu + A)^3"};
  std::string config;
  std::string mode;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "certify, solve, verify or sweep")
      ->required()
      ->check(CLI::IsMember({"certify", "solve", "verify", "sweep"}));
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "overrides the config seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : opde::cli::kInputError;
  }
  return opde::cli::run(config, opde::cli::parse_mode(mode), out, seed, std::cerr);
}
