// climctl: scenario runner for the climate control laboratory.
//
//   climctl <subcommand> --config scenario.yaml [--seed N] [--out DIR] [--quiet]
//
// Exit codes: 0 success, 1 I/O failure, 2 parse or validation error,
// 3 numerical blow-up.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "climctl/cli/commands.hpp"
#include "climctl/cli/config.hpp"

namespace {

namespace fs = std::filesystem;
using namespace climctl;

void write_outputs(const fs::path& dir, const cli::RunOutput& run, double wall_time_s, bool quiet) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw cli::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    try {
      csv::write_file((dir / name).string(), content);
    } catch (const Error& e) {
      throw cli::IoError(e.what());
    }
    if (!quiet) std::cout << "wrote " << (dir / name).string() << '\n';
  };
  for (const auto& [name, content] : run.files) write(name, content);
  write("manifest.json", cli::make_manifest(run, wall_time_s).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"climctl: energy-balance and primitive-equation climate models with control, "
               "assimilation and uncertainty tools"};
  std::string command, config, out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  std::string names;
  for (const auto& n : cli::command_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("command", command, "Subcommand (" + names + "); defaults to the config's 'command'")
      ->check(CLI::IsMember(cli::command_names()));
  app.add_option("--config", config, "Scenario file (YAML or JSON) or a run manifest")->required();
  app.add_option("--seed", seed, "Random seed; overrides the config");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_flag("--quiet", quiet, "Only report errors and warnings");
  app.set_version_flag("--version", std::string(CLIMCTL_VERSION));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    cli::Document doc = cli::load_document(config);
    const cli::RunOutput run = cli::run_command(
        doc, command.empty() ? std::nullopt : std::optional<std::string>(command), seed);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& w : run.warnings) std::cerr << "warning: " << w << '\n';
    write_outputs(out_dir, run, wall, quiet);
    return 0;
  } catch (const cli::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const SingularityError& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
