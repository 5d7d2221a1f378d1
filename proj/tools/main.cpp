#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "disth2/cli.hpp"

namespace {

int write_outputs(const disth2::CommandResult& result, const std::string& command,
                  const std::optional<std::string>& out_path, const std::string& format) {
  const bool is_simulate = command == "simulate";

  if (format == "csv") {
    if (!is_simulate) {
      std::cerr << "error: --format csv is only valid for the simulate command\n";
      return 1;
    }
    std::cout << result.csv;
  } else {
    std::cout << result.report;
  }

  if (out_path) {
    std::ofstream out(*out_path);
    if (!out) {
      std::cerr << "error: cannot open output file: " << *out_path << "\n";
      return 1;
    }
    out << (is_simulate ? result.csv : result.report);
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed diffusive H2 protocol synthesis and certification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string gain_path;
  std::optional<std::string> out_path;
  std::string format = "json";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "problem config file (JSON)")->required();
    cmd->add_option("--out", out_path,
                    "output file (report JSON; trajectory CSV for simulate)");
    cmd->add_option("--format", format, "stdout format: json|csv (csv: simulate only)")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "graph Laplacian spectrum and connectivity");
  add_common(spectrum_cmd);
  CLI::App* design_cmd = app.add_subcommand("design", "synthesize and certify a protocol gain");
  add_common(design_cmd);
  CLI::App* verify_cmd = app.add_subcommand("verify", "certify an externally supplied gain");
  add_common(verify_cmd);
  verify_cmd->add_option("--gain", gain_path, "gain file (JSON with a 'K' matrix)")->required();
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "time-domain closed-loop simulation");
  add_common(simulate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const disth2::ProblemConfig config = disth2::load_config(config_path);

    disth2::CommandResult result;
    std::string command;
    if (spectrum_cmd->parsed()) {
      command = "spectrum";
      result = disth2::run_spectrum(config);
    } else if (design_cmd->parsed()) {
      command = "design";
      result = disth2::run_design(config);
    } else if (verify_cmd->parsed()) {
      command = "verify";
      const disth2::Matrix k = disth2::load_gain(gain_path);
      result = disth2::run_verify(config, k);
    } else {
      command = "simulate";
      result = disth2::run_simulate(config);
    }
    return write_outputs(result, command, out_path, format);
  } catch (const disth2::Error& e) {
    std::cerr << "error (" << disth2::error_code_name(e.code()) << "): " << e.what() << "\n";
    return disth2::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
