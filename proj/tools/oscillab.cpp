#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "oscillab/scenario.hpp"

namespace {

// Exit codes: 0 ok, 2 certification failure, 3 config error, 4 numerical abort.
constexpr int kExitCert = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

oscillab::ScenarioConfig load_config(const std::string& ref) {
  if (const auto* builtin = oscillab::find_builtin(ref)) return *builtin;
  std::ifstream in(ref);
  if (!in)
    throw oscillab::ConfigError(0, "no built-in scenario or readable file '" +
                                       ref + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return oscillab::parse_config(buf.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscillab: weakly damped forced oscillator laboratory"};
  app.require_subcommand(1);

  std::string config_ref, out_dir, certify_ref;
  double tol_override = 0.0, horizon_override = 0.0;

  auto* run = app.add_subcommand("run", "run a scenario and emit reports");
  run->add_option("config", config_ref,
                  "built-in scenario name or config file path")
      ->required();
  run->add_option("--out", out_dir, "output directory (default out/<name>)");
  run->add_option("--tol", tol_override, "integration tolerance override");
  run->add_option("--horizon", horizon_override, "horizon override");

  auto* list = app.add_subcommand("list-scenarios", "list built-in scenarios");

  auto* certify = app.add_subcommand(
      "certify", "run kernel and algebra certifications only");
  certify->add_option("scenario", certify_ref, "built-in scenario name")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (list->parsed()) {
      for (const auto& s : oscillab::builtin_scenarios())
        std::cout << s.name << "  -  " << s.description << "\n";
      return 0;
    }
    if (run->parsed()) {
      auto cfg = load_config(config_ref);
      if (tol_override > 0.0) cfg.tol = tol_override;
      if (horizon_override > 0.0) cfg.horizon = horizon_override;
      if (out_dir.empty())
        out_dir = (std::filesystem::path("out") / cfg.name).string();
      const auto report = oscillab::run_scenario(cfg, out_dir);
      oscillab::write_report(std::cout, report);
      return report.exit_code();
    }
    if (certify->parsed()) {
      auto cfg = load_config(certify_ref);
      const auto certs = oscillab::run_certifications(cfg);
      bool all_pass = true;
      for (const auto& c : certs) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                  << "  value=" << oscillab::fmt_sig(c.value, 6)
                  << " bound=" << oscillab::fmt_sig(c.bound, 6)
                  << "\n      check: " << c.check << "\n";
        all_pass = all_pass && c.pass;
      }
      return all_pass ? 0 : kExitCert;
    }
  } catch (const oscillab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const oscillab::IntegrationError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
