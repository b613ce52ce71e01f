// chns: command line front end.
//
//   chns <simulate|energycheck|gradcheck|optimize|continue> --config run.json --out dir
//
// Prints one status line to stdout. Exit codes: 0 pass, 2 audit failure,
// 3 solver failure, 4 config error.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "chns/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard/Navier-Stokes optimal control runner"};
  app.set_version_flag("--version", std::string(CHNS_VERSION));
  app.require_subcommand(1);

  std::string config, out = "out";
  const char* subs[][2] = {
      {"simulate", "forward run with mass and divergence audits"},
      {"energycheck", "forward run with the energy inequality audit"},
      {"gradcheck", "adjoint gradient against central finite differences"},
      {"optimize", "projected gradient on the tracking objective"},
      {"continue", "Yosida continuation with stationarity residuals"},
  };
  for (auto& s : subs) {
    CLI::App* c = app.add_subcommand(s[0], s[1]);
    c->add_option("--config", config, "JSON run configuration (empty file = defaults)")->required();
    c->add_option("--out", out, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : chns::kExitConfig;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  const chns::RunResult res = chns::run_command(sub, config, out);
  std::cout << res.line() << '\n';
  return res.code;
}
