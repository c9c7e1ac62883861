// Command-line front end.  Subcommands: simulate, verify, export.
#include <cstdio>

#include "CLI11.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic numerical laboratory for the Landau collision "
               "operator near a Maxwellian"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "March the linearized equation");
  auto* ver = app.add_subcommand("verify", "Run a named verification suite");
  auto* exp = app.add_subcommand("export", "Export artifacts to CSV slices");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed() || ver->parsed() || exp->parsed()) {
    std::fprintf(stderr, "not implemented yet\n");
    return 1;
  }
  return 0;
}
