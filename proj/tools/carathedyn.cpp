#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>

#include "carathedyn/fixtures.hpp"
#include "carathedyn/harness.hpp"

// Exit codes: 0 all checks pass, 1 check failure, 2 configuration or IO error.

int main(int argc, char** argv) {
  CLI::App app{"carathedyn: dimension-theoretic equilibrium and SRB measures on "
               "suspension flows over subshifts of finite type"};
  app.require_subcommand(0, 1);

  cdyn::RunConfig config;
  std::vector<std::string> tasks = {"pressure", "leaf",      "conformality",
                                    "cocycle",  "product",   "two-sided",
                                    "srb",      "pushforward", "all"};

  bool list_only = false;
  auto* list_cmd = app.add_subcommand("list-fixtures", "print the named fixtures");
  list_cmd->callback([&]() { list_only = true; });

  for (const auto& t : tasks) {
    auto* sub = app.add_subcommand(t, "run the " + t + " verification suite");
    sub->add_option("--fixture", config.fixture_name, "named fixture");
    sub->add_option("--system", config.system_file, "system definition file");
    sub->add_option("--cutoff", config.cutoffs, "cutoff schedule T ...");
    sub->add_option("--depth-cap", config.depth_cap, "cylinder tree depth cap");
    sub->add_option("--alpha-tol", config.alpha_tol, "bisection tolerance for alpha");
    sub->add_option("--seed", config.seed, "sample generator seed");
    sub->add_option("--out", config.out_dir, "output directory for reports and CSVs");
    sub->callback([&, t]() { config.task = t; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list_only) {
      for (const auto& f : cdyn::list_fixtures())
        std::printf("%-8s P=%.9f  %s\n", f.name.c_str(), f.oracle_pressure,
                    f.description.c_str());
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 2;
    }
    if (config.fixture_name.empty() && config.system_file.empty()) {
      std::cerr << "error: provide --fixture NAME or --system FILE\n";
      return 2;
    }
    cdyn::Report rep = cdyn::run(config);
    std::cout << cdyn::report_text(rep);
    return rep.overall() ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
