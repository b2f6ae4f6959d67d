// Command-line driver: kernel, semigroup, barrier, checks.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "wkam/wkam.hpp"

namespace fs = std::filesystem;
using namespace wkam;

namespace {

enum Exit { kOk = 0, kChecksFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string dump;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "config file (section.key = value)");
  cmd->add_option("--set", c.sets, "override, key=value (repeatable)");
  cmd->add_option("--out", c.out, "output directory (overrides run.output)");
  cmd->add_option("--dump-kernel", c.dump, "write the raw period kernel in binary form");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& s : c.sets) apply_override(cfg, s);
  if (!c.out.empty()) cfg.output = c.out;
  validate(cfg);
  return cfg;
}

template <class Kernel>
void maybe_dump(const Common& c, const System<Kernel>& sys) {
  if (c.dump.empty()) return;
  if constexpr (std::is_same_v<Kernel, ProductKernel>)
    write_kernel_dump(c.dump, sys.pk.raw_period.to_dense(), sys.cfg.steps_per_period);
  else
    write_kernel_dump(c.dump, sys.pk.raw_period, sys.cfg.steps_per_period);
}

int cmd_kernel(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output);
  write_text(out / "resolved.cfg", echo_config(cfg));
  return with_system(cfg, [&](const auto& sys) {
    maybe_dump(c, sys);
    const std::string text = kernel_summary_text(cfg, summarize_kernels(sys));
    write_text(out / "kernel.txt", text);
    std::cout << text;
    return kOk;
  });
}

int cmd_semigroup(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output);
  write_text(out / "resolved.cfg", echo_config(cfg));
  return with_system(cfg, [&](const auto& sys) {
    maybe_dump(c, sys);
    const auto run = run_convergence(sys);
    write_text(out / "errors.csv", errors_csv(run.report.series));
    write_text(out / "ubar.csv", value_function_csv(run.fixed_point.ubar));
    const std::string text = report_text(run.report);
    write_text(out / "report.txt", text);
    std::cout << text;
    return kOk;
  });
}

int cmd_barrier(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output);
  write_text(out / "resolved.cfg", echo_config(cfg));
  return with_system(cfg, [&](const auto& sys) {
    maybe_dump(c, sys);
    const auto b = configured_barrier(sys, 0);
    write_barrier_csv(out / "barrier.csv", b, sys.grid.size());
    std::string text = "system = " + cfg.system_name + "\n";
    text += "n_min = " + std::to_string(b.n_min) + "\nn_max = " + std::to_string(b.n_max) + "\n";
    text += "mode = " + cfg.barrier_mode + "\n";
    text += "eventual_period = " + std::to_string(b.eventual_period) + "\n";
    text += "tolerance = " + fmt17(cfg.tol_aubry) + "\n";
    AubryReport a;
    try {
      a = aubry_detect(b, cfg.tol_aubry);
    } catch (const NumericalError&) {
      std::string diag = text + "aubry_nodes = 0\ndiagonal_min = ";
      const auto d = b.diagonal();
      diag += fmt17(*std::min_element(d.begin(), d.end())) + "\n";
      write_text(out / "aubry.txt", diag);
      throw;
    }
    text += "aubry_nodes = " + std::to_string(a.nodes.size()) + "\n";
    text += std::string("matches_reference = ") +
            (aubry_matches_reference(sys.spec, sys.grid, a) ? "true" : "false") + "\n";
    for (std::size_t n : a.nodes) {
      const auto x = sys.grid.coords(n);
      text += "node " + std::to_string(n) + " " + fmt17(x[0]);
      if (sys.grid.dim() == 2) text += " " + fmt17(x[1]);
      text += "\n";
    }
    text += "diagonal";
    for (double d : a.diagonal) text += " " + fmt17(d);
    text += "\n";
    write_text(out / "aubry.txt", text);
    write_text(out / "ubar_barrier.csv", value_function_csv(ubar_from_barrier(initial_function(cfg, sys.grid), b)));
    std::cout << "aubry_nodes = " << a.nodes.size() << "\neventual_period = " << b.eventual_period << "\n";
    return kOk;
  });
}

int cmd_checks(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path out(cfg.output);
  write_text(out / "resolved.cfg", echo_config(cfg));
  return with_system(cfg, [&](const auto& sys) {
    maybe_dump(c, sys);
    const auto summary = run_checks(sys);
    const std::string text = checks_text(summary);
    write_text(out / "checks.txt", text);
    std::cout << text;
    return summary.all_pass() ? kOk : kChecksFailed;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak-KAM laboratory"};
  app.require_subcommand(1);
  Common common;
  auto* k = app.add_subcommand("kernel", "build kernels and report the critical value");
  auto* s = app.add_subcommand("semigroup", "convergence of the Lax-Oleinik iterates");
  auto* b = app.add_subcommand("barrier", "Peierls barrier and Aubry set");
  auto* c = app.add_subcommand("checks", "property suite");
  for (auto* cmd : {k, s, b, c}) add_common(cmd, common);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  try {
    if (k->parsed()) return cmd_kernel(common);
    if (s->parsed()) return cmd_semigroup(common);
    if (b->parsed()) return cmd_barrier(common);
    return cmd_checks(common);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}
