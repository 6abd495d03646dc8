// monoembed: certify global stability of mixed-monotone difference equations.
//
//   monoembed analyze [config] [flags]
//   monoembed iterate [config] --x0 a,b --steps n [--embedded]
//   monoembed cycles  [config] [flags]
//   monoembed sweep   [config] [flags]
//
// Flags override values loaded from the config file.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "monoembed/app/commands.hpp"

namespace me = monoembed;
namespace app = monoembed::app;

namespace {

struct Flags {
  std::string config;
  std::string model;
  std::vector<std::string> params;
  std::vector<std::string> exprs;
  std::string arity, pattern, region, tol, max_iter, samples, seed, out, format, jobs;
  std::string x0, steps, grid, starts;
  bool embedded = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("config", f.config, "INI or JSON config file");
  sub->add_option("--model", f.model, "ricker | rational | expr");
  sub->add_option("--param", f.params, "key=value; bare keys go to [model]")->take_all();
  sub->add_option("--expr", f.exprs, "map expression; repeat for a periodic system")->take_all();
  sub->add_option("--arity", f.arity, "number of arguments of an expression map");
  sub->add_option("--pattern", f.pattern, "sign pattern such as ++- or 'infer'");
  sub->add_option("--region", f.region, "scan and sampling interval lo,hi");
  sub->add_option("--grid", f.grid, "enumeration grid per axis");
  sub->add_option("--tol", f.tol, "squeeze tolerance");
  sub->add_option("--max-iter", f.max_iter, "squeeze iteration budget");
  sub->add_option("--samples", f.samples, "initial conditions to certify");
  sub->add_option("--seed", f.seed, "random seed (falls back to MONOEMBED_SEED)");
  sub->add_option("--starts", f.starts, "multistart count for cycle search");
  sub->add_option("--out", f.out, "output path (sweep: file prefix)");
  sub->add_option("--format", f.format, "csv | svg | json");
  sub->add_option("--jobs", f.jobs, "worker threads, 0 = all cores");
}

app::RunConfig build(const Flags& f) {
  app::Settings s;
  if (!f.config.empty()) app::load_file(f.config, s);
  auto put = [&](const std::string& key, const std::string& v) {
    if (!v.empty()) s.set(key, v, "command line");
  };
  put("model.name", f.model);
  for (const auto& p : f.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw app::ConfigError("--param", "expected key=value: " + p);
    std::string key = p.substr(0, eq);
    if (key.find('.') == std::string::npos) key = "model." + key;
    s.set(key, p.substr(eq + 1), "command line");
  }
  if (!f.exprs.empty()) {
    s.erase_prefix("model.expr");
    for (std::size_t i = 0; i < f.exprs.size(); ++i) {
      s.set("model.expr" + std::to_string(i), f.exprs[i], "command line");
    }
  }
  put("model.arity", f.arity);
  put("model.pattern", f.pattern);
  put("scan.region", f.region);
  put("scan.grid", f.grid);
  put("certify.tol", f.tol);
  put("certify.max_iter", f.max_iter);
  put("certify.samples", f.samples);
  put("certify.seed", f.seed);
  put("cycles.starts", f.starts);
  put("output.out", f.out);
  put("output.format", f.format);
  put("output.jobs", f.jobs);
  put("iterate.x0", f.x0);
  put("iterate.steps", f.steps);
  if (f.embedded) s.set("iterate.embedded", "true", "command line");
  return app::resolve(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Global stability certification for mixed-monotone difference equations"};
  cli.require_subcommand(1);
  Flags f;
  auto* analyze = cli.add_subcommand("analyze", "pattern check, fixed pairs and certification");
  auto* iterate = cli.add_subcommand("iterate", "orbit as CSV, optionally with squeeze envelopes");
  auto* cycles = cli.add_subcommand("cycles", "cycle search and periodic certification");
  auto* sweep = cli.add_subcommand("sweep", "two-parameter verdict sweep");
  for (auto* sub : {analyze, iterate, cycles, sweep}) add_common(sub, f);
  iterate->add_option("--x0", f.x0, "initial values x0,x_-1,...");
  iterate->add_option("--steps", f.steps, "number of rows");
  iterate->add_flag("--embedded", f.embedded, "add envelope coordinates");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : app::kExitUsage;
  }

  try {
    const app::RunConfig c = build(f);
    if (*analyze) return app::cmd_analyze(c, std::cout);
    if (*iterate) return app::cmd_iterate(c, std::cout, std::cerr);
    if (*cycles) return app::cmd_cycles(c, std::cout);
    return app::cmd_sweep(c, std::cout);
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return app::kExitUsage;
  } catch (const me::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitUsage;
  } catch (const me::UnsupportedModel& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitUsage;
  } catch (const me::EvaluationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitUsage;
  }
}
