#pragma once

// analyze / iterate / cycles / sweep. Each returns the process exit code:
// 0 certified (or success), 2 pseudo pairs or cycles found, 3 inconclusive,
// 1 usage or configuration error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoembed/app/config.hpp"
#include "monoembed/app/output.hpp"
#include "monoembed/dynamics.hpp"
#include "monoembed/exprmap.hpp"
#include "monoembed/models/rational.hpp"
#include "monoembed/models/ricker.hpp"
#include "monoembed/parallel.hpp"
#include "monoembed/periodic.hpp"

namespace monoembed::app {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPseudo = 2;
constexpr int kExitInconclusive = 3;

inline int exit_code(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Certified: return kExitOk;
    case Verdict::Kind::PseudoPairsFound:
    case Verdict::Kind::PseudoCyclesFound: return kExitPseudo;
    case Verdict::Kind::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

inline CertifyConfig certify_config(const RunConfig& c) {
  CertifyConfig cfg;
  cfg.enumeration.grid = c.grid;
  cfg.squeeze.tol = c.tol;
  cfg.squeeze.max_iter = c.max_iter;
  cfg.pattern_samples = c.pattern_samples;
  cfg.seed = c.seed;
  cfg.agreement_tol = c.agreement_tol;
  cfg.jobs = c.jobs;
  cfg.warmup_max = c.warmup_max;
  return cfg;
}

/// A single map built from the configuration, with its pattern provenance.
struct BuiltMap {
  MapSpec f;
  std::string pattern_source;
  std::vector<std::size_t> constant_arguments;
};

inline BuiltMap build_map(const RunConfig& c) {
  if (c.model == "ricker") {
    try {
      return {RickerModel(c.r, c.h, c.delay).map_spec(), "builtin", {}};
    } catch (const InvalidArgument& e) {
      throw ConfigError("model", e.what());
    }
  }
  if (c.model == "rational") {
    try {
      const RationalModel m(c.a, c.b);
      const auto cl = rational_classify(m);
      if (!cl.ok()) {
        throw ConfigError("model", "argument x" + std::to_string(cl.witness->argument) +
                                       " is not monotone (mixed D signs)");
      }
      return {m.map_spec(*cl.pattern), "builtin", cl.constant_rows};
    } catch (const InvalidArgument& e) {
      throw ConfigError("model", e.what());
    }
  }
  const auto es = parse_exprs(c);
  if (es.size() != 1) throw ConfigError("model.expr", "expected a single expression");
  const auto pat = resolve_pattern(c, es);
  return {expression_map(es.front(), pat.tau), pat.source, pat.constant_arguments};
}

struct BuiltSystem {
  PeriodicSystem system;
  std::string pattern_source;
};

inline BuiltSystem build_system(const RunConfig& c) {
  const auto es = parse_exprs(c);
  const auto pat = resolve_pattern(c, es);
  std::vector<MapSpec> maps;
  for (const auto& e : es) maps.push_back(expression_map(e, pat.tau));
  return {PeriodicSystem(std::move(maps)), pat.source};
}

inline Rectangle scan_rectangle(const RunConfig& c) {
  const Interval iv = sampling_region(c);
  return {iv, iv};
}

inline ordered_json pair_json(const FixedPair& p) {
  return {{"x", p.x},
          {"y", p.y},
          {"kind", p.genuine() ? "genuine" : "pseudo"},
          {"residual", p.residual_norm}};
}

inline ordered_json verdict_json(const Verdict& v) {
  ordered_json j;
  j["kind"] = std::string(to_string(v.kind));
  j["label"] = Verdict::kLabel;
  j["exit_code"] = exit_code(v.kind);
  j["attractor"] = v.attractor ? ordered_json(*v.attractor) : ordered_json(nullptr);
  j["cycle"] = v.cycle;
  j["stage"] = v.stage;
  j["reason"] = v.reason;
  j["samples"] = v.samples;
  j["samples_converged"] = v.samples_converged;
  j["max_deviation"] = v.max_deviation;
  j["max_iterations"] = v.max_iterations;
  j["pattern_violations"] = v.pattern_violations;
  return j;
}

inline ordered_json tolerances_json(const RunConfig& c, std::size_t k) {
  const CertifyConfig cfg = certify_config(c);
  return {{"squeeze_tol", c.tol},
          {"max_iter", cfg.squeeze.budget_for(k)},
          {"agreement_tol", c.agreement_tol},
          {"root_tol", cfg.enumeration.newton.residual_tol},
          {"dedup_tol", cfg.enumeration.dedup_tol},
          {"symmetry_tol", cfg.enumeration.symmetry_tol},
          {"warmup_max", c.warmup_max}};
}

inline void print_verdict(std::ostream& os, const Verdict& v) {
  os << "verdict: " << to_string(v.kind) << " (" << Verdict::kLabel << ")\n";
  if (v.attractor) os << "attractor: " << num(*v.attractor) << '\n';
  if (!v.cycle.empty()) {
    os << "cycle:";
    for (double x : v.cycle) os << ' ' << num(x);
    os << '\n';
  }
  if (!v.stage.empty()) os << "stage: " << v.stage << '\n';
  if (!v.reason.empty()) os << "reason: " << v.reason << '\n';
  if (v.samples) {
    os << "samples converged: " << v.samples_converged << " of " << v.samples
       << ", max deviation " << num(v.max_deviation) << '\n';
  }
}

inline void write_report(const RunConfig& c, const ordered_json& report,
                         const std::vector<FixedPair>& pairs) {
  if (c.out.empty()) return;
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ConfigError("output.out", "cannot write " + c.out);
  if (c.format == "csv") {
    f << "x,y,kind,residual\n";
    for (const auto& p : pairs) {
      f << num(p.x) << ',' << num(p.y) << ',' << (p.genuine() ? "genuine" : "pseudo") << ','
        << num(p.residual_norm) << '\n';
    }
  } else if (c.format == "json") {
    f << report.dump(2) << '\n';
  } else {
    throw ConfigError("output.format", "analyze writes json or csv");
  }
}

inline int cmd_cycles(const RunConfig& c, std::ostream& os);

inline int cmd_analyze(const RunConfig& c, std::ostream& os) {
  if (c.periodic()) return cmd_cycles(c, os);
  const BuiltMap built = build_map(c);
  const MapSpec& f = built.f;
  const CertifyConfig cfg = certify_config(c);
  const Rectangle region = scan_rectangle(c);

  ordered_json report;
  report["tool"] = "monoembed";
  report["command"] = "analyze";
  report["model"] = {{"name", c.model}, {"arity", f.arity()}};
  report["pattern"] = {{"signs", f.pattern().to_string()}, {"source", built.pattern_source}};
  report["embedding"] = DiagonalExtension(f).describe();

  const auto check = verify_pattern(f, c.pattern_samples, c.seed, region.x);
  report["pattern"]["verified_samples"] = check.samples;
  report["pattern"]["violations"] = check.violations.size();
  os << "model: " << c.model << " (arity " << f.arity() << ")\n";
  os << "pattern: " << f.pattern().to_string() << " [" << built.pattern_source << "], "
     << check.violations.size() << " violations in " << check.samples << " sampled pairs\n";
  os << "embedding: G = " << DiagonalExtension(f).describe() << '\n';

  Verdict v;
  if (c.model == "ricker") {
    const RickerModel m(c.r, c.h, c.delay);
    const auto th = ricker_thresholds(c.h);
    const auto lb = ricker_local_boundary(c.h, c.delay);
    report["model"]["parameters"] = {{"r", c.r}, {"h", c.h}, {"delay", c.delay}};
    report["ricker"] = {{"equilibrium", ricker_equilibrium(m)},
                        {"r0", th.r0},
                        {"r1", th.r1},
                        {"r_inf", th.r_inf},
                        {"local_boundary", lb.r ? ordered_json(*lb.r) : ordered_json(nullptr)}};
    os << "equilibrium: " << num(ricker_equilibrium(m)) << "; r_inf(h) = " << num(th.r_inf)
       << ", r1(h) = " << num(th.r1) << ", r0(h) = " << num(th.r0) << '\n';
    v = ricker_certify(m, c.samples, cfg, region);
  } else if (c.model == "rational") {
    const RationalModel m(c.a, c.b);
    const auto an = rational_analyze(m);
    report["model"]["parameters"] = {{"a", c.a}, {"b", c.b}};
    ordered_json rj = {{"equilibrium", an.y_bar},
                       {"case", std::string(to_string(an.kind))},
                       {"A0", an.A0},
                       {"B0", an.B0},
                       {"A1", an.A1},
                       {"B1", an.B1}};
    if (an.kind != RationalAnalysis::Case::SingleMonotone) {
      rj["A_hat"] = an.A_hat;
      rj["B_tilde"] = an.B_tilde;
      rj["beta"] = an.beta;
      rj["B_star"] = std::isfinite(an.B_star) ? ordered_json(an.B_star) : ordered_json(nullptr);
      rj["Delta"] = an.Delta;
    }
    const auto facts = rational_simple_facts(an);
    if (facts.skipped) {
      rj["simple_facts"] = {{"skipped", true}, {"note", facts.note}};
    } else {
      rj["simple_facts"] = {{"ratios_ordered", facts.ratios_ordered},
                            {"delta_nonnegative", facts.delta_nonnegative},
                            {"coefficient_bounds", facts.coefficient_bounds},
                            {"equilibrium_above", facts.equilibrium_above}};
    }
    if (an.pseudo_pair) rj["closed_form_pseudo_pair"] = {an.pseudo_pair->first, an.pseudo_pair->second};
    report["rational"] = rj;
    os << "equilibrium: " << num(an.y_bar) << "; case " << to_string(an.kind) << '\n';
    if (an.pseudo_pair) {
      os << "closed-form pseudo pair: " << num(an.pseudo_pair->first) << ", "
         << num(an.pseudo_pair->second) << '\n';
    }
    v = region.x.lo == 0.0 ? rational_certify(m, c.samples, cfg, region.x.hi)
                           : certify_global_attractor(f, region, c.samples, cfg);
  } else {
    report["model"]["expr"] = c.exprs.front();
    v = certify_global_attractor(f, region, c.samples, cfg);
  }
  if (check.violations.size() && v.kind != Verdict::Kind::Inconclusive) {
    v.kind = Verdict::Kind::Inconclusive;
    v.stage = "pattern";
    v.reason = "declared pattern fails sampled verification";
  }

  report["scan_region"] = {{"x", {region.x.lo, region.x.hi}},
                           {"y", {region.y.lo, region.y.hi}},
                           {"grid", c.grid}};
  report["seed"] = c.seed;
  report["tolerances"] = tolerances_json(c, f.arity());
  ordered_json pairs = ordered_json::array();
  for (const auto& p : v.fixed_pairs) pairs.push_back(pair_json(p));
  report["fixed_pairs"] = pairs;
  ordered_json pseudo = ordered_json::array();
  for (const auto& p : v.pseudo_pairs) pseudo.push_back(pair_json(p));
  report["pseudo_pairs"] = pseudo;
  report["verdict"] = verdict_json(v);

  for (const auto& p : v.fixed_pairs) {
    os << (p.genuine() ? "fixed pair (genuine): " : "fixed pair (pseudo):  ") << num(p.x) << ", "
       << num(p.y) << '\n';
  }
  print_verdict(os, v);
  write_report(c, report, v.fixed_pairs);
  return exit_code(v.kind);
}

inline int cmd_cycles(const RunConfig& c, std::ostream& os) {
  if (!c.periodic()) return cmd_analyze(RunConfig(c), os);
  const BuiltSystem built = build_system(c);
  const PeriodicSystem& s = built.system;
  const Interval region = sampling_region(c);
  PeriodicCertifyConfig pcfg;
  pcfg.base = certify_config(c);
  pcfg.cycles.starts = c.starts;
  pcfg.cycles.seed = c.seed;

  const auto found = find_cycles(s, region, pcfg.cycles);
  const Verdict v = certify_periodic_attractor(s, region, c.samples, pcfg, &found);

  os << "periodic system: p = " << s.period() << ", arity " << s.arity() << ", pattern "
     << s.pattern().to_string() << " [" << built.pattern_source << "]\n";
  ordered_json cycles = ordered_json::array();
  for (std::size_t i = 0; i < found.cycles.size(); ++i) {
    const auto& cy = found.cycles[i];
    ordered_json pts = ordered_json::array();
    for (const auto& p : cy.points) pts.push_back(p.flat());
    cycles.push_back({{"q", cy.q},
                      {"kind", cy.genuine() ? "genuine" : "pseudo"},
                      {"values", cy.values()},
                      {"points", pts},
                      {"residual", cy.residual},
                      {"twin", cy.twin ? ordered_json(*cy.twin) : ordered_json(nullptr)}});
    os << "cycle " << i << " (" << (cy.genuine() ? "genuine" : "pseudo") << ", q = " << cy.q
       << "):";
    for (const auto& p : cy.points) {
      os << " (";
      const Point flat = p.flat();
      for (std::size_t j = 0; j < flat.size(); ++j) os << (j ? ", " : "") << num(flat[j]);
      os << ')';
    }
    os << "  residual " << num(cy.residual) << '\n';
  }
  print_verdict(os, v);

  ordered_json report;
  report["tool"] = "monoembed";
  report["command"] = "cycles";
  report["model"] = {{"name", "expr"}, {"arity", s.arity()}, {"period", s.period()}, {"expr", c.exprs}};
  report["pattern"] = {{"signs", s.pattern().to_string()}, {"source", built.pattern_source}};
  report["region"] = {region.lo, region.hi};
  report["starts"] = c.starts;
  report["seed"] = c.seed;
  report["search"] = {{"attempts", found.attempts}, {"failed", found.failed}};
  report["cycles"] = cycles;
  report["tolerances"] = tolerances_json(c, s.arity());
  report["verdict"] = verdict_json(v);
  write_report(c, report, {});
  return exit_code(v.kind);
}

/// Scalar orbit as CSV `n,x`; with `embedded`, also the 2k coordinates of both
/// squeeze envelopes G^n(P) and G^n(Q).
inline int cmd_iterate(const RunConfig& c, std::ostream& os, std::ostream& err) {
  std::optional<BuiltMap> single;
  std::optional<BuiltSystem> sys;
  if (c.periodic()) {
    sys = build_system(c);
  } else {
    single = build_map(c);
  }
  const std::size_t k = single ? single->f.arity() : sys->system.arity();
  if (c.x0.size() != k) {
    throw ConfigError("iterate.x0", "expected " + std::to_string(k) + " initial values");
  }
  std::unique_ptr<std::ofstream> file;
  if (!c.out.empty()) {
    file = std::make_unique<std::ofstream>(c.out, std::ios::binary);
    if (!*file) throw ConfigError("output.out", "cannot write " + c.out);
  }
  std::ostream& out = file ? *file : os;

  std::optional<TrappingBox> box;
  if (c.embedded) {
    if (!single) throw ConfigError("iterate.embedded", "only for single maps");
    BoxSearchConfig bc;
    box = find_trapping_box(single->f, c.x0, bc);
    if (!box) {
      err << "error: no corner trapping box contains (X0, X0)\n";
      return kExitUsage;
    }
  }
  out << "n,x";
  if (box) {
    for (std::size_t i = 1; i <= 2 * k; ++i) out << ",p" << i;
    for (std::size_t i = 1; i <= 2 * k; ++i) out << ",q" << i;
  }
  out << '\n';

  Point x = c.x0;
  PairedPoint lo = box ? box->lower() : PairedPoint{};
  PairedPoint hi = box ? box->upper() : PairedPoint{};
  std::optional<DiagonalExtension> g;
  if (single) g.emplace(single->f);
  std::size_t good = 0;
  try {
    for (std::size_t n = 1; n <= c.steps; ++n) {
      x = vector_map_T(single ? single->f : sys->system.map(n - 1), x);
      std::vector<double> row{static_cast<double>(n), x[0]};
      if (box) {
        lo = (*g)(lo);
        hi = (*g)(hi);
        for (double v : lo.flat()) row.push_back(v);
        for (double v : hi.flat()) row.push_back(v);
      }
      out << n;
      for (std::size_t i = 1; i < row.size(); ++i) out << ',' << num(row[i]);
      out << '\n';
      ++good;
    }
  } catch (const EvaluationError& e) {
    out.flush();
    err << "error: " << e.what() << " at step " << good + 1 << " after " << good
        << " good rows\n";
    return kExitUsage;
  }
  return kExitOk;
}

struct SweepResult {
  SweepConfig axes;
  std::vector<int> verdicts;  // p1-major: index i * p2.steps + j
  std::vector<std::pair<double, double>> boundary;

  int at(std::size_t i, std::size_t j) const { return verdicts[i * axes.p2.steps + j]; }
};

/// Verdict code of one cell: pseudo analysis 0 none / 2 found; certify analysis
/// the exit code; local analysis 0 stable / 1 unstable; -1 when the cell failed.
inline int sweep_cell(const RunConfig& c) {
  try {
    if (c.sweep.analysis == "local") {
      if (c.model != "ricker") throw ConfigError("sweep.analysis", "local needs the ricker model");
      return ricker_spectral_radius(c.r, c.h, c.delay) >= 1.0 ? 1 : 0;
    }
    if (c.sweep.analysis == "pseudo") {
      const BuiltMap built = build_map(c);
      EnumerationOptions opt;
      opt.grid = c.grid;
      return enumerate_fixed_pairs(built.f, scan_rectangle(c), opt).pseudo().empty() ? 0
                                                                                     : kExitPseudo;
    }
    std::ostringstream sink;
    RunConfig quiet = c;
    quiet.out.clear();
    quiet.jobs = 1;
    return cmd_analyze(quiet, sink);
  } catch (const std::exception&) {
    return -1;
  }
}

inline SweepResult run_sweep(const RunConfig& c) {
  SweepResult res;
  res.axes = c.sweep;
  const auto& a1 = c.sweep.p1;
  const auto& a2 = c.sweep.p2;
  // Reject unknown parameter names before fanning out.
  {
    RunConfig probe = c;
    set_param(probe, a1.param, a1.value(0));
    set_param(probe, a2.param, a2.value(0));
  }
  res.verdicts.assign(a1.steps * a2.steps, -1);
  parallel_for(res.verdicts.size(), c.jobs, [&](std::size_t idx) {
    RunConfig cell = c;
    const std::size_t i = idx / a2.steps;
    const std::size_t j = idx % a2.steps;
    set_param(cell, a1.param, a1.value(i));
    set_param(cell, a2.param, a2.value(j));
    res.verdicts[idx] = sweep_cell(cell);
  });
  for (std::size_t i = 0; i < a1.steps; ++i) {
    for (std::size_t j = 0; j + 1 < a2.steps; ++j) {
      if (res.at(i, j) != res.at(i, j + 1)) {
        res.boundary.emplace_back(a1.value(i), 0.5 * (a2.value(j) + a2.value(j + 1)));
      }
    }
  }
  return res;
}

inline void write_cells_csv(std::ostream& os, const SweepResult& r) {
  os << "p1,p2,verdict\n";
  for (std::size_t i = 0; i < r.axes.p1.steps; ++i) {
    for (std::size_t j = 0; j < r.axes.p2.steps; ++j) {
      os << num(r.axes.p1.value(i)) << ',' << num(r.axes.p2.value(j)) << ',' << r.at(i, j) << '\n';
    }
  }
}

inline void write_boundary_csv(std::ostream& os, const SweepResult& r) {
  os << "p1,p2\n";
  for (const auto& [x, y] : r.boundary) os << num(x) << ',' << num(y) << '\n';
}

/// Boundary markers plus, for the Ricker (h, r) plane, the closed-form threshold
/// curves and the numerical local-stability boundaries for delays 2 and 3.
inline void write_sweep_svg(std::ostream& os, const RunConfig& c, const SweepResult& r) {
  const auto& a1 = r.axes.p1;
  const auto& a2 = r.axes.p2;
  std::vector<Polyline> lines;
  if (c.model == "ricker" && a1.param == "h" && a2.param == "r") {
    Polyline r0{"r0(h)", "#d62728", {}, true};
    Polyline r1{"r1(h)", "#ff7f0e", {}, true};
    Polyline rinf{"r_inf(h)", "#2ca02c", {}, true};
    Polyline k2{"delay 2 local", "#9467bd", {}};
    Polyline k3{"delay 3 local", "#8c564b", {}};
    const std::size_t n = 60;
    for (std::size_t i = 0; i <= n; ++i) {
      const double h = a1.lo + (a1.hi - a1.lo) * static_cast<double>(i) / n;
      const auto th = ricker_thresholds(h);
      r0.points.emplace_back(h, th.r0);
      r1.points.emplace_back(h, th.r1);
      rinf.points.emplace_back(h, th.r_inf);
      if (const auto b = ricker_local_boundary(h, 2).r) k2.points.emplace_back(h, *b);
      if (const auto b = ricker_local_boundary(h, 3).r) k3.points.emplace_back(h, *b);
    }
    lines = {r0, r1, k2, k3, rinf};
  }
  Polyline computed{"computed boundary", "#1f77b4", r.boundary};
  computed.markers = true;
  lines.push_back(computed);
  write_svg_chart(os, "Verdict regions (" + c.sweep.analysis + " analysis)", a1.param, a2.param,
                  a1.lo, a1.hi, a2.lo, a2.hi, lines);
}

inline int cmd_sweep(const RunConfig& c, std::ostream& os) {
  const SweepResult r = run_sweep(c);
  const std::string prefix = c.out.empty() ? "sweep" : c.out;
  auto open = [&](const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("output.out", "cannot write " + path);
    return f;
  };
  {
    auto f = open(prefix + "_cells.csv");
    write_cells_csv(f, r);
  }
  {
    auto f = open(prefix + "_boundary.csv");
    write_boundary_csv(f, r);
  }
  {
    auto f = open(prefix + ".svg");
    write_sweep_svg(f, c, r);
  }
  std::size_t failed = 0;
  for (int v : r.verdicts) failed += v == -1;
  os << "sweep: " << r.verdicts.size() << " cells (" << failed << " failed), "
     << r.boundary.size() << " boundary points\n";
  os << "wrote " << prefix << "_cells.csv, " << prefix << "_boundary.csv, " << prefix << ".svg\n";
  return kExitOk;
}

}  // namespace monoembed::app
