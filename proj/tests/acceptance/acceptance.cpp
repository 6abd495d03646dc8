// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "monoembed/app/commands.hpp"

using namespace monoembed;
using namespace monoembed::app;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RationalModel rational_example(int i) {
  switch (i) {
    case 1: return RationalModel({1, 0, 0, 0}, {1, 1, 1, 1});
    case 2: return RationalModel({1, 3, 6, 1}, {1, 2, 4, 30});
    case 3: return RationalModel({1, 3, 6, 6}, {1, 2, 4, 4});
    case 4: return RationalModel({1, 3, 0, 0}, {1, 2, 4, 2});
    default: return RationalModel({1, 3, 0, 3}, {1, 2, 4, 2});
  }
}

PeriodicSystem two_periodic(double h0, double h1, bool squared) {
  const MonotonicityPattern tau{1, 1, -1};
  auto make = [&](double h) {
    return MapSpec(
        [h, squared](std::span<const double> x) {
          const double d = squared ? x[2] * x[2] : x[2];
          return 4.0 * x[0] / (1.0 + d) + h;
        },
        tau);
  };
  return PeriodicSystem({make(h0), make(h1)});
}

Outcome ac1() {
  Outcome o;
  const auto t0 = Clock::now();
  const RationalModel m = rational_example(2);
  const auto an = rational_analyze(m);
  o.require(an.y_bar == 1.0 / 3.0, "y_bar = " + fmt("%.17g", an.y_bar));
  o.require(an.A0 == 9 && an.B0 == 6 && an.A1 == 1 && an.B1 == 30 && an.A_hat == 7,
            "intermediate values differ");
  const auto en = enumerate_fixed_pairs(m.map_spec(*an.classification.pattern),
                                        Rectangle::square(0.0, 2.0), {});
  const auto pseudo = en.pseudo();
  o.require(pseudo.size() == 2, std::to_string(pseudo.size()) + " pseudo pairs");
  if (pseudo.size() == 2) {
    double err = 0.0;
    err = std::max({std::abs(pseudo[0].x - 1.0 / 12), std::abs(pseudo[0].y - 13.0 / 12),
                    std::abs(pseudo[1].x - 13.0 / 12), std::abs(pseudo[1].y - 1.0 / 12)});
    o.require(err <= 1e-9, "pseudo pair error " + fmt("%.3g", err));
    o.detail += "pseudo pair error " + fmt("%.2g", err);
  }
  const double dt = seconds_since(t0);
  o.require(dt < 1.0, "took " + fmt("%.3f", dt) + " s");
  o.detail += ", " + fmt("%.3f", dt) + " s";
  return o;
}

Outcome ac2() {
  Outcome o;
  const auto t0 = Clock::now();
  const MonotonicityPattern want[] = {{-1, -1, -1}, {1, 1, -1}, {1, 1, 1}, {1, -1, -1}, {1, -1, 1}};
  for (int i = 1; i <= 5; ++i) {
    const auto c = rational_classify(rational_example(i));
    o.require(c.ok() && *c.pattern == want[i - 1], "example " + std::to_string(i));
  }
  const double dt = seconds_since(t0);
  o.require(dt < 0.1, "took " + fmt("%.4f", dt) + " s");
  if (o.pass) o.detail = "5 of 5 patterns, " + fmt("%.4f", dt) + " s";
  return o;
}

Outcome ac3() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto found = find_cycles(two_periodic(1, 3, false), {0, 12}, {});
  const double dt = seconds_since(t0);
  o.require(found.count(CycleRecord::Kind::Genuine) == 1,
            std::to_string(found.count(CycleRecord::Kind::Genuine)) + " genuine cycles");
  const double hi = 3.0 + 4.0 * std::sqrt(6.0) / 3.0;
  const double lo = 2.0 + std::sqrt(6.0);
  for (const auto& c : found.cycles) {
    if (!c.genuine()) continue;
    const auto v = c.values();
    o.require(c.q == 2 && v.size() == 2, "genuine record is not a 2-cycle");
    if (v.size() != 2) continue;
    const double err = std::max(std::abs(std::max(v[0], v[1]) - hi), std::abs(std::min(v[0], v[1]) - lo));
    o.require(err <= 1e-9, "value error " + fmt("%.3g", err));
    o.detail += "value error " + fmt("%.2g", err);
  }
  o.require(dt < 5.0, "took " + fmt("%.2f", dt) + " s");
  o.detail += ", " + fmt("%.2f", dt) + " s";
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto t0 = Clock::now();
  CycleSearchOptions opt;
  opt.starts = 200;
  const auto found = find_cycles(two_periodic(1.8, 2.3, true), {0, 12}, opt);
  const double dt = seconds_since(t0);
  o.require(found.count(CycleRecord::Kind::Genuine) == 1, "genuine count");
  o.require(found.count(CycleRecord::Kind::Pseudo) == 2,
            std::to_string(found.count(CycleRecord::Kind::Pseudo)) + " pseudo cycles");
  // xi = (a1, a2, b1 | b1, b2, a1) and its transpose eta = (b1, b2, a1 | a1, a2, b1).
  const std::vector<double> xi{2.82, 2.24, 4.99, 4.99, 4.03, 2.82};
  const std::vector<double> eta{4.99, 4.03, 2.82, 2.82, 2.24, 4.99};
  bool saw_xi = false;
  bool saw_eta = false;
  for (const auto& c : found.cycles) {
    if (c.genuine()) {
      auto v = c.values();
      std::sort(v.begin(), v.end());
      o.require(v.size() == 2 && round2(v[1]) == 3.55 && round2(v[0]) == 2.84,
                "genuine cycle values");
      continue;
    }
    o.require(c.q == 2, "pseudo record is not a 2-cycle");
    for (const auto& p : c.points) {
      std::vector<double> r;
      for (double v : p.flat()) r.push_back(round2(v));
      saw_xi = saw_xi || r == xi;
      saw_eta = saw_eta || r == eta;
    }
  }
  o.require(saw_xi && saw_eta, "pseudo coordinates do not round to (a1, a2, b1, b2)");
  o.require(dt < 30.0, "took " + fmt("%.2f", dt) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("1 genuine, 2 pseudo, ") +
              fmt("%.2f", dt) + " s";
  return o;
}

Outcome ac5() {
  Outcome o;
  const auto small = ricker_thresholds(1e-8);
  o.require(std::abs(small.r0 - 2.0) <= 1e-9, "r0(1e-8) = " + fmt("%.17g", small.r0));
  o.require(std::abs(small.r1 - 1.0) <= 1e-9, "r1(1e-8) = " + fmt("%.17g", small.r1));
  const double r_inf = ricker_thresholds(1.0).r_inf;
  o.require(std::abs(r_inf - 0.65566) <= 1e-5, "r_inf(1) is not 0.65566 +- 1e-5");
  const double onset = ricker_pseudo_onset(1.0, 0.55, 0.8, 1e-6);
  const double dev = std::abs(onset - r_inf);
  o.require(dev <= 1e-3, "onset " + fmt("%.6f", onset));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("r_inf(1) = ") + fmt("%.7f", r_inf) +
              ", onset " + fmt("%.6f", onset) + " (deviation " + fmt("%.2g", dev) + ")";
  return o;
}

Outcome ac6() {
  Outcome o;
  double k0 = 0.0, k1 = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double h = 0.1 + (5.0 - 0.1) * i / 19.0;
    const auto th = ricker_thresholds(h);
    const auto b0 = ricker_local_boundary(h, 0).r;
    const auto b1 = ricker_local_boundary(h, 1).r;
    if (!b0 || !b1) {
      o.require(false, "no boundary at h = " + fmt("%.3f", h));
      continue;
    }
    k0 = std::max(k0, std::abs(*b0 - th.r0));
    k1 = std::max(k1, std::abs(*b1 - th.r1));
  }
  o.require(k0 <= 1e-6, "k=0 deviation " + fmt("%.3g", k0));
  o.require(k1 <= 1e-6, "k=1 deviation " + fmt("%.3g", k1));

  double m_res = 0.0, printed_res = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double h = 0.1 + (5.0 - 0.1) * i / 19.0;
    const auto b2 = ricker_local_boundary(h, 2).r;
    if (!b2) {
      o.require(false, "no delay-2 boundary at h = " + fmt("%.3f", h));
      continue;
    }
    const double x = ricker_equilibrium(*b2, h);
    m_res = std::max(m_res, std::abs(ricker_delay2_condition(x, h)));
    printed_res =
        std::max(printed_res, std::abs(x * (x - h + 1) * (x - h - 1) - (x - h) * (x - h)));
  }
  o.require(m_res <= 1e-6, "delay-2 residual " + fmt("%.3g", m_res));

  const auto dir = std::filesystem::temp_directory_path() / "monoembed_ac6";
  std::filesystem::create_directories(dir);
  Settings s;
  s.set("model.name", "ricker", "acceptance");
  s.set("model.delay", "1", "acceptance");
  RunConfig c = resolve(s);
  c.sweep.p1 = {"h", 0.1, 5.0, 50};
  c.sweep.p2 = {"r", 0.1, 4.0, 50};
  c.sweep.analysis = "pseudo";
  c.out = (dir / "onset").string();
  const auto t0 = Clock::now();
  std::ostringstream sink;
  cmd_sweep(c, sink);
  const double dt = seconds_since(t0);
  o.require(dt < 120.0, "sweep took " + fmt("%.1f", dt) + " s");
  const std::string svg = slurp(dir / "onset.svg");
  o.require(svg.rfind("<?xml", 0) == 0 && svg.find("</svg>") != std::string::npos, "SVG malformed");

  // Lowest none-to-found transition of each h column against r_inf(h).
  std::map<double, std::vector<std::pair<double, int>>> columns;
  std::istringstream cells(slurp(dir / "onset_cells.csv"));
  std::string line;
  std::getline(cells, line);
  while (std::getline(cells, line)) {
    double h, r;
    int v;
    if (std::sscanf(line.c_str(), "%lf,%lf,%d", &h, &r, &v) == 3) columns[h].emplace_back(r, v);
  }
  const double cell = (4.0 - 0.1) / 49.0;
  std::size_t checked = 0;
  double worst = 0.0;
  for (auto& [h, col] : columns) {
    const double r_inf = ricker_thresholds(h).r_inf;
    for (const auto& [r, v] : col) o.require(v >= 0, "failed cell at h = " + fmt("%.3f", h));
    if (r_inf < 0.1 + cell) continue;  // onset below the sweep's first row
    std::optional<double> onset;
    for (std::size_t j = 0; j + 1 < col.size() && !onset; ++j) {
      if (col[j].second == 0 && col[j + 1].second == 2) onset = 0.5 * (col[j].first + col[j + 1].first);
    }
    ++checked;
    if (!onset) {
      o.require(false, "no onset at h = " + fmt("%.3f", h));
      continue;
    }
    worst = std::max(worst, std::abs(*onset - r_inf));
  }
  o.require(worst <= cell, "onset deviation " + fmt("%.3g", worst));
  o.require(checked >= 40, std::to_string(checked) + " columns checked");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("k=0 ") + fmt("%.2g", k0) + ", k=1 " +
              fmt("%.2g", k1) + ", m(x) residual " + fmt("%.2g", m_res) +
              " (x(x-h+1)(x-h-1) - (x-h)^2 gives " + fmt("%.3g", printed_res) + "), sweep " + fmt("%.1f", dt) +
              " s, onset within " + fmt("%.3g", worst) + " over " + std::to_string(checked) +
              " columns";
  return o;
}

Outcome ac7() {
  Outcome o;
  const double x_bar = ricker_equilibrium(0.5, 1.0);
  std::size_t violations = 0, converged = 0, total = 0;
  double worst = 0.0;
  for (std::size_t k : {1, 2, 5}) {
    const MapSpec f = RickerModel(0.5, 1.0, k).map_spec();
    const Interval range = ricker_scan_region(RickerModel(0.5, 1.0, k)).x;
    std::mt19937_64 rng(42 + k);
    for (int s = 0; s < 100; ++s) {
      ++total;
      Point x = sample_log_uniform(k + 1, range, rng);
      std::optional<TrappingBox> box;
      for (std::size_t step = 0; step <= 4096 && !(box = find_trapping_box(f, x)); ++step) {
        x = vector_map_T(f, x);
      }
      if (!box) {
        o.require(false, "no trapping box, k = " + std::to_string(k));
        continue;
      }
      try {
        const auto rep = squeeze_iterate(f, *box, x, {});
        if (!rep.converged()) continue;
        ++converged;
        for (double v : rep.point) worst = std::max(worst, std::abs(v - x_bar));
      } catch (const InvariantViolation&) {
        ++violations;
      }
    }
  }
  o.require(converged == total, std::to_string(converged) + " of " + std::to_string(total) +
                                    " converged");
  o.require(worst <= 1e-8, "deviation " + fmt("%.3g", worst));
  o.require(violations == 0, std::to_string(violations) + " invariant violations");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(converged) + "/" +
              std::to_string(total) + " converged to " + fmt("%.10f", x_bar) + ", deviation " +
              fmt("%.2g", worst) + ", " + std::to_string(violations) + " violations";
  return o;
}

Outcome ac8() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::vector<MapSpec> maps;
  for (int i = 1; i <= 5; ++i) {
    const auto m = rational_example(i);
    maps.push_back(m.map_spec(*rational_classify(m).pattern));
  }
  maps.push_back(RickerModel(0.5, 1.0, 1).map_spec());
  maps.push_back(RickerModel(0.8, 1.0, 2).map_spec());
  maps.push_back(RickerModel(2.0, 0.5, 5).map_spec());

  std::size_t order_violations = 0, diagonal_mismatch = 0, pairs = 0;
  for (const auto& f : maps) {
    const DiagonalExtension g(f);
    const MonotonicityPattern& tau = f.pattern();
    const MonotonicityPattern lam = tau.doubled();
    for (int t = 0; t < 10'000; ++t) {
      const auto [a, b] = sample_ordered_pair(lam, {0, 8}, rng);
      const PairedPoint xi = PairedPoint::from_flat(a);
      const PairedPoint eta = PairedPoint::from_flat(b);
      ++pairs;
      if (!leq_lambda(g(xi), g(eta), tau)) ++order_violations;
      const PairedPoint d = PairedPoint::diagonal(xi.first);
      const Point tx = vector_map_T(f, xi.first);
      const PairedPoint gd = g(d);
      if (gd.first != tx || gd.second != tx) ++diagonal_mismatch;
    }
  }
  o.require(order_violations == 0, std::to_string(order_violations) + " order violations");
  o.require(diagonal_mismatch == 0, std::to_string(diagonal_mismatch) + " diagonal mismatches");

  std::size_t duality = 0, transitivity = 0;
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<int> sign(0, 1);
  for (int t = 0; t < 10'000; ++t) {
    std::vector<int> signs(4);
    for (int& sg : signs) sg = sign(rng) ? 1 : -1;
    const MonotonicityPattern tau(signs);
    Point x(4), y(4), z(4);
    for (auto* p : {&x, &y, &z}) {
      for (double& v : *p) v = std::round(u(rng));  // integers make ties and chains common
    }
    if (leq_tau(x, y, tau) != leq_tau(y, x, tau.dual())) ++duality;
    if (leq_tau(x, y, tau) && leq_tau(y, z, tau) && !leq_tau(x, z, tau)) ++transitivity;
    const auto [a, b] = sample_ordered_pair(tau, {-5, 5}, rng);
    const auto c = sample_ordered_pair(tau, {-5, 5}, rng).second;
    if (leq_tau(b, c, tau) && !leq_tau(a, c, tau)) ++transitivity;
  }
  o.require(duality == 0, "duality failures");
  o.require(transitivity == 0, "transitivity failures");

  std::size_t antisym = 0;
  for (int i = 1; i <= 5; ++i) {
    const auto m = rational_example(i);
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        if (m.D(a, b) != -m.D(b, a)) ++antisym;
      }
    }
  }
  std::uniform_real_distribution<double> coef(0.0, 10.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(5), b(5);
    for (std::size_t j = 0; j < 5; ++j) {
      a[j] = coef(rng);
      b[j] = coef(rng);
    }
    a[0] = b[0] = 1.0;
    const RationalModel m(a, b);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        if (m.D(i, j) != -m.D(j, i)) ++antisym;
      }
    }
  }
  o.require(antisym == 0, "D antisymmetry failures");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(pairs) + " ordered pairs over " +
              std::to_string(maps.size()) + " maps, 0 order violations, diagonal exact";
  return o;
}

Outcome ac9() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "monoembed_ac9";
  std::filesystem::create_directories(dir);
  Settings s;
  s.set("model.name", "ricker", "acceptance");
  s.set("model.delay", "2", "acceptance");
  s.set("certify.samples", "10", "acceptance");
  RunConfig c = resolve(s);
  c.x0 = {1.0, 2.0, 3.0};
  c.steps = 100;
  c.embedded = true;
  c.sweep.p1 = {"h", 0.5, 2.0, 4};
  c.sweep.p2 = {"r", 0.2, 1.2, 5};
  c.sweep.analysis = "certify";
  std::ostringstream sink, err;
  std::string first_iter, first_sweep;
  for (int run = 0; run < 2; ++run) {
    RunConfig it = c;
    it.out = (dir / ("iterate" + std::to_string(run) + ".csv")).string();
    o.require(cmd_iterate(it, sink, err) == 0, "iterate failed");
    RunConfig sw = c;
    sw.out = (dir / ("sweep" + std::to_string(run))).string();
    cmd_sweep(sw, sink);
  }
  const std::string i0 = slurp(dir / "iterate0.csv");
  const std::string i1 = slurp(dir / "iterate1.csv");
  const std::string s0 = slurp(dir / "sweep0_cells.csv");
  const std::string s1 = slurp(dir / "sweep1_cells.csv");
  const std::string b0 = slurp(dir / "sweep0_boundary.csv");
  const std::string b1 = slurp(dir / "sweep1_boundary.csv");
  o.require(!i0.empty() && i0 == i1, "iterate CSV differs");
  o.require(!s0.empty() && s0 == s1, "sweep cells CSV differs");
  o.require(b0 == b1, "sweep boundary CSV differs");
  if (o.pass) {
    o.detail = "iterate " + std::to_string(i0.size()) + " bytes, sweep " +
               std::to_string(s0.size()) + " bytes, identical";
  }
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
