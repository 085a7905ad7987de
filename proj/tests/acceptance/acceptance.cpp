// Acceptance runs. `lqc_acceptance --criterion K` runs one criterion and
// prints a single PASS/FAIL line; without --criterion every one runs in turn.
// Each criterion also leaves a manifest under $LQC_OUTPUT_ROOT/acceptance
// (default ./acceptance_runs).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "lqc/lqc.hpp"

#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace lqc;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  json data = json::object();
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path output_dir(int k) {
  const char *root = std::getenv("LQC_OUTPUT_ROOT");
  const fs::path dir = fs::path(root ? root : "acceptance_runs") / ("A" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

SolverSettings tight(double tol_ry) {
  SolverSettings s;
  s.tol = tol_ry;
  return s;
}

double hydrogen_ground(std::size_t n, double ratio, double tol_ry = 1e-8) {
  return hydrogen_scan(n, {ratio}, 1, tight(tol_ry)).rows.front().energy_ry;
}

// ------------------------------------------------------------------ 1

Outcome hydrogen_accuracy() {
  Outcome o;
  double best = 0.0, best_ratio = 0.0, best_dev = INFINITY;
  for (double ratio = 1.5; ratio <= 4.5 + 1e-9; ratio += 0.5) {
    const double e = hydrogen_ground(100, ratio);
    o.data["energies"].push_back({{"ratio", ratio}, {"energy_ry", e}});
    if (std::abs(e + 1.0) < best_dev) {
      best_dev = std::abs(e + 1.0);
      best = e;
      best_ratio = ratio;
    }
  }
  o.pass = best_dev <= 0.003;
  o.detail = fmt("N=100 best E0 = %.5f Ry at t_F/V0 = %.1f, deviation %.3f%% (tol 0.3%%)", best, best_ratio,
                 100.0 * best_dev);
  return o;
}

// ------------------------------------------------------------------ 2

Outcome discretization_scaling() {
  Outcome o;
  std::vector<DepartureRow> rows;
  std::vector<ScanRow> scan80;
  for (int i = 0; i <= 10; ++i) {
    const double ratio = 1.5 + 0.25 * i;
    DepartureRow r;
    r.d_lattice = i;
    r.ratio = ratio;
    r.e_small = hydrogen_ground(80, ratio);
    r.e_large = hydrogen_ground(100, ratio);
    rows.push_back(r);
    scan80.push_back({ratio, 0, r.e_small, 0.0});
    o.data["energies"].push_back({{"ratio", ratio}, {"e80", r.e_small}, {"e100", r.e_large}});
  }
  CriticalOptions opt;
  opt.min_ratio = 1.5;
  const auto crit = critical_ratio_from_rows(1.0, rows, false, opt);
  const double hi = std::isfinite(crit.critical_ratio) ? crit.critical_ratio : 4.0;
  const auto fit = fit_error_exponent(scan80, -1.0, 1.5 - 1e-9, std::min(4.0, hi) + 1e-9);
  o.data["window_upper"] = hi;
  o.data["exponent"] = fit.exponent;
  o.pass = std::abs(fit.exponent + 2.0) <= 0.2;
  o.detail = fmt("N=80 exponent %.3f over t_F/V0 in [1.5, %.2f] (%zu points; upper edge from the N=80/100 "
                 "departure test), target -2 +/- 0.2",
                 fit.exponent, std::min(4.0, hi), fit.points);
  return o;
}

// ------------------------------------------------------------------ 3

double bohr_a0(std::size_t n, double ratio) {
  const auto scan = hydrogen_scan(n, {ratio}, 1, tight(1e-8));
  return fit_bohr_radius(scan.ground.front(), centered_nucleus(n), 30).a0;
}

Outcome bohr_law() {
  Outcome o;
  double worst = 0.0, worst_ratio = 0.0;
  for (double ratio = 1.5; ratio <= 5.0 + 1e-9; ratio += 0.5) {
    const double a0 = bohr_a0(80, ratio);
    const double dev = std::abs(a0 / (2.0 * ratio) - 1.0);
    o.data["linear"].push_back({{"ratio", ratio}, {"a0", a0}});
    if (dev > worst) {
      worst = dev;
      worst_ratio = ratio;
    }
  }
  std::vector<double> saturation;
  for (std::size_t n : {40, 60, 80}) {
    double sat = NAN;
    for (double ratio = 1.5; ratio <= 15.0 + 1e-9; ratio += 0.5)
      if (bohr_a0(n, ratio) < 0.9 * 2.0 * ratio) {
        sat = ratio;
        break;
      }
    saturation.push_back(sat);
    o.data["saturation"].push_back({{"n", n}, {"ratio", sat}});
  }
  const bool growing = std::isfinite(saturation[0]) && saturation[0] < saturation[1] && saturation[1] < saturation[2];
  o.pass = worst <= 0.05 && growing;
  o.detail = fmt("N=80 worst |a0/(2 t_F/V0) - 1| = %.2f%% at %.1f (tol 5%%); saturation ratio at N=40/60/80: "
                 "%.1f / %.1f / %.1f (must grow)",
                 100.0 * worst, worst_ratio, saturation[0], saturation[1], saturation[2]);
  return o;
}

// ------------------------------------------------------------------ 4

Outcome mediator_oracle() {
  Outcome o;
  bool ok = true;
  double worst = 0.0;
  std::string trend;
  for (double g : {0.05, 0.1, 0.2}) {
    double prev = INFINITY, prev_u = 0.0;
    for (double u : {1e2, 1e3, 1e4}) {
      MediatorParams p;
      p.j = 1.0;
      p.j_c = 1.0;
      p.delta = 2.0;
      p.u = u;
      p.g = g;
      p.n_m = 10;
      p.n_e = 1;
      const FermionConfig c{{5, 5, 5}};
      const double err = std::abs(bound_state_closed(c, p).energy - bound_state_exact(c, p).energy);
      o.data["grid"].push_back({{"g", g}, {"u", u}, {"error", err}});
      worst = std::max(worst, err / (g * g));
      ok = ok && err <= 1e-2 * g * g;
      if (!(err < prev)) {
        ok = false;
        trend += fmt(" g=%.2f U=%.0g->%.0g grew;", g, prev_u, u);
      }
      prev = err;
      prev_u = u;
    }
  }
  o.pass = ok;
  o.detail = fmt("N_M=10, U/J_c in {1e2,1e3,1e4} x g/J in {0.05,0.1,0.2}: worst |dE|/g^2 = %.2e (tol 1e-2), "
                 "decreasing in U%s",
                 worst, trend.empty() ? "" : (":" + trend).c_str());
  return o;
}

// ------------------------------------------------------------------ 5

struct YukawaCase {
  double length = 0.0;
  YukawaParams predicted;
  YukawaFit fit;
};

YukawaCase yukawa_case(double length, double g) {
  MediatorParams p;
  p.j = 1.0;
  p.j_c = 1.0;
  p.delta = 2.0;
  p.g = g;
  p.n_m = 200;
  p.n_e = 2;
  p.u = 6.0 + 1.0 / (length * length) - p.delta - p.rho() * p.j_c;
  std::vector<long> ds;
  for (long d = 1; d <= 20; ++d)
    ds.push_back(d);
  const auto curve = effective_interaction_curve(ds, p);
  std::vector<double> r, v;
  for (const auto &pt : curve.points)
    if (pt.d >= 2) {
      r.push_back(static_cast<double>(pt.d));
      v.push_back(pt.v_eff);
    }
  return {length, curve.yukawa, fit_yukawa(r, v)};
}

Outcome yukawa_reproduction() {
  Outcome o;
  bool ok = true;
  std::string parts;
  for (double length : {5.0, 10.0}) {
    const auto c = yukawa_case(length, 0.02);
    const double dv = c.fit.v0 / c.predicted.v0 - 1.0, dl = c.fit.length / c.predicted.length - 1.0;
    ok = ok && std::abs(dv) <= 0.1 && std::abs(dl) <= 0.1;
    parts += fmt(" L=%.0f: V0 %+.1f%%, L %+.1f%%;", length, 100 * dv, 100 * dl);
    o.data["cases"].push_back({{"length", length}, {"fit_v0", c.fit.v0}, {"fit_length", c.fit.length},
                               {"fit_c", c.fit.c}, {"predicted_v0", c.predicted.v0}});
  }
  // The benchmark point itself has L = 54 > r_max; listed, not gated.
  const auto f = yukawa_case(54.0, 2e-4);
  o.data["benchmark"] = {{"fit_v0", f.fit.v0}, {"fit_length", f.fit.length}, {"predicted_v0", f.predicted.v0},
                     {"predicted_length", f.predicted.length}};
  o.pass = ok;
  o.detail = "N_M=200, Delta=2J, J_c=J, fit over r in [2,20], tol 10%:" + parts +
             fmt(" (L=54 point, ungated: fitted L %.1f, V0 %+.1f%%)", f.fit.length,
                 100 * (f.fit.v0 / f.predicted.v0 - 1.0));
  return o;
}

// ------------------------------------------------------------------ 6

std::vector<double> direct_convolution(const LatticeSpec &lat, const std::vector<double> &rho,
                                       const PotentialKind &kind, double v0) {
  std::vector<double> out(lat.sites(), 0.0);
  for (std::size_t i = 0; i < lat.sites(); ++i) {
    const auto a = to_point(lat.unflatten(i));
    for (std::size_t j = 0; j < lat.sites(); ++j)
      out[i] += potential_eval(kind, v0, lat.distance(a, to_point(lat.unflatten(j)))) * rho[j];
  }
  return out;
}

OrbitalBasis random_basis(const LatticeSpec &lat, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<OrbitalField> c;
  std::vector<std::string> tags;
  for (std::size_t k = 0; k < n; ++k) {
    OrbitalField f{lat, std::vector<double>(lat.sites())};
    for (double &v : f.values)
      v = gauss(rng);
    c.push_back(std::move(f));
    tags.push_back("random_" + std::to_string(k));
  }
  return combine_basis(c, tags);
}

Outcome integral_correctness() {
  Outcome o;
  const LatticeSpec lat(6);
  const std::size_t n = 3;
  const auto basis = random_basis(lat, n, 21);
  double worst = 0.0;
  for (const auto &kind : {PotentialKind::coulomb(), PotentialKind::yukawa(2.5, 0.1)}) {
    const auto t = ee_integrals(basis, kind, 0.7);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> rho(lat.sites());
        for (std::size_t x = 0; x < rho.size(); ++x)
          rho[x] = basis.orbitals[j].values[x] * basis.orbitals[s].values[x];
        const auto pot = direct_convolution(lat, rho, kind, 0.7);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t r = 0; r < n; ++r) {
            double v = 0.0;
            for (std::size_t x = 0; x < rho.size(); ++x)
              v += basis.orbitals[i].values[x] * basis.orbitals[r].values[x] * pot[x];
            worst = std::max(worst, std::abs(t(i, j, r, s) - v) / std::max(std::abs(v), 1e-300));
          }
      }
  }
  const std::size_t m = 16;
  const LatticeSpec big(m);
  std::vector<double> rho(big.sites(), 0.0);
  rho[big.flatten(0, 0, 0)] = 1.0;
  const auto pot = ee_convolution(rho, PotentialKind::coulomb(), 1.0, big);
  const double far = pot[big.flatten(m - 1, m - 1, m - 1)] * std::sqrt(3.0) * (m - 1) - 1.0;
  const double edge = pot[big.flatten(m - 1, 0, 0)] * (m - 1) - 1.0;
  const double wrap = std::max(std::abs(far), std::abs(edge));
  o.pass = worst <= 1e-10 && wrap <= 1e-12;
  o.detail = fmt("N=6 FFT vs direct sum: worst relative %.1e (tol 1e-10); N=16 corner charge seen at the far "
                 "corner/edge as 1/r to %.1e (no wrap-around)",
                 worst, wrap);
  o.data = {{"worst_relative", worst}, {"wrap_deviation", wrap}};
  return o;
}

// ------------------------------------------------------------------ 7

Outcome h2_curve() {
  Outcome o;
  const std::size_t n = 40;
  CurveSettings cs;
  cs.n1 = 8;
  cs.n2 = 8;
  const auto sched = RatioSchedule::linear(4.2, -0.065);
  std::vector<int> ds;
  for (int d = 4; d <= 30; ++d)
    ds.push_back(d);
  const auto curve = molecular_curve(ds, n, PotentialKind::coulomb(),
                                     [&](int d) { return schedule_ratio(sched, d); }, cs);
  std::size_t imin = 0;
  bool all_ok = true;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    all_ok = all_ok && curve[i].ok;
    if (curve[i].ok && curve[i].e_total < curve[imin].e_total)
      imin = i;
    o.data["curve"].push_back({{"d_lattice", curve[i].d_lattice}, {"d_atomic", curve[i].d_atomic},
                               {"ratio", curve[i].ratio}, {"e_total_ry", curve[i].e_total},
                               {"ok", curve[i].ok}});
  }
  const auto &tail = curve.back();
  const double ref = separated_atoms_energy(n, tail.d_lattice, tail.ratio);
  const double depth = ref - curve[imin].e_total;
  const double tail_dev = std::abs(tail.e_total - ref);
  const double dmin = curve[imin].d_atomic;
  o.pass = all_ok && dmin >= 1.2 && dmin <= 1.7 && depth > 0.0 && tail_dev <= 0.05 * depth;
  o.detail = fmt("N=40, 8+8, linear(4.2,-0.065): minimum %.4f Ry at d = %.3f a0 (window [1.2,1.7]); tail d=%d: "
                 "%.4f vs separated atoms %.4f, %.1f%% of depth %.4f (tol 5%%)",
                 curve[imin].e_total, dmin, tail.d_lattice, tail.e_total, ref, 100.0 * tail_dev / depth, depth);
  o.data["reference"] = ref;
  return o;
}

// ------------------------------------------------------------------ 8

Outcome pseudomolecule_limit() {
  Outcome o;
  CurveSettings cs;
  cs.n1 = 4;
  cs.n2 = 4;
  cs.repulsion_scale = 0.0;
  std::vector<int> ds{2, 4, 6, 8, 10};
  const auto curve = molecular_curve(ds, 24, PotentialKind::coulomb(), [](int) { return 1.5; }, cs);
  double worst = 0.0;
  bool ok = true;
  for (const auto &p : curve) {
    ok = ok && p.ok;
    const double limit = 2.0 * p.h2plus_ground + 2.0 / p.d_atomic;
    worst = std::max(worst, std::abs(p.e_total - limit) / std::abs(limit));
    o.data["points"].push_back({{"d_lattice", p.d_lattice}, {"e_total", p.e_total}, {"limit", limit}});
  }
  o.pass = ok && worst <= 1e-8;
  o.detail = fmt("F=0, N=24, d=2..10: worst relative gap to 2 E(H2+) + 2/(d/a0) = %.1e (tol 1e-8)", worst);
  return o;
}

// ------------------------------------------------------------------ 9

Outcome critical_ratio_procedure(const fs::path &dir) {
  Outcome o;
  const double d_atomic = 1.4;
  const double step = 1.0 / (2.0 * d_atomic);
  const SolverHandle planted = [](std::size_t n, int, double x) {
    double e = -2.3 + 0.1 / (x * x);
    if (n == 75 && x > 4.0)
      e += 0.5 * (x - 4.0);
    return e;
  };
  const auto syn = critical_ratio(d_atomic, 75, 100, planted);
  const bool syn_ok = syn.converged && syn.critical_ratio <= 4.0 && syn.critical_ratio > 4.0 - step;

  CurveSettings cs;
  cs.n1 = 2;
  cs.n2 = 2;
  cs.solver_tol_ry = 1e-6;
  CriticalOptions opt;
  opt.d_min = 3;
  opt.d_max = 14;
  const SolverHandle real = [&](std::size_t n, int d, double ratio) {
    return molecular_point(d, n, PotentialKind::coulomb(), ratio, cs).e_total;
  };
  const auto res = critical_ratio(d_atomic, 75, 100, real, opt);
  const bool real_ok = res.converged && std::abs(res.critical_ratio - 3.5) <= 0.5;

  const auto csv = dir / "departure.csv";
  {
    std::ofstream os(csv);
    os << "d_lattice,ratio,e_small,e_large,deviation,allowed\n";
    for (const auto &r : res.departure_table)
      os << r.d_lattice << ',' << r.ratio << ',' << r.e_small << ',' << r.e_large << ',' << r.deviation << ','
         << r.allowed << '\n';
  }
  o.data = {{"planted", {{"critical_ratio", syn.critical_ratio}, {"converged", syn.converged}}},
            {"real",
             {{"critical_ratio", res.critical_ratio}, {"fit_m", res.fit_m}, {"fit_n", res.fit_n},
              {"converged", res.converged}, {"message", res.message}, {"basis", "2+2"},
              {"solver_tol_ry", cs.solver_tol_ry}, {"n_small", 75}, {"n_large", 100}}}};
  o.data["csv"] = csv.string();
  o.pass = syn_ok && real_ok;
  o.detail = fmt("planted departure at 4: recovered %.3f (one step = %.3f); real d=1.4 a0 on 75/100 "
                 "(2+2 basis): critical t_F/V0 = %.3f, asymptote %.4f Ry (target 3.5 +/- 0.5)",
                 syn.critical_ratio, step, res.critical_ratio, res.fit_n);
  return o;
}

// ------------------------------------------------------------------ 10

struct Point {
  MediatorParams p;
  std::size_t n = 15;
  double t_f = 0.0;
};

Point benchmark() {
  Point x;
  auto &p = x.p;
  p.j = 1.0;
  p.j_c = 1.0;
  p.delta = 2.0;
  p.g = 2e-4;
  p.n_m = 200;
  p.n_e = 2;
  p.u = 6.0 + 1.0 / (54.0 * 54.0) - p.delta - p.rho() * p.j_c;
  const double v0 = yukawa_parameters(p).v0;
  x.t_f = 1.75 * v0;
  p.j_f = 2.0 * x.t_f;
  return x;
}

double v0_of(const MediatorParams &p) {
  return p.g * p.g / (2.0 * std::numbers::pi * static_cast<double>(p.n_e) * p.j);
}

std::array<bool, 5> judge(const Point &x) {
  return check_conditions(x.p, x.n, x.t_f, v0_of(x.p), 3.0).satisfied();
}

bool only(const std::array<bool, 5> &s, int k) {
  for (int i = 0; i < 5; ++i)
    if (s[static_cast<std::size_t>(i)] != (i != k))
      return false;
  return true;
}

Outcome condition_checker() {
  Outcome o;
  const Point base = benchmark();
  const bool base_ok = check_conditions(base.p, base.n, base.t_f, v0_of(base.p), 3.0).all();
  const double v0 = v0_of(base.p);
  const double cavity = base.p.rho() / std::sqrt(2.0);

  std::array<Point, 5> moved{base, base, base, base, base};
  moved[0].t_f = v0 / 2.0;                                // 2 t_F = V0
  moved[1].p.j_c = base.p.u;                              // U = J_c
  moved[2].p.j_c = base.p.j_f / cavity;                   // J_c rho / sqrt(n_e) = J_F
  moved[4].p.delta += 1.0 / 225.0 - 1.0 / (54.0 * 54.0);  // L = N

  // (d): try every parameter over twelve decades either way and look for a
  // value that breaks (d) and nothing else.
  using Setter = std::function<void(Point &, double)>;
  const std::vector<std::pair<std::string, Setter>> knobs{
      {"J", [](Point &x, double s) { x.p.j *= s; }},
      {"J_c", [](Point &x, double s) { x.p.j_c *= s; }},
      {"U", [](Point &x, double s) { x.p.u *= s; }},
      {"Delta", [](Point &x, double s) { x.p.delta *= s; }},
      {"g", [](Point &x, double s) { x.p.g *= s; }},
      {"J_F", [](Point &x, double s) { x.p.j_f *= s; }},
      {"t_F", [](Point &x, double s) { x.t_f *= s; }},
      {"N_M", [](Point &x, double s) { x.p.n_m = static_cast<std::size_t>(std::max(2.0, std::round(x.p.n_m * s))); }},
      {"N", [](Point &x, double s) { x.n = static_cast<std::size_t>(std::max(1.0, std::round(x.n * s))); }},
  };
  std::string d_hit;
  for (const auto &[name, set] : knobs) {
    for (int sign : {1, -1})
      for (int i = -2400; i <= 2400 && d_hit.empty(); ++i) {
        Point x = base;
        set(x, sign * std::pow(10.0, i / 200.0));
        if (!(x.p.rho() < 1.0))
          continue;
        if (only(judge(x), 3)) {
          d_hit = name;
          moved[3] = x;
        }
      }
  }

  const char *names = "abcde";
  bool ok = base_ok;
  std::string report;
  for (int k = 0; k < 5; ++k) {
    const bool flipped = k == 3 ? !d_hit.empty() : only(judge(moved[static_cast<std::size_t>(k)]), k);
    ok = ok && flipped;
    report += fmt(" (%c) %s;", names[k], flipped ? "flips alone" : "no single-parameter move flips it alone");
    o.data["flips"][std::string(1, names[k])] = flipped;
  }
  if (!d_hit.empty())
    report += " (d) via " + d_hit + ";";
  o.pass = ok;
  o.detail = fmt("benchmark point at threshold 3 %s;", base_ok ? "passes (a)-(e)" : "FAILS") + report;
  o.data["baseline_all"] = base_ok;
  return o;
}

// ------------------------------------------------------------------ 11

Outcome property_suites() {
  Outcome o;
  using clock = std::chrono::steady_clock;
  std::vector<std::pair<std::string, std::function<bool()>>> suites;

  suites.emplace_back("hermiticity", [] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto b : {Boundary::open, Boundary::periodic}) {
      const LatticeSpec lat(9, b);
      std::vector<double> w(lat.sites());
      for (double &x : w)
        x = u(rng);
      const OneBodyOperator op(lat, 1.3, w);
      for (int t = 0; t < 200; ++t) {
        std::vector<double> phi(lat.sites()), psi(lat.sites());
        for (auto &x : phi)
          x = u(rng);
        for (auto &x : psi)
          x = u(rng);
        if (std::abs(dot(phi, op.apply(psi)) - dot(op.apply(phi), psi)) >
            1e-12 * std::sqrt(dot(phi, phi) * dot(psi, psi)))
          return false;
      }
    }
    return true;
  });

  suites.emplace_back("variational monotonicity", [] {
    const LatticeSpec lat(10);
    const auto pos = nucleus_pair(10, 2);
    const auto params = params_for_ratio(1.0, {Nucleus{1.0, pos[0]}, Nucleus{1.0, pos[1]}}, 2);
    const auto spec = h2plus_orbitals(lat, params, 6, tight(1e-10));
    const auto h0 = bare_hamiltonian(lat, params);
    double prev = INFINITY;
    for (std::size_t k = 2; k <= 6; ++k) {
      std::vector<OrbitalField> c(spec.orbitals.begin(), spec.orbitals.begin() + static_cast<long>(k));
      const auto basis = combine_basis(c, std::vector<std::string>(k, "h2plus"));
      const double e = assemble_and_solve(basis, ee_integrals(basis, PotentialKind::coulomb(), params.v0), h0, 1.0).energy;
      if (e > prev + 1e-12)
        return false;
      prev = e;
    }
    return true;
  });

  suites.emplace_back("tensor symmetry", [] {
    const LatticeSpec lat(6);
    const auto basis = random_basis(lat, 4, 9);
    const auto t = ee_integrals(basis, PotentialKind::yukawa(3.0, 0.0), 1.0);
    const std::size_t n = basis.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t s = 0; s < n; ++s) {
            const double v = t(i, j, r, s);
            if (v != t(r, j, i, s) || v != t(i, s, r, j) || v != t(j, i, s, r) || v != t(r, s, i, j) ||
                v != t(s, r, j, i) || v != t(j, r, s, i) || v != t(s, i, j, r))
              return false;
          }
    return true;
  });

  suites.emplace_back("translation invariance", [] {
    MediatorParams p;
    p.u = 30.0;
    p.g = 0.1;
    p.n_m = 10;
    p.n_e = 2;
    const double a = bound_state_closed({{2, 5, 5}, {5, 5, 5}}, p).shift;
    const double b = bound_state_closed({{9, 1, 7}, {2, 1, 7}}, p).shift;
    const double c = bound_state_closed({{4, 0, 3}, {4, 3, 3}}, p).shift;
    return std::abs(a - b) <= 1e-12 * std::abs(a) && std::abs(a - c) <= 1e-12 * std::abs(a);
  });

  suites.emplace_back("determinism", [] {
    const auto a = hydrogen_scan(14, {1.0, 2.0}, 4);
    const auto b = hydrogen_scan(14, {1.0, 2.0}, 4);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      if (a.rows[i].energy_ry != b.rows[i].energy_ry)
        return false;
    for (std::size_t i = 0; i < a.ground.size(); ++i)
      if (a.ground[i].values != b.ground[i].values)
        return false;
    const LatticeSpec lat(6);
    const auto basis = random_basis(lat, 4, 5);
    return ee_integrals(basis, PotentialKind::coulomb(), 1.0, 1).values() ==
           ee_integrals(basis, PotentialKind::coulomb(), 1.0, 3).values();
  });

  bool ok = true;
  std::string report;
  for (const auto &[name, run] : suites) {
    const auto t0 = clock::now();
    const bool passed = run();
    const double sec = std::chrono::duration<double>(clock::now() - t0).count();
    ok = ok && passed && sec < 60.0;
    report += fmt(" %s %s in %.1fs;", name.c_str(), passed ? "ok" : "FAILED", sec);
    o.data[name] = {{"passed", passed}, {"seconds", sec}};
  }
  o.pass = ok;
  o.detail = "each under 60 s:" + report;
  return o;
}

// ------------------------------------------------------------------ driver

struct Criterion {
  const char *title;
  std::function<Outcome(const fs::path &)> run;
};

std::vector<Criterion> criteria() {
  auto wrap = [](Outcome (*f)()) { return [f](const fs::path &) { return f(); }; };
  return {
      {"hydrogen accuracy", wrap(hydrogen_accuracy)},
      {"discretization scaling", wrap(discretization_scaling)},
      {"Bohr-radius law", wrap(bohr_law)},
      {"mediator oracle equivalence", wrap(mediator_oracle)},
      {"Yukawa reproduction", wrap(yukawa_reproduction)},
      {"integral correctness", wrap(integral_correctness)},
      {"H2 desk-scale curve", wrap(h2_curve)},
      {"pseudomolecule limit", wrap(pseudomolecule_limit)},
      {"critical-ratio procedure", critical_ratio_procedure},
      {"condition checker", wrap(condition_checker)},
      {"property suites", wrap(property_suites)},
  };
}

bool run_one(int k, const Criterion &c, const std::string &argv_line) {
  const auto dir = output_dir(k);
  lqc::cli::RunManifest manifest("acceptance-" + std::to_string(k), argv_line);
  Outcome o;
  try {
    o = c.run(dir);
  } catch (const std::exception &e) {
    o.pass = false;
    o.detail = std::string("error: ") + e.what();
  }
  std::printf("%s A%d %s: %s\n", o.pass ? "PASS" : "FAIL", k, c.title, o.detail.c_str());
  std::fflush(stdout);
  manifest.results() = {{"pass", o.pass}, {"detail", o.detail}, {"data", o.data}};
  if (o.data.contains("csv"))
    manifest.add_output(o.data["csv"].get<std::string>());
  manifest.write(dir);
  return o.pass;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance criteria"};
  int only_k = 0;
  app.add_option("--criterion", only_k, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  std::string line;
  for (int i = 0; i < argc; ++i)
    line += (i ? " " : "") + std::string(argv[i]);
  const auto all = criteria();
  bool ok = true;
  for (int k = 1; k <= static_cast<int>(all.size()); ++k)
    if (only_k == 0 || only_k == k)
      ok = run_one(k, all[static_cast<std::size_t>(k - 1)], line) && ok;
  return ok ? 0 : 1;
}
