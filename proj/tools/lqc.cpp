// lqc: batch runs over the lattice quantum-chemistry library.
// Every subcommand writes CSV data and manifest.json into its output
// directory. Exit codes: 0 success, 2 invalid input, 3 solver non-convergence.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lqc/lqc.hpp"

#include "config.hpp"
#include "manifest.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;
using namespace lqc;
using namespace lqc::cli;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
public:
  Csv(const fs::path &path, const std::vector<std::string> &header) : os_(path), path_(path) {
    if (!os_)
      throw DomainError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  const fs::path &path() const { return path_; }

private:
  std::ofstream os_;
  fs::path path_;
};

struct Run {
  fs::path out;
  std::string name;  ///< output basename, from the output directory
  std::size_t jobs = 1;
  bool plot = false;
  RunManifest *manifest = nullptr;

  fs::path file(const std::string &ext) const { return out / (name + ext); }
  void done(const fs::path &p) const { manifest->add_output(p); }
  void script(const std::string &body) const {
    if (!plot)
      return;
    const auto p = file(".gp");
    std::ofstream os(p);
    os << "set datafile separator ','\nset key autotitle columnhead\n" << body;
    done(p);
  }
};

SolverSettings solver_settings(const Settings &s) {
  SolverSettings st;
  st.tol = s.real("solver.tol_ry");
  st.max_iterations = s.count("solver.max_iterations");
  st.seed = std::strtoull(s.str("solver.seed").c_str(), nullptr, 0);
  return st;
}

const std::vector<KeySpec> solver_keys{
    {"solver.tol_ry", "1e-8", "eigen residual tolerance in Rydberg"},
    {"solver.max_iterations", "4000", "eigensolver iteration cap"},
    {"solver.seed", "0x9e3779b97f4a7c15", "seed for random starting vectors"},
};

std::vector<KeySpec> join(std::vector<KeySpec> a, const std::vector<KeySpec> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// ------------------------------------------------------------ hydrogen

int hydrogen_spectrum(const Settings &s, const Run &run) {
  const auto n = s.count("lattice.n");
  const auto ratios = s.reals("hydrogen.ratios");
  const auto levels = s.count("hydrogen.levels");
  auto st = solver_settings(s);
  const auto scans = parallel_map<HydrogenScan>(ratios.size(), run.jobs, [&](std::size_t i) {
    return hydrogen_scan(n, {ratios[i]}, levels, st);
  });
  Csv csv(run.file(".csv"), {"ratio", "level", "energy_ry", "residual"});
  for (const auto &sc : scans)
    for (const auto &r : sc.rows)
      csv.row({num(r.ratio), std::to_string(r.level), num(r.energy_ry), num(r.residual)});
  run.done(csv.path());
  if (s.flag("hydrogen.snapshots")) {
    const LatticeSpec lat(n);
    for (std::size_t i = 0; i < scans.size(); ++i) {
      const auto p = run.out / ("ground_ratio_" + num(ratios[i]) + ".bin");
      write_field_binary(p, lat, scans[i].ground.front().values);
      run.done(p);
    }
  }
  run.script("set xlabel 't_F/V_0'\nset ylabel 'E (Ry)'\nset yrange [-1.2:0.2]\n"
             "plot for [l=0:" + std::to_string(levels - 1) + "] '" + run.name +
             ".csv' using 1:($2==l?$3:1/0) with linespoints title sprintf('level %d', l), "
             "-1 dt 2 notitle, -0.25 dt 2 notitle, -1.0/9 dt 2 notitle\n");
  return 0;
}

int bohr_fit(const Settings &s, const Run &run) {
  const auto n = s.count("lattice.n");
  const auto ratios = s.reals("hydrogen.ratios");
  const auto bins = s.count("bohr.bins");
  const double sat = s.real("bohr.saturation");
  const auto st = solver_settings(s);
  const Vec3 c = centered_nucleus(n);
  const auto fits = parallel_map<BohrFit>(ratios.size(), run.jobs, [&](std::size_t i) {
    return fit_bohr_radius(hydrogen_scan(n, {ratios[i]}, 1, st).ground.front(), c, bins);
  });
  Csv csv(run.file(".csv"), {"ratio", "a0_fit", "a0_density", "a0_predicted", "relative_deviation", "bins_used"});
  json saturated = nullptr;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const double pred = 2.0 * ratios[i];
    csv.row({num(ratios[i]), num(fits[i].a0), num(fits[i].a0_density), num(pred),
             num(fits[i].a0 / pred - 1.0), std::to_string(fits[i].bins_used)});
    if (saturated.is_null() && fits[i].a0 < sat * pred)
      saturated = ratios[i];
  }
  run.done(csv.path());
  run.manifest->results() = {{"saturation_ratio", saturated}, {"saturation_fraction", sat}};
  run.script("set xlabel 't_F/V_0'\nset ylabel 'a_0/a'\nplot '" + run.name +
             ".csv' using 1:2 with points title 'fit', 2*x title '2 t_F/V_0'\n");
  return 0;
}

// ------------------------------------------------------------ mediator

const std::vector<KeySpec> mediator_keys{
    {"mediator.j", "1", "b-band hopping J"},
    {"mediator.j_c", "1", "cavity rate J_c"},
    {"mediator.u", "auto", "on-site repulsion U, or auto to set it from mediator.length"},
    {"mediator.length", "10", "target localization length when U is auto"},
    {"mediator.delta", "2", "detuning"},
    {"mediator.g", "0.02", "a-b coupling"},
    {"mediator.j_f", "auto", "bare fermion hopping, or auto from fermion.ratio"},
    {"mediator.n_m", "200", "Mott lattice side"},
    {"mediator.n_e", "2", "fermion count"},
    {"fermion.n", "15", "fermion lattice side N"},
    {"fermion.v0", "auto", "Coulomb strength, or auto for the Yukawa V0 from g"},
    {"fermion.ratio", "1.75", "t_F / V0"},
    {"conditions.threshold", "10", "margin a condition needs to count as satisfied"},
};

struct MediatorSetup {
  MediatorParams p;
  double v0 = 0.0;
  double t_f = 0.0;
  std::size_t n = 0;
  double threshold = 10.0;
};

MediatorSetup mediator_setup(const Settings &s) {
  MediatorSetup m;
  auto &p = m.p;
  p.j = s.real("mediator.j");
  p.j_c = s.real("mediator.j_c");
  p.delta = s.real("mediator.delta");
  p.g = s.real("mediator.g");
  p.n_m = s.count("mediator.n_m");
  p.n_e = static_cast<int>(s.integer("mediator.n_e"));
  if (s.str("mediator.u") == "auto") {
    const double length = s.real("mediator.length");
    if (!(length > 0.0))
      throw DomainError("mediator.length must be positive");
    p.u = 6.0 * p.j + p.j / (length * length) - p.delta - p.rho() * p.j_c;
  } else {
    p.u = s.real("mediator.u");
  }
  p.validate();
  m.v0 = s.str("fermion.v0") == "auto" ? yukawa_parameters(p).v0 : s.real("fermion.v0");
  m.t_f = s.real("fermion.ratio") * m.v0;
  if (s.str("mediator.j_f") == "auto") {
    if (p.n_e < 2)
      throw DomainError("mediator.j_f = auto needs n_e >= 2");
    p.j_f = m.t_f * p.n_e / (p.n_e - 1.0);
  } else {
    p.j_f = s.real("mediator.j_f");
  }
  m.n = s.count("fermion.n");
  m.threshold = s.real("conditions.threshold");
  return m;
}

json condition_json(const ConditionReport &r) {
  const auto ok = r.satisfied();
  return {{"threshold", r.threshold},
          {"localization_length", r.length},
          {"margins",
           {{"a_lower", r.a_lower}, {"a_upper", r.a_upper}, {"b", r.b}, {"c_jf", r.c_jf},
            {"c_v0", r.c_v0}, {"d", r.d}, {"e_lower", r.e_lower}, {"e_upper", r.e_upper}}},
          {"satisfied", {{"a", ok[0]}, {"b", ok[1]}, {"c", ok[2]}, {"d", ok[3]}, {"e", ok[4]}}},
          {"all_satisfied", r.all()}};
}

json params_json(const MediatorSetup &m) {
  const auto &p = m.p;
  return {{"j", p.j}, {"j_c", p.j_c}, {"u", p.u}, {"delta", p.delta}, {"g", p.g}, {"j_f", p.j_f},
          {"n_m", p.n_m}, {"n_e", p.n_e}, {"rho", p.rho()}, {"v0", m.v0}, {"t_f", m.t_f},
          {"fermion_n", m.n}};
}

int check_conditions_cmd(const Settings &s, const Run &run) {
  const auto m = mediator_setup(s);
  const auto rep = check_conditions(m.p, m.n, m.t_f, m.v0, m.threshold);
  json doc = condition_json(rep);
  doc["parameters"] = params_json(m);
  const auto p = run.file(".json");
  std::ofstream(p) << doc.dump(2) << '\n';
  run.done(p);
  run.manifest->conditions(doc);
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int mediator_curve(const Settings &s, const Run &run) {
  const auto m = mediator_setup(s);
  std::vector<long> ds;
  for (int d : s.ints("mediator.d"))
    ds.push_back(d);
  const auto method_name = s.str("mediator.method");
  BoundStateSolution::Method method;
  if (method_name == "closed")
    method = BoundStateSolution::Method::closed_equation;
  else if (method_name == "exact")
    method = BoundStateSolution::Method::exact_diag;
  else
    throw DomainError("mediator.method must be closed or exact");
  const auto curve = effective_interaction_curve(ds, m.p, method);
  Csv csv(run.file(".csv"), {"d", "E2", "E1", "V_eff", "yukawa_prediction", "shift2"});
  std::vector<double> r, v;
  const double lo = s.real("mediator.fit_min"), hi = s.real("mediator.fit_max");
  for (const auto &pt : curve.points) {
    csv.row({std::to_string(pt.d), num(pt.e2), num(pt.e1), num(pt.v_eff), num(pt.yukawa), num(pt.shift2)});
    if (pt.d >= lo && pt.d <= hi) {
      r.push_back(static_cast<double>(pt.d));
      v.push_back(pt.v_eff);
    }
  }
  run.done(csv.path());
  json res = {{"predicted", {{"v0", curve.yukawa.v0}, {"length", curve.yukawa.length}, {"c", curve.yukawa.c}}},
              {"parameters", params_json(m)}};
  if (r.size() >= 4) {
    const auto f = fit_yukawa(r, v);
    res["fit"] = {{"v0", f.v0}, {"length", f.length}, {"c", f.c}, {"rms_relative", f.rms_relative},
                  {"r_min", lo}, {"r_max", hi}};
  }
  run.manifest->results() = res;
  run.manifest->conditions(condition_json(check_conditions(m.p, m.n, m.t_f, m.v0, m.threshold)));
  run.script("set xlabel 'd (sites)'\nset ylabel 'V_eff'\nset logscale y\nplot '" + run.name +
             ".csv' using 1:4 with points title 'V_eff'\n");
  return 0;
}

// ------------------------------------------------------------ molecules

const std::vector<KeySpec> h2_keys{
    {"lattice.n", "40", "lattice side N"},
    {"h2.d", "4:30:1", "nuclear separations in sites"},
    {"h2.basis", "8+8", "H2+ states + Hartree states"},
    {"h2.kernel", "coulomb", "electron-electron kernel: coulomb or yukawa"},
    {"h2.yukawa_length", "10", "Yukawa screening length in sites"},
    {"h2.yukawa_offset", "0", "Yukawa constant C"},
    {"h2.nuclear_repulsion", "true", "add 2/(d/a0) Ry"},
    {"h2.reference", "false", "also compute the separated-atom energy at every d"},
    {"hf.max_sweeps", "400", "Hartree sweep cap"},
    {"schedule.kind", "linear", "linear, fixed or table"},
    {"schedule.intercept", "4.2", "linear schedule: ratio at d = 0"},
    {"schedule.slope", "-0.065", "linear schedule: change per site"},
    {"schedule.ratio", "3", "fixed schedule ratio"},
    {"schedule.table", "", "table schedule: 'd ratio, d ratio, ...'"},
};

RatioSchedule schedule_from(const Settings &s) {
  const auto &kind = s.str("schedule.kind");
  if (kind == "linear")
    return RatioSchedule::linear(s.real("schedule.intercept"), s.real("schedule.slope"));
  if (kind == "fixed")
    return RatioSchedule::fixed(s.real("schedule.ratio"));
  if (kind == "table") {
    std::vector<std::pair<double, double>> pts;
    std::stringstream ss(s.str("schedule.table"));
    for (std::string item; std::getline(ss, item, ',');) {
      std::istringstream is(item);
      double d = 0, r = 0;
      if (!(is >> d >> r))
        throw DomainError("schedule.table entries must be 'd ratio'");
      pts.emplace_back(d, r);
    }
    return RatioSchedule::table(std::move(pts));
  }
  throw DomainError("schedule.kind must be linear, fixed or table");
}

std::pair<std::size_t, std::size_t> parse_basis(const std::string &b) {
  const auto plus = b.find('+');
  if (plus == std::string::npos)
    throw DomainError("h2.basis must look like n1+n2");
  try {
    return {std::stoul(b.substr(0, plus)), std::stoul(b.substr(plus + 1))};
  } catch (const std::exception &) {
    throw DomainError("h2.basis must look like n1+n2");
  }
}

PotentialKind kernel_from(const Settings &s) {
  const auto &k = s.str("h2.kernel");
  if (k == "coulomb")
    return PotentialKind::coulomb();
  if (k == "yukawa")
    return PotentialKind::yukawa(s.real("h2.yukawa_length"), s.real("h2.yukawa_offset"));
  throw DomainError("h2.kernel must be coulomb or yukawa");
}

CurveSettings curve_settings(const Settings &s) {
  CurveSettings cs;
  std::tie(cs.n1, cs.n2) = parse_basis(s.str("h2.basis"));
  cs.nuclear_repulsion = s.flag("h2.nuclear_repulsion");
  cs.solver_tol_ry = s.real("solver.tol_ry");
  cs.hf.max_sweeps = s.count("hf.max_sweeps");
  cs.hf.solver = solver_settings(s);
  cs.jobs = 1;
  return cs;
}

struct CurveRow {
  double f = 0.0;
  MolecularCurvePoint pt;
  double reference = std::numeric_limits<double>::quiet_NaN();
};

int molecule_run(const Settings &s, const Run &run, const std::vector<double> &fs, bool pseudo) {
  const auto n = s.count("lattice.n");
  const auto ds = s.ints("h2.d");
  const auto kind = kernel_from(s);
  const auto sched = schedule_from(s);
  const bool reference = s.flag("h2.reference");
  auto cs = curve_settings(s);
  for (int d : ds)
    if (d < 1)
      throw DomainError("separations must be at least one site");
  for (double f : fs)
    if (!(f >= 0.0))
      throw DomainError("repulsion factor must be non-negative");

  const std::size_t total = ds.size() * fs.size();
  const auto rows = parallel_map<CurveRow>(total, run.jobs, [&](std::size_t i) {
    CurveRow row;
    row.f = fs[i / ds.size()];
    const int d = ds[i % ds.size()];
    auto c = cs;
    c.repulsion_scale = row.f;
    row.pt = molecular_curve({d}, n, kind, [&](int dd) { return schedule_ratio(sched, dd); }, c).front();
    if (reference && row.pt.ok)
      row.reference = separated_atoms_energy(n, d, row.pt.ratio, cs.solver_tol_ry);
    return row;
  });

  std::vector<std::string> header{"d_lattice", "d_atomic", "ratio", "e_electronic_ry", "e_total_ry",
                                  "basis_n", "hf_sweeps", "e_electronic_raw_ry", "e_total_raw_ry",
                                  "h2plus_ground_ry"};
  if (pseudo) {
    header.insert(header.begin(), "f");
    header.push_back("zero_repulsion_limit_ry");
  }
  if (reference)
    header.push_back("separated_atoms_ry");
  header.push_back("status");
  Csv csv(run.file(".csv"), header);
  bool failed = false;
  json errors = json::array();
  for (const auto &r : rows) {
    const auto &p = r.pt;
    std::vector<std::string> cells;
    if (pseudo)
      cells.push_back(num(r.f));
    if (!p.ok) {
      cells.insert(cells.end(), {std::to_string(p.d_lattice), "nan", num(p.ratio)});
      cells.resize(header.size() - 1, "nan");
      cells.push_back("failed");
      csv.row(cells);
      failed = true;
      errors.push_back({{"f", r.f}, {"d_lattice", p.d_lattice}, {"error", p.error}});
      continue;
    }
    cells.insert(cells.end(), {std::to_string(p.d_lattice), num(p.d_atomic), num(p.ratio), num(p.e_electronic),
                               num(p.e_total), std::to_string(p.basis_size), std::to_string(p.hf_sweeps),
                               num(p.e_electronic_raw), num(p.e_total_raw), num(p.h2plus_ground)});
    if (pseudo) {
      const double rep = cs.nuclear_repulsion ? 2.0 / p.d_atomic : 0.0;
      cells.push_back(num(2.0 * p.h2plus_ground + rep));
    }
    if (reference)
      cells.push_back(num(r.reference));
    cells.push_back("ok");
    csv.row(cells);
  }
  run.done(csv.path());
  run.manifest->results() = {{"failed_points", errors}};
  const std::string col = pseudo ? "3:6" : "2:5";
  run.script("set xlabel 'd/a_0'\nset ylabel 'E (Ry)'\nplot '" + run.name + ".csv' using " + col +
             " with linespoints title 'E_total'\n");
  return failed ? 3 : 0;
}

int h2_curve(const Settings &s, const Run &run) { return molecule_run(s, run, {s.real("h2.f")}, false); }

int pseudo_curve(const Settings &s, const Run &run) { return molecule_run(s, run, s.reals("h2.f"), true); }

// ------------------------------------------------------------ planner

int critical_ratio_cmd(const Settings &s, const Run &run) {
  const double d_atomic = s.real("planner.d_atomic");
  const auto n_small = s.count("planner.n_small"), n_large = s.count("planner.n_large");
  CriticalOptions opt;
  opt.factor = s.real("planner.factor");
  opt.min_ratio = s.real("planner.min_ratio");
  opt.d_min = static_cast<int>(s.integer("planner.d_min"));
  opt.d_max = static_cast<int>(s.integer("planner.d_max"));
  if (opt.d_max == 0)
    opt.d_max = std::min<int>(30, static_cast<int>(n_small / 2));
  if (!(d_atomic > 0.0) || n_large < n_small || opt.d_min < 1 || opt.d_max < opt.d_min)
    throw DomainError("invalid planner range");
  const auto &system = s.str("planner.system");
  auto cs = curve_settings(s);
  const auto kind = kernel_from(s);
  SolverHandle solve;
  if (system == "h2") {
    solve = [&](std::size_t n, int d, double ratio) {
      return molecular_point(d, n, kind, ratio, cs).e_total;
    };
  } else if (system == "hydrogen") {
    const auto st = solver_settings(s);
    solve = [st](std::size_t n, int, double ratio) {
      return hydrogen_scan(n, {ratio}, 1, st).rows.front().energy_ry;
    };
  } else {
    throw DomainError("planner.system must be h2 or hydrogen");
  }

  const std::size_t count = static_cast<std::size_t>(opt.d_max - opt.d_min + 1);
  const bool same = n_small == n_large;
  const std::size_t per = same ? 1 : 2;
  const auto energies = parallel_map<double>(count * per, run.jobs, [&](std::size_t i) {
    const int d = opt.d_min + static_cast<int>(i / per);
    return solve(i % per == 0 ? n_small : n_large, d, d / (2.0 * d_atomic));
  });
  std::vector<DepartureRow> rows;
  for (std::size_t i = 0; i < count; ++i) {
    DepartureRow r;
    r.d_lattice = opt.d_min + static_cast<int>(i);
    r.ratio = r.d_lattice / (2.0 * d_atomic);
    r.e_small = energies[i * per];
    r.e_large = energies[i * per + per - 1];
    rows.push_back(r);
  }
  const auto res = critical_ratio_from_rows(d_atomic, rows, same, opt);
  Csv csv(run.file(".csv"), {"d_lattice", "ratio", "e_small", "e_large", "deviation", "allowed"});
  for (const auto &r : res.departure_table)
    csv.row({std::to_string(r.d_lattice), num(r.ratio), num(r.e_small), num(r.e_large), num(r.deviation),
             num(r.allowed)});
  run.done(csv.path());
  const auto runs = sign_runs(window_residuals(res, opt.min_ratio));
  json out = {{"d_atomic", d_atomic},
              {"critical_ratio", std::isfinite(res.critical_ratio) ? json(res.critical_ratio) : json(nullptr)},
              {"fit_m", res.fit_m},
              {"fit_n", res.fit_n},
              {"converged", res.converged},
              {"no_finite_size_signal", res.no_finite_size_signal},
              {"iterations", res.iterations},
              {"message", res.message},
              {"sign_runs", {{"runs", runs.runs}, {"expected", runs.expected}, {"z", runs.z}}}};
  const auto p = run.file(".json");
  std::ofstream(p) << out.dump(2) << '\n';
  run.done(p);
  run.manifest->results() = out;
  std::cout << out.dump(2) << '\n';
  run.script("set xlabel 't_F/V_0'\nset ylabel 'E (Ry)'\nplot '" + run.name +
             ".csv' using 2:3 with linespoints title 'small', '' using 2:4 with linespoints title 'large'\n");
  return 0;
}

// ------------------------------------------------------------ density

int export_density(const Settings &s, const Run &run) {
  const auto n = s.count("lattice.n");
  const LatticeSpec lat(n);
  const double ratio = s.real("density.ratio");
  const auto level = s.count("density.level");
  const auto &system = s.str("density.system");
  auto st = solver_settings(s);
  ChemistryParams params;
  if (system == "hydrogen") {
    params = hydrogen_params(n, ratio);
  } else if (system == "h2plus") {
    const auto pos = nucleus_pair(n, static_cast<int>(s.integer("density.d")));
    params = params_for_ratio(ratio, {Nucleus{1.0, pos[0]}, Nucleus{1.0, pos[1]}}, 1);
  } else {
    throw DomainError("density.system must be hydrogen or h2plus");
  }
  st.tol *= params.rydberg();
  const auto spec = solve_lowest(bare_hamiltonian(lat, params), level + 1, st);
  std::vector<double> rho(lat.sites());
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho[i] = spec.orbitals[level].values[i] * spec.orbitals[level].values[i];
  const auto &format = s.str("density.format");
  fs::path p;
  if (format == "bin") {
    p = run.file(".bin");
    write_field_binary(p, lat, rho);
  } else if (format == "csv") {
    p = run.file(".csv");
    write_field_csv(p, lat, rho);
  } else {
    throw DomainError("density.format must be bin or csv");
  }
  run.done(p);
  run.manifest->results() = {{"energy_ry", to_atomic_units(spec.energies[level], params)}, {"level", level}};
  return 0;
}

// ------------------------------------------------------------ dispatch

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  int (*handler)(const Settings &, const Run &);
};

std::vector<Command> commands() {
  const std::vector<KeySpec> hydrogen{
      {"lattice.n", "100", "lattice side N"},
      {"hydrogen.ratios", "0.25:5:0.25", "t_F/V0 values, start:stop:step or a list"},
      {"hydrogen.levels", "9", "levels per ratio"},
      {"hydrogen.snapshots", "false", "write the ground orbital of every ratio"},
  };
  const std::vector<KeySpec> bohr{
      {"lattice.n", "80", "lattice side N"},
      {"hydrogen.ratios", "1:10:0.5", "t_F/V0 values"},
      {"bohr.bins", "30", "radial shells in the fit"},
      {"bohr.saturation", "0.9", "fitted/predicted below this counts as saturated"},
  };
  const std::vector<KeySpec> curve_extra{
      {"mediator.d", "1:20:1", "fermion separations"},
      {"mediator.method", "closed", "closed or exact"},
      {"mediator.fit_min", "2", "smallest separation in the Yukawa fit"},
      {"mediator.fit_max", "20", "largest separation in the Yukawa fit"},
  };
  const std::vector<KeySpec> planner{
      {"planner.d_atomic", "1.4", "separation in Bohr radii"},
      {"planner.n_small", "75", "smaller lattice"},
      {"planner.n_large", "100", "larger lattice"},
      {"planner.factor", "0.1", "departure factor"},
      {"planner.min_ratio", "1", "smallest ratio admitted to the fit"},
      {"planner.d_min", "1", "first separation in sites"},
      {"planner.d_max", "0", "last separation in sites (0: min(30, N_small/2))"},
      {"planner.system", "h2", "h2 or hydrogen"},
  };
  auto planner_h2 = h2_keys;
  planner_h2.erase(std::remove_if(planner_h2.begin(), planner_h2.end(),
                                  [](const KeySpec &k) {
                                    return k.key == "lattice.n" || k.key == "h2.d" || k.key == "h2.reference" ||
                                           k.key.rfind("schedule.", 0) == 0;
                                  }),
                   planner_h2.end());
  for (auto &k : planner_h2)
    if (k.key == "h2.basis")
      k.default_value = "2+2";
  const std::vector<KeySpec> density{
      {"lattice.n", "40", "lattice side N"},
      {"density.system", "hydrogen", "hydrogen or h2plus"},
      {"density.ratio", "2", "t_F/V0"},
      {"density.d", "10", "H2+ separation in sites"},
      {"density.level", "1", "orbital index"},
      {"density.format", "bin", "bin or csv"},
  };
  return {
      {"hydrogen-spectrum", "hydrogen levels against t_F/V0", join(hydrogen, solver_keys), hydrogen_spectrum},
      {"bohr-fit", "fitted Bohr radius against t_F/V0", join(bohr, solver_keys), bohr_fit},
      {"mediator-curve", "mediated interaction V_eff(d) and its Yukawa fit", join(mediator_keys, curve_extra),
       mediator_curve},
      {"check-conditions", "validity margins (a)-(e)", mediator_keys, check_conditions_cmd},
      {"h2-curve", "H2 potential curve",
       join(join(h2_keys, {{"h2.f", "1", "repulsion factor F"}}), solver_keys), h2_curve},
      {"pseudo-curve", "pseudomolecule curves over repulsion factors",
       join(join(h2_keys, {{"h2.f", "0,0.25,0.5,0.75,1", "repulsion factors"}}), solver_keys), pseudo_curve},
      {"critical-ratio", "finite-size critical t_F/V0",
       join(join(planner, planner_h2), {{"solver.tol_ry", "1e-6", "eigen residual tolerance in Rydberg"},
                                        solver_keys[1], solver_keys[2]}),
       critical_ratio_cmd},
      {"export-density", "orbital density snapshot", join(density, solver_keys), export_density},
  };
}

std::string command_line(int argc, char **argv) {
  std::string s;
  for (int i = 0; i < argc; ++i)
    s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Lattice quantum-chemistry runs"};
  app.require_subcommand(1);
  const auto cmds = commands();
  struct Bound {
    CLI::App *app;
    std::map<std::string, std::string> flags;
    std::string config, out;
    std::size_t jobs = 1;
    bool plot = false;
  };
  std::vector<Bound> bound(cmds.size());
  for (std::size_t c = 0; c < cmds.size(); ++c) {
    auto &b = bound[c];
    b.app = app.add_subcommand(cmds[c].name, cmds[c].help);
    b.app->add_option("--config", b.config, "key = value config file; flags override it");
    b.app->add_option("--out", b.out, "output directory (default $LQC_OUTPUT_ROOT/<subcommand>)");
    b.app->add_option("--jobs", b.jobs, "concurrent solver jobs")->check(CLI::PositiveNumber);
    b.app->add_flag("--plot", b.plot, "emit a gnuplot script");
    for (const auto &k : cmds[c].keys)
      b.app->add_option("--" + flag_name(k.key), b.flags[k.key], k.help + " [" + k.key + "]");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  for (std::size_t c = 0; c < cmds.size(); ++c) {
    auto &b = bound[c];
    if (!b.app->parsed())
      continue;
    try {
      Settings settings(cmds[c].keys);
      if (!b.config.empty())
        settings.load_file(b.config);
      for (const auto &k : cmds[c].keys)
        if (b.app->count("--" + flag_name(k.key)) > 0)
          settings.set(k.key, b.flags[k.key]);

      fs::path out = b.out;
      if (out.empty()) {
        const char *root = std::getenv("LQC_OUTPUT_ROOT");
        out = fs::path(root ? root : "runs") / cmds[c].name;
      }
      fs::create_directories(out);
      RunManifest manifest(cmds[c].name, command_line(argc, argv));
      manifest.config(settings.values());
      Run run;
      run.out = out;
      run.name = fs::absolute(out).lexically_normal().filename().string();
      if (run.name.empty())
        run.name = fs::absolute(out).lexically_normal().parent_path().filename().string();
      run.jobs = b.jobs;
      run.plot = b.plot;
      run.manifest = &manifest;
      const int code = cmds[c].handler(settings, run);
      const auto mpath = manifest.write(out);
      std::cerr << "wrote " << mpath.string() << '\n';
      return code;
    } catch (const ConvergenceError &e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    } catch (const DomainError &e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}
