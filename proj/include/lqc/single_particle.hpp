#pragma once

// One-electron lattice problems: matrix-free H_kin + H_nuc, its lowest
// eigenpairs, the hydrogen ratio scan, and the two fits used to judge
// discretization (error exponent) and finite size (Bohr radius).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqc/eigensolver.hpp"
#include "lqc/errors.hpp"
#include "lqc/lattice.hpp"
#include "lqc/one_body.hpp"

namespace lqc {

struct OrbitalField {
  LatticeSpec lattice;
  std::vector<double> values;

  double norm() const {
    double s = 0.0;
    for (double v : values)
      s += v * v;
    return std::sqrt(s);
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

struct Spectrum {
  std::vector<double> energies;  ///< ascending, lattice units
  std::vector<OrbitalField> orbitals;
  std::vector<double> residuals;
  std::size_t iterations = 0;
};

struct SolverSettings {
  double tol = 1e-8;
  std::size_t max_iterations = 4000;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  bool precondition = true;  ///< kinetic sine-transform preconditioner (open lattices)
  std::size_t max_subspace = 0;
};

inline OneBodyOperator bare_hamiltonian(const LatticeSpec &lattice, const ChemistryParams &params,
                                        OnSiteNucleus policy = OnSiteNucleus::reject) {
  auto w = nuclear_field(lattice, params, policy);
  for (double &v : w)
    v = -v;
  return OneBodyOperator(lattice, params.t_f, std::move(w));
}

/// (H_kin + H_nuc) psi.
inline std::vector<double> apply_hamiltonian(const OrbitalField &psi, const LatticeSpec &lattice,
                                             const ChemistryParams &params) {
  if (psi.values.size() != lattice.sites() || !(psi.lattice == lattice))
    throw DomainError("orbital is not defined on this lattice");
  return bare_hamiltonian(lattice, params).apply(psi.values);
}

namespace detail {

inline std::size_t first_significant(std::span<const double> v) {
  double vmax = 0.0;
  for (double x : v)
    vmax = std::max(vmax, std::abs(x));
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-6 * vmax)
      return i;
  return 0;
}

/// Sign convention plus a reproducible order inside (near-)degenerate levels.
inline void canonicalize(Spectrum &s) {
  for (auto &orb : s.orbitals) {
    const std::size_t i = first_significant(orb.values);
    if (orb.values[i] < 0.0)
      for (double &v : orb.values)
        v = -v;
  }
  std::vector<std::size_t> order(s.energies.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  auto lex_less = [&](std::size_t a, std::size_t b) {
    const auto &va = s.orbitals[a].values, &vb = s.orbitals[b].values;
    for (std::size_t i = 0; i < va.size(); ++i) {
      const bool sa = std::abs(va[i]) > 1e-10, sb = std::abs(vb[i]) > 1e-10;
      if (sa != sb)
        return sa;
      if (sa && std::abs(va[i] - vb[i]) > 1e-10)
        return va[i] > vb[i];
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ea = s.energies[a], eb = s.energies[b];
    if (std::abs(ea - eb) > 1e-8)
      return ea < eb;
    return lex_less(a, b);
  });
  Spectrum out;
  out.iterations = s.iterations;
  for (std::size_t i : order) {
    out.energies.push_back(s.energies[i]);
    out.orbitals.push_back(std::move(s.orbitals[i]));
    out.residuals.push_back(s.residuals[i]);
  }
  s = std::move(out);
}

} // namespace detail

/// k lowest eigenpairs of an arbitrary one-body operator. `guesses` seed the
/// search space (warm starts across self-consistent sweeps).
inline Spectrum solve_lowest(const OneBodyOperator &op, std::size_t k,
                             const SolverSettings &settings = {},
                             const std::vector<OrbitalField> *guesses = nullptr) {
  const std::size_t n = op.size();
  EigenOptions eo;
  eo.count = k;
  eo.tol = settings.tol;
  eo.max_iterations = settings.max_iterations;
  eo.seed = settings.seed;
  eo.max_subspace = settings.max_subspace;

  Eigen::MatrixXd guess;
  if (guesses && !guesses->empty()) {
    guess.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(guesses->size()));
    for (std::size_t j = 0; j < guesses->size(); ++j)
      guess.col(static_cast<Eigen::Index>(j)) =
          Eigen::Map<const Eigen::VectorXd>((*guesses)[j].values.data(), static_cast<Eigen::Index>(n));
  }
  auto apply = [&](std::span<const double> in, std::span<double> out) { op.apply(in, out); };

  EigenResult r;
  const Eigen::MatrixXd *g = guess.size() ? &guess : nullptr;
  if (settings.precondition && op.lattice().boundary() == Boundary::open) {
    KineticPreconditioner prec(op.lattice(), op.hopping());
    r = block_davidson(n, apply, prec, eo, g);
  } else {
    r = block_davidson(n, apply, IdentityPreconditioner{}, eo, g);
  }
  if (!r.converged)
    throw ConvergenceError("eigensolver did not converge after " + std::to_string(r.iterations) +
                               " iterations; residuals: " + describe_residuals(r.residuals),
                           r.residuals);

  Spectrum s;
  s.iterations = r.iterations;
  for (Eigen::Index j = 0; j < r.values.size(); ++j) {
    s.energies.push_back(r.values(j));
    OrbitalField orb{op.lattice(), std::vector<double>(n)};
    Eigen::Map<Eigen::VectorXd>(orb.values.data(), static_cast<Eigen::Index>(n)) = r.vectors.col(j);
    s.orbitals.push_back(std::move(orb));
    s.residuals.push_back(r.residuals[static_cast<std::size_t>(j)]);
  }
  detail::canonicalize(s);
  return s;
}

inline Spectrum lowest_eigenpairs(const LatticeSpec &lattice, const ChemistryParams &params,
                                  std::size_t k, double tol, SolverSettings settings = {}) {
  settings.tol = tol;
  return solve_lowest(bare_hamiltonian(lattice, params), k, settings);
}

inline ChemistryParams hydrogen_params(std::size_t n, double ratio) {
  return params_for_ratio(ratio, {Nucleus{1.0, centered_nucleus(n)}}, 1);
}

struct ScanRow {
  double ratio = 0.0;
  std::size_t level = 0;
  double energy_ry = 0.0;
  double residual = 0.0;
};

struct HydrogenScan {
  std::vector<ScanRow> rows;  ///< ordered by (ratio, level)
  std::vector<OrbitalField> ground;  ///< lowest orbital per ratio
};

/// Hydrogen spectra for a list of t_f/v0 ratios (v0 = 1).
inline HydrogenScan hydrogen_scan(std::size_t n, const std::vector<double> &ratios, std::size_t k,
                                  SolverSettings settings = {}) {
  const LatticeSpec lattice(n);
  HydrogenScan scan;
  for (double ratio : ratios) {
    if (!(ratio > 0.0))
      throw DomainError("ratios must be positive");
    const auto params = hydrogen_params(n, ratio);
    Spectrum s;
    try {
      // Residual tolerance scales with the Rydberg so accuracy is uniform in Ry.
      s = solve_lowest(bare_hamiltonian(lattice, params), k,
                       [&] { auto st = settings; st.tol = settings.tol * params.rydberg(); return st; }());
    } catch (const ConvergenceError &e) {
      throw ConvergenceError("ratio " + std::to_string(ratio) + ": " + e.what(), e.residuals());
    }
    for (std::size_t l = 0; l < s.energies.size(); ++l)
      scan.rows.push_back({ratio, l, to_atomic_units(s.energies[l], params),
                           s.residuals[l] / params.rydberg()});
    scan.ground.push_back(std::move(s.orbitals.front()));
  }
  return scan;
}

// ---------------------------------------------------------------- fits

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2)
    throw DomainError("line fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (!(std::abs(den) > 0.0))
    throw DomainError("line fit is degenerate (all abscissae equal)");
  LineFit f;
  f.slope = (dn * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / dn;
  f.points = n;
  return f;
}

struct BohrFit {
  double a0 = 0.0;          ///< amplitude convention psi ~ exp(-r/a0)
  double a0_density = 0.0;  ///< same slope read as density ~ exp(-r/a0)
  std::size_t bins_used = 0;
  std::size_t bins_requested = 30;
  std::vector<double> radius;     ///< mean radius per shell
  std::vector<double> amplitude;  ///< shell-averaged amplitude / central value
};

/// Spherically average the orbital in unit-width shells around `center`,
/// normalize by the innermost shell, and fit log-amplitude against radius.
inline BohrFit fit_bohr_radius(const OrbitalField &ground, const Vec3 &center,
                               std::size_t bins = 30) {
  const auto &lat = ground.lattice;
  const std::size_t nshell = static_cast<std::size_t>(std::ceil(std::sqrt(3.0) * static_cast<double>(lat.n()))) + 2;
  std::vector<double> sum_amp(nshell, 0.0), sum_r(nshell, 0.0);
  std::vector<std::size_t> count(nshell, 0);
  const double sign = ground.values[detail::first_significant(ground.values)] < 0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < ground.values.size(); ++i) {
    const double r = lat.distance(to_point(lat.unflatten(i)), center);
    const auto b = static_cast<std::size_t>(std::floor(r));
    if (b >= nshell)
      continue;
    sum_amp[b] += sign * ground.values[i];
    sum_r[b] += r;
    ++count[b];
  }
  BohrFit fit;
  fit.bins_requested = bins;
  std::vector<double> xs, ys;
  double central = 0.0;
  for (std::size_t b = 0; b < nshell && xs.size() < bins; ++b) {
    if (count[b] == 0)
      continue;
    const double amp = sum_amp[b] / static_cast<double>(count[b]);
    if (!(amp > 0.0))
      break;
    if (central == 0.0)
      central = amp;
    fit.radius.push_back(sum_r[b] / static_cast<double>(count[b]));
    fit.amplitude.push_back(amp / central);
    xs.push_back(fit.radius.back());
    ys.push_back(std::log(fit.amplitude.back()));
  }
  fit.bins_used = xs.size();
  if (xs.size() < 2)
    throw DomainError("fewer than two usable radial bins");
  const auto line = fit_line(xs, ys);
  if (!(line.slope < 0.0))
    throw DomainError("radial amplitude does not decay; cannot fit a Bohr radius");
  fit.a0 = -1.0 / line.slope;
  fit.a0_density = fit.a0 / 2.0;
  return fit;
}

struct ExponentFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  std::size_t points = 0;
};

/// Slope of log|E0 - reference| against log(ratio) over lo < ratio < hi,
/// taking the lowest level of each ratio.
inline ExponentFit fit_error_exponent(const std::vector<ScanRow> &rows, double reference = -1.0,
                                      double lo = 1.0,
                                      double hi = std::numeric_limits<double>::infinity()) {
  std::map<double, double> ground;
  for (const auto &r : rows) {
    auto it = ground.find(r.ratio);
    if (it == ground.end() || r.energy_ry < it->second)
      ground[r.ratio] = r.energy_ry;
  }
  std::vector<double> xs, ys;
  bool degenerate = false;
  for (const auto &[ratio, e] : ground) {
    if (!(ratio > lo && ratio < hi))
      continue;
    const double err = std::abs(e - reference);
    if (!(err > 0.0) || !std::isfinite(err)) {
      degenerate = true;
      continue;
    }
    xs.push_back(std::log(ratio));
    ys.push_back(std::log(err));
  }
  if (xs.empty() && !degenerate)
    throw DomainError("no ratios inside the valid window " + std::to_string(lo) +
                      " < t_f/v0 < " + std::to_string(hi) +
                      " (inequality (a): 1 << 2 t_f/v0 << N/N_e^(1/3))");
  if (degenerate)
    throw DomainError("degenerate residuals: cannot fit an error exponent");
  if (xs.size() < 4)
    throw DomainError("error exponent fit needs at least 4 ratios inside the window, got " +
                      std::to_string(xs.size()));
  const auto line = fit_line(xs, ys);
  return {line.slope, std::exp(line.intercept), line.points};
}

} // namespace lqc
