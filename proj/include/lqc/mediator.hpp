#pragma once

// The Mott-insulator mediator: a single spin excitation shared between the
// a-atoms under the fermions and a periodic band of b-atoms. Its bound-state
// energy, as a function of the fermion positions, is the effective
// fermion-fermion interaction.
//
// Energies are in units of whatever J is given in; lengths in Mott sites.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "lqc/errors.hpp"

namespace lqc {

struct MediatorParams {
  double j = 1.0;      ///< b-hopping J
  double j_c = 1.0;    ///< cavity-mediated a-a rate J_c
  double u = 10.0;     ///< on-site repulsion under a fermion
  double delta = 2.0;  ///< detuning of the a-atoms
  double g = 0.1;      ///< a-b coupling
  double j_f = 0.0;    ///< bare fermion hopping
  std::size_t n_m = 10;
  int n_e = 1;

  double rho() const noexcept {
    const double n = static_cast<double>(n_m);
    return static_cast<double>(n_e) / (n * n * n);
  }
  /// Energy of the symmetric a-state before coupling to the b band.
  double e0() const noexcept { return u + delta + rho() * j_c; }
  double gap() const noexcept { return e0() - 6.0 * j; }

  void validate() const {
    if (n_m < 2)
      throw DomainError("Mott lattice needs at least 2 sites per side");
    if (n_e < 1)
      throw DomainError("n_e must be at least 1");
    if (!(rho() > 0.0 && rho() < 1.0))
      throw DomainError("filling rho_m = n_e / n_m^3 must lie in (0, 1)");
    if (!(j > 0.0))
      throw DomainError("J must be positive");
    if (!(gap() > 0.0)) {
      std::ostringstream os;
      os << "gap invariant violated: u + delta + rho_m j_c - 6 j = " << gap() << " <= 0";
      throw DomainError(os.str());
    }
  }
};

using MottSite = std::array<long, 3>;
using FermionConfig = std::vector<MottSite>;

inline void validate_config(const FermionConfig &config, std::size_t n_m) {
  if (config.empty())
    throw DomainError("fermion configuration is empty");
  std::set<MottSite> seen;
  for (const auto &s : config) {
    for (long c : s)
      if (c < 0 || c >= static_cast<long>(n_m))
        throw DomainError("fermion position outside the Mott grid");
    if (!seen.insert(s).second)
      throw DomainError("fermion positions must be pairwise distinct");
  }
}

inline double dispersion(const std::array<double, 3> &k, double j) {
  return 2.0 * j * (std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2]));
}

/// Periodic b-band on an n_m^3 grid. Sums over the k-grid use the k -> -k
/// symmetry per axis: only the n_m/2 + 1 distinct cosines are visited, each
/// with its multiplicity.
class MottBand {
public:
  MottBand(double j, std::size_t n_m) : j_(j), n_(n_m) {
    if (n_m < 2)
      throw DomainError("Mott lattice needs at least 2 sites per side");
    const std::size_t half = n_ / 2;
    for (std::size_t q = 0; q <= half; ++q) {
      cos_.push_back(std::cos(2.0 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(n_)));
      weight_.push_back((q == 0 || 2 * q == n_) ? 1.0 : 2.0);
    }
  }

  double j() const noexcept { return j_; }
  std::size_t n() const noexcept { return n_; }
  double band_top() const noexcept { return 6.0 * j_; }

  /// G(E, r) for several r in one pass over the k-grid.
  std::vector<double> green(double e, const std::vector<MottSite> &rs) const {
    check_energy(e);
    const std::size_t nq = cos_.size(), nr = rs.size();
    // phase[r][axis][q] = cos(2 pi q r_axis / n)
    std::vector<double> phase(nr * 3 * nq);
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t q = 0; q < nq; ++q)
          phase[(r * 3 + a) * nq + q] =
              std::cos(2.0 * std::numbers::pi * static_cast<double>(q) *
                       static_cast<double>(rs[r][a]) / static_cast<double>(n_));
    std::vector<double> acc(nr, 0.0), accy(nr), accz(nr);
    const double tj = 2.0 * j_;
    for (std::size_t qx = 0; qx < nq; ++qx) {
      std::fill(accy.begin(), accy.end(), 0.0);
      for (std::size_t qy = 0; qy < nq; ++qy) {
        std::fill(accz.begin(), accz.end(), 0.0);
        const double exy = e - tj * (cos_[qx] + cos_[qy]);
        for (std::size_t qz = 0; qz < nq; ++qz) {
          const double inv = weight_[qz] / (exy - tj * cos_[qz]);
          for (std::size_t r = 0; r < nr; ++r)
            accz[r] += inv * phase[(r * 3 + 2) * nq + qz];
        }
        for (std::size_t r = 0; r < nr; ++r)
          accy[r] += weight_[qy] * phase[(r * 3 + 1) * nq + qy] * accz[r];
      }
      for (std::size_t r = 0; r < nr; ++r)
        acc[r] += weight_[qx] * phase[(r * 3 + 0) * nq + qx] * accy[r];
    }
    const double vol = static_cast<double>(n_ * n_ * n_);
    for (double &v : acc)
      v /= vol;
    return acc;
  }

  double green(double e, const MottSite &r) const { return green(e, std::vector<MottSite>{r})[0]; }

  /// (1/n^3) sum_k |sum_m exp(i k.j_m)|^2 / (E - omega_k), summed literally
  /// over the full k-grid. Independent of the Green-function path.
  double structure_sum(double e, const FermionConfig &config) const {
    check_energy(e);
    const std::size_t nc = config.size();
    std::vector<std::complex<double>> tab(nc * 3 * n_);
    for (std::size_t m = 0; m < nc; ++m)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t q = 0; q < n_; ++q)
          tab[(m * 3 + a) * n_ + q] = std::polar(
              1.0, 2.0 * std::numbers::pi * static_cast<double>(q * static_cast<std::size_t>(config[m][a]) % n_) /
                       static_cast<double>(n_));
    std::vector<double> c(n_);
    for (std::size_t q = 0; q < n_; ++q)
      c[q] = 2.0 * j_ * std::cos(2.0 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(n_));
    std::vector<std::complex<double>> sxy(nc);
    double total = 0.0;
    for (std::size_t qx = 0; qx < n_; ++qx)
      for (std::size_t qy = 0; qy < n_; ++qy) {
        for (std::size_t m = 0; m < nc; ++m)
          sxy[m] = tab[(m * 3) * n_ + qx] * tab[(m * 3 + 1) * n_ + qy];
        const double exy = e - c[qx] - c[qy];
        double row = 0.0;
        for (std::size_t qz = 0; qz < n_; ++qz) {
          std::complex<double> s = 0.0;
          for (std::size_t m = 0; m < nc; ++m)
            s += sxy[m] * tab[(m * 3 + 2) * n_ + qz];
          row += std::norm(s) / (exy - c[qz]);
        }
        total += row;
      }
    return total / static_cast<double>(n_ * n_ * n_);
  }

private:
  void check_energy(double e) const {
    if (!(e > band_top())) {
      std::ostringstream os;
      os << "energy " << e << " lies inside the b band (pole at or below 6J = " << band_top() << ")";
      throw DomainError(os.str());
    }
  }

  double j_;
  std::size_t n_;
  std::vector<double> cos_, weight_;
};

inline double green_function(double e, const MottSite &r, double j, std::size_t n_m) {
  return MottBand(j, n_m).green(e, r);
}

inline double localization_length(const MediatorParams &p) {
  p.validate();
  return std::sqrt(p.j / p.gap());
}

struct YukawaParams {
  double v0 = 0.0;
  double c = 0.0;
  double length = 0.0;
};

inline YukawaParams yukawa_parameters(const MediatorParams &p) {
  YukawaParams y;
  y.length = localization_length(p);
  y.v0 = p.g * p.g / (2.0 * std::numbers::pi * static_cast<double>(p.n_e) * p.j);
  y.c = 0.25 * p.g * p.g / p.j - static_cast<double>(p.n_e) * y.v0 / (2.0 * y.length);
  return y;
}

inline double renormalized_hopping(double j_f, int n_e) {
  if (n_e < 1)
    throw DomainError("n_e must be at least 1");
  if (n_e == 1)
    return j_f;
  return j_f * static_cast<double>(n_e - 1) / static_cast<double>(n_e);
}

struct BoundStateSolution {
  enum class Method { closed_equation, exact_diag };
  double energy = 0.0;
  /// energy - e0, kept separately because it is many orders smaller than e0.
  double shift = 0.0;
  double e0 = 0.0;
  Method method = Method::closed_equation;
  double overlap_symmetric = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
};

enum class GreenPath { green_table, structure_factor };

namespace detail {

/// (1/n^3) sum_k |S_k|^2 / (E - omega_k) through G(E, 0) and G at every pair
/// separation.
inline double pair_sum(const MottBand &band, double e, const FermionConfig &config) {
  std::vector<MottSite> rs{{0, 0, 0}};
  for (std::size_t a = 0; a < config.size(); ++a)
    for (std::size_t b = a + 1; b < config.size(); ++b)
      rs.push_back({config[b][0] - config[a][0], config[b][1] - config[a][1],
                    config[b][2] - config[a][2]});
  const auto g = band.green(e, rs);
  double s = static_cast<double>(config.size()) * g[0];
  for (std::size_t i = 1; i < g.size(); ++i)
    s += 2.0 * g[i];
  return s;
}

} // namespace detail

/// Root of E = e0 + (g^2/n_e) (1/n^3) sum_k |S_k|^2/(E - omega_k) above the
/// band, solved for the shift E - e0.
inline BoundStateSolution bound_state_closed(const FermionConfig &config, const MediatorParams &p,
                                             const MottBand *band = nullptr,
                                             GreenPath path = GreenPath::green_table) {
  p.validate();
  validate_config(config, p.n_m);
  if (static_cast<int>(config.size()) != p.n_e)
    throw DomainError("configuration size differs from n_e");
  std::optional<MottBand> own;
  if (!band) {
    own.emplace(p.j, p.n_m);
    band = &*own;
  } else if (band->n() != p.n_m || band->j() != p.j) {
    throw DomainError("Mott band does not match the mediator parameters");
  }

  BoundStateSolution sol;
  sol.e0 = p.e0();
  sol.method = BoundStateSolution::Method::closed_equation;
  const double coupling = p.g * p.g / static_cast<double>(p.n_e);
  if (coupling == 0.0) {
    sol.energy = sol.e0;
    return sol;
  }
  auto sum = [&](double e) {
    return path == GreenPath::green_table ? detail::pair_sum(*band, e, config)
                                          : band->structure_sum(e, config);
  };
  auto f = [&](double shift) { return shift - coupling * sum(sol.e0 + shift); };

  const double lo = 6.0 * p.j * (1.0 + 1e-9) - sol.e0;
  const double hi = p.g * p.g * static_cast<double>(p.n_e) / p.gap();
  const double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    std::ostringstream os;
    os << "no sign change in bracket [" << sol.e0 + lo << ", " << sol.e0 + hi
       << "]; residuals " << flo << ", " << fhi;
    throw DomainError(os.str());
  }
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  const double fa = f(a), fb = f(b);
  sol.shift = std::abs(fa) <= std::abs(fb) ? a : b;
  sol.residual = std::min(std::abs(fa), std::abs(fb));
  sol.energy = sol.e0 + sol.shift;
  return sol;
}

/// Dense single-excitation H_M: a-sector (delta, u at fermions, rank-one
/// cavity j_c/n^3) and periodic b-sector (+J hopping) coupled site by site
/// with g. Returns the eigenstate with the largest weight on the symmetric
/// a-state over the fermion sites.
inline BoundStateSolution bound_state_exact(const FermionConfig &config, const MediatorParams &p,
                                            std::size_t dense_limit = 8192) {
  p.validate();
  validate_config(config, p.n_m);
  const std::size_t n = p.n_m;
  const std::size_t vol = n * n * n;
  const std::size_t dim = 2 * vol;
  if (dim > dense_limit)
    throw DomainError("dense dimension " + std::to_string(dim) + " exceeds limit " +
                      std::to_string(dense_limit));
  if (n < 3)
    throw DomainError("exact diagonalization needs n_m >= 3");
  const auto idx = [n](std::size_t x, std::size_t y, std::size_t z) { return x + n * (y + n * z); };

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const double cav = p.j_c / static_cast<double>(vol);
  for (std::size_t a = 0; a < vol; ++a) {
    for (std::size_t b = 0; b < vol; ++b)
      h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = cav;
    h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += p.delta;
    h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(vol + a)) = p.g;
    h(static_cast<Eigen::Index>(vol + a), static_cast<Eigen::Index>(a)) = p.g;
  }
  for (const auto &s : config) {
    const auto i = static_cast<Eigen::Index>(idx(static_cast<std::size_t>(s[0]), static_cast<std::size_t>(s[1]),
                                                 static_cast<std::size_t>(s[2])));
    h(i, i) += p.u;
  }
  for (std::size_t z = 0; z < n; ++z)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const auto i = static_cast<Eigen::Index>(vol + idx(x, y, z));
        for (const auto nb : {idx((x + 1) % n, y, z), idx(x, (y + 1) % n, z), idx(x, y, (z + 1) % n)}) {
          const auto k = static_cast<Eigen::Index>(vol + nb);
          h(i, k) += p.j;
          h(k, i) += p.j;
        }
      }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const auto &vec = es.eigenvectors();
  const double norm = 1.0 / std::sqrt(static_cast<double>(config.size()));
  Eigen::Index best = 0;
  double best_overlap = -1.0;
  for (Eigen::Index c = 0; c < vec.cols(); ++c) {
    double amp = 0.0;
    for (const auto &s : config)
      amp += norm * vec(static_cast<Eigen::Index>(idx(static_cast<std::size_t>(s[0]), static_cast<std::size_t>(s[1]),
                                                      static_cast<std::size_t>(s[2]))),
                        c);
    if (amp * amp > best_overlap) {
      best_overlap = amp * amp;
      best = c;
    }
  }
  BoundStateSolution sol;
  sol.method = BoundStateSolution::Method::exact_diag;
  sol.e0 = p.e0();
  sol.energy = es.eigenvalues()(best);
  sol.shift = sol.energy - sol.e0;
  sol.overlap_symmetric = best_overlap;
  return sol;
}

// ------------------------------------------------------------ interaction

/// Two fermions along x around the grid centre, (m - ceil(d/2), m, m) and
/// (m + floor(d/2), m, m).
inline FermionConfig fermion_pair(std::size_t n_m, long d) {
  const long m = static_cast<long>(n_m / 2);
  return {{m - (d + 1) / 2, m, m}, {m + d / 2, m, m}};
}

struct InteractionPoint {
  long d = 0;
  double e2 = 0.0;
  double e1 = 0.0;
  double v_eff = 0.0;
  double shift2 = 0.0;  ///< E_2(d) - (u + delta + rho_m j_c)
  double yukawa = 0.0;  ///< C + (v0/d) exp(-d/L), the closed-form estimate of shift2
};

struct InteractionCurve {
  MediatorParams params;
  YukawaParams yukawa;
  BoundStateSolution::Method method = BoundStateSolution::Method::closed_equation;
  std::vector<InteractionPoint> points;
};

/// V_eff(d) = E_2(d) - E_1, the two-fermion bound state relative to one
/// fermion at the centre. `p.n_e` is ignored; both sectors are built here.
inline InteractionCurve effective_interaction_curve(const std::vector<long> &d_values,
                                                    MediatorParams p,
                                                    BoundStateSolution::Method method =
                                                        BoundStateSolution::Method::closed_equation,
                                                    GreenPath path = GreenPath::green_table) {
  const bool closed = method == BoundStateSolution::Method::closed_equation;
  std::optional<MottBand> band;
  if (closed)
    band.emplace(p.j, p.n_m);
  auto solve = [&](const FermionConfig &c, const MediatorParams &q) {
    return closed ? bound_state_closed(c, q, &*band, path) : bound_state_exact(c, q);
  };

  InteractionCurve curve;
  curve.method = method;
  MediatorParams one = p;
  one.n_e = 1;
  const long m = static_cast<long>(p.n_m / 2);
  const auto s1 = solve({{m, m, m}}, one);
  p.n_e = 2;
  curve.params = p;
  curve.yukawa = yukawa_parameters(p);
  for (long d : d_values) {
    if (d < 1 || d >= static_cast<long>(p.n_m))
      throw DomainError("separation must lie in [1, n_m)");
    const auto s2 = solve(fermion_pair(p.n_m, d), p);
    InteractionPoint pt;
    pt.d = d;
    pt.e2 = s2.energy;
    pt.e1 = s1.energy;
    // Differences of the shifts keep digits that e0 would swamp.
    pt.v_eff = (s2.e0 - s1.e0) + (s2.shift - s1.shift);
    pt.shift2 = s2.shift;
    pt.yukawa = curve.yukawa.c + curve.yukawa.v0 / static_cast<double>(d) *
                                     std::exp(-static_cast<double>(d) / curve.yukawa.length);
    curve.points.push_back(pt);
  }
  return curve;
}

struct YukawaFit {
  double v0 = 0.0;
  double length = 0.0;
  double c = 0.0;
  double rms_relative = 0.0;
};

/// Least squares for C + (v0/r) exp(-r/L) with residuals relative to the
/// data. For fixed L the model is linear in (C, v0); L is found by a 1-D
/// minimization of the projected residual over log L.
inline YukawaFit fit_yukawa(const std::vector<double> &r, const std::vector<double> &v,
                            double length_min = 0.2, double length_max = 1e4) {
  if (r.size() != v.size() || r.size() < 4)
    throw DomainError("yukawa fit needs at least 4 matching samples");
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!(r[i] > 0.0) || !(v[i] != 0.0))
      throw DomainError("yukawa fit needs r > 0 and non-zero data");
  const auto rows = static_cast<Eigen::Index>(r.size());
  auto solve_linear = [&](double length, Eigen::Vector2d &coef) {
    Eigen::MatrixXd a(rows, 2);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double w = 1.0 / std::abs(v[static_cast<std::size_t>(i)]);
      const double ri = r[static_cast<std::size_t>(i)];
      a(i, 0) = w;
      a(i, 1) = w * std::exp(-ri / length) / ri;
      b(i) = w * v[static_cast<std::size_t>(i)];
    }
    coef = a.colPivHouseholderQr().solve(b);
    return (a * coef - b).squaredNorm();
  };
  auto objective = [&](double log_length) {
    Eigen::Vector2d coef;
    return solve_linear(std::exp(log_length), coef);
  };
  const auto best = boost::math::tools::brent_find_minima(objective, std::log(length_min),
                                                          std::log(length_max), 52);
  YukawaFit fit;
  fit.length = std::exp(best.first);
  Eigen::Vector2d coef;
  const double rss = solve_linear(fit.length, coef);
  fit.c = coef(0);
  fit.v0 = coef(1);
  fit.rms_relative = std::sqrt(rss / static_cast<double>(rows));
  return fit;
}

// ------------------------------------------------------------ conditions

struct ConditionReport {
  double a_lower = 0.0;  ///< 2 t_f / v0 against 1
  double a_upper = 0.0;  ///< N / n_e^(1/3) against 2 t_f / v0
  double b = 0.0;        ///< u / j_c
  double c_jf = 0.0;     ///< j_c rho / sqrt(n_e) against j_f
  double c_v0 = 0.0;     ///< j_c rho / sqrt(n_e) against v0
  double d = 0.0;        ///< j (N/L)^2 against v0 n_e^(7/3)
  double e_lower = 0.0;  ///< L / N
  double e_upper = 0.0;  ///< n_m / L
  double threshold = 10.0;
  double length = 0.0;

  bool a() const noexcept { return a_lower >= threshold && a_upper >= threshold; }
  bool b_ok() const noexcept { return b >= threshold; }
  bool c() const noexcept { return c_jf >= threshold && c_v0 >= threshold; }
  bool d_ok() const noexcept { return d >= threshold; }
  bool e() const noexcept { return e_lower >= threshold && e_upper >= threshold; }
  bool all() const noexcept { return a() && b_ok() && c() && d_ok() && e(); }

  /// Satisfied flags in the order a, b, c, d, e.
  std::array<bool, 5> satisfied() const noexcept { return {a(), b_ok(), c(), d_ok(), e()}; }
};

namespace detail {
inline double safe_ratio(double num, double den) {
  if (den == 0.0)
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return num / den;
}
} // namespace detail

/// Margins of the validity inequalities as (dominant side) / (subordinate
/// side). A closed gap is reported as L = inf rather than thrown.
inline ConditionReport check_conditions(const MediatorParams &p, std::size_t lattice_n, double t_f,
                                        double v0, double threshold = 10.0) {
  ConditionReport r;
  r.threshold = threshold;
  const double ne = static_cast<double>(p.n_e);
  const double n = static_cast<double>(lattice_n);
  const double bohr = detail::safe_ratio(2.0 * t_f, v0);
  r.length = p.gap() > 0.0 ? std::sqrt(p.j / p.gap()) : std::numeric_limits<double>::infinity();
  r.a_lower = bohr;
  r.a_upper = detail::safe_ratio(n / std::cbrt(ne), bohr);
  r.b = detail::safe_ratio(p.u, p.j_c);
  const double cavity = p.j_c * p.rho() / std::sqrt(ne);
  r.c_jf = detail::safe_ratio(cavity, p.j_f);
  r.c_v0 = detail::safe_ratio(cavity, v0);
  r.d = std::isfinite(r.length)
            ? detail::safe_ratio(p.j * (n / r.length) * (n / r.length), v0 * std::pow(ne, 7.0 / 3.0))
            : 0.0;
  r.e_lower = r.length / n;
  r.e_upper = detail::safe_ratio(static_cast<double>(p.n_m), r.length);
  return r;
}

/// Condition (d) with the electron repulsion estimated from an actual
/// density, V_ee ~ v0 (1/a0) (n_e - 1)^(2/3) sum rho^(4/3), against the gap.
inline double condition_d_density(const MediatorParams &p, const std::vector<double> &density,
                                  double t_f, double v0) {
  double s = 0.0;
  for (double r : density)
    s += std::pow(std::max(r, 0.0), 4.0 / 3.0);
  const double a0 = 2.0 * t_f / v0;
  const double vee = v0 / a0 * std::pow(static_cast<double>(p.n_e - 1), 2.0 / 3.0) * s;
  return detail::safe_ratio(p.gap(), vee);
}

} // namespace lqc
