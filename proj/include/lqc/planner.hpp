#pragma once

// Choosing t_f/v0: schedules over the internuclear separation, and the
// finite-size detection that compares a small and a large lattice at fixed
// d/a0 and finds where their energies part.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lqc/errors.hpp"
#include "lqc/single_particle.hpp"

namespace lqc {

struct RatioSchedule {
  enum class Kind { linear, fixed, table };
  Kind kind = Kind::fixed;
  double intercept = 1.0;
  double slope = 0.0;
  std::vector<std::pair<double, double>> points;  ///< (d, ratio), sorted by d

  static RatioSchedule linear(double intercept, double slope) {
    return {Kind::linear, intercept, slope, {}};
  }
  static RatioSchedule fixed(double ratio) { return {Kind::fixed, ratio, 0.0, {}}; }
  static RatioSchedule table(std::vector<std::pair<double, double>> pts) {
    if (pts.empty())
      throw DomainError("ratio table is empty");
    std::sort(pts.begin(), pts.end());
    return {Kind::table, 0.0, 0.0, std::move(pts)};
  }
};

/// Tables interpolate linearly and hold their end values outside the range.
inline double schedule_ratio(const RatioSchedule &s, double d_lattice) {
  double r = 0.0;
  switch (s.kind) {
  case RatioSchedule::Kind::linear:
    r = s.intercept + s.slope * d_lattice;
    break;
  case RatioSchedule::Kind::fixed:
    r = s.intercept;
    break;
  case RatioSchedule::Kind::table: {
    const auto &p = s.points;
    if (d_lattice <= p.front().first) {
      r = p.front().second;
    } else if (d_lattice >= p.back().first) {
      r = p.back().second;
    } else {
      const auto hi = std::upper_bound(p.begin(), p.end(), d_lattice,
                                       [](double d, const auto &e) { return d < e.first; });
      const auto lo = hi - 1;
      const double w = (d_lattice - lo->first) / (hi->first - lo->first);
      r = lo->second + w * (hi->second - lo->second);
    }
    break;
  }
  }
  if (!(r > 0.0))
    throw DomainError("schedule gives a non-positive ratio " + std::to_string(r) + " at d = " +
                      std::to_string(d_lattice));
  return r;
}

/// Energy (Ry) of whatever system the planner is sizing, at lattice size N,
/// separation d in sites, and t_f/v0.
using SolverHandle = std::function<double(std::size_t n, int d_lattice, double ratio)>;

struct DepartureRow {
  int d_lattice = 0;
  double ratio = 0.0;
  double e_small = 0.0;
  double e_large = 0.0;
  double deviation = 0.0;  ///< |e_small - e_large|
  double allowed = 0.0;    ///< factor * |e_small - n|
};

struct CriticalRatioResult {
  double d_atomic = 0.0;
  double critical_ratio = std::numeric_limits<double>::quiet_NaN();
  double fit_m = 0.0;
  double fit_n = 0.0;  ///< asymptote of m x^-2 + n
  std::vector<DepartureRow> departure_table;
  bool converged = false;
  bool no_finite_size_signal = false;
  std::size_t iterations = 0;
  std::string message;
};

struct CriticalOptions {
  double factor = 0.1;     ///< finite-size error must stay this far below discretization error
  double min_ratio = 1.0;  ///< rows below violate inequality (a) and never enter the fit
  int d_min = 1;
  int d_max = 0;  ///< 0: min(30, N_small / 2)
  std::size_t max_iterations = 50;
};

/// Fixed point of: fit m x^-2 + n to the large-lattice energies inside the
/// window; the critical ratio is the last x before the first row whose
/// small/large gap exceeds factor * |E_small - n|; the window becomes
/// [min_ratio, critical].
inline CriticalRatioResult critical_ratio_from_rows(double d_atomic, std::vector<DepartureRow> rows,
                                                    bool same_size, const CriticalOptions &opt = {}) {
  CriticalRatioResult res;
  res.d_atomic = d_atomic;
  std::sort(rows.begin(), rows.end(), [](const auto &a, const auto &b) { return a.ratio < b.ratio; });
  for (auto &r : rows)
    r.deviation = std::abs(r.e_small - r.e_large);
  res.no_finite_size_signal = same_size;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].ratio >= opt.min_ratio)
      candidates.push_back(i);
  double hi = std::numeric_limits<double>::infinity();
  double prev_hi = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    std::vector<double> xs, ys;
    for (std::size_t i : candidates)
      if (rows[i].ratio <= hi) {
        xs.push_back(1.0 / (rows[i].ratio * rows[i].ratio));
        ys.push_back(rows[i].e_large);
      }
    if (xs.size() < 3) {
      res.message = "fewer than 3 points before departure; fit unconverged";
      res.departure_table = rows;
      return res;
    }
    const auto line = fit_line(xs, ys);
    res.fit_m = line.slope;
    res.fit_n = line.intercept;

    double critical = rows[candidates.back()].ratio;
    bool departed = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      auto &r = rows[candidates[c]];
      r.allowed = opt.factor * std::abs(r.e_small - res.fit_n);
      if (r.deviation > r.allowed) {
        departed = true;
        if (c == 0) {
          res.message = "departure at the first admissible ratio; no valid window";
          res.departure_table = rows;
          return res;
        }
        critical = rows[candidates[c - 1]].ratio;
        break;
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].ratio < opt.min_ratio)
        rows[i].allowed = opt.factor * std::abs(rows[i].e_small - res.fit_n);
    res.critical_ratio = critical;
    if (!departed && same_size)
      res.message = "no finite-size signal: lattices are identical";
    else if (!departed)
      res.message = "no departure inside the scanned range";
    if (critical == prev_hi) {
      res.converged = true;
      break;
    }
    prev_hi = critical;
    hi = critical;
  }
  if (!res.converged && res.message.empty())
    res.message = "window iteration did not settle";
  res.departure_table = rows;
  return res;
}

/// Scan d_lattice over [d_min, d_max] at ratio = d / (2 d_atomic), so every
/// point describes the same physical separation, on both lattices.
inline CriticalRatioResult critical_ratio(double d_atomic, std::size_t n_small, std::size_t n_large,
                                          const SolverHandle &solve, CriticalOptions opt = {}) {
  if (!(d_atomic > 0.0))
    throw DomainError("d_atomic must be positive");
  if (n_large < n_small)
    throw DomainError("N_large must not be smaller than N_small");
  if (opt.d_max == 0)
    opt.d_max = std::min<int>(30, static_cast<int>(n_small / 2));
  if (opt.d_min < 1 || opt.d_max < opt.d_min)
    throw DomainError("empty separation range");
  std::vector<DepartureRow> rows;
  for (int d = opt.d_min; d <= opt.d_max; ++d) {
    DepartureRow r;
    r.d_lattice = d;
    r.ratio = static_cast<double>(d) / (2.0 * d_atomic);
    r.e_small = solve(n_small, d, r.ratio);
    r.e_large = n_large == n_small ? r.e_small : solve(n_large, d, r.ratio);
    rows.push_back(r);
  }
  return critical_ratio_from_rows(d_atomic, std::move(rows), n_small == n_large, opt);
}

/// Wald-Wolfowitz runs test on residual signs: z near 0 means no trend,
/// strongly negative z means long same-sign runs.
struct SignRuns {
  std::size_t runs = 0;
  double expected = 0.0;
  double z = 0.0;
};

inline SignRuns sign_runs(const std::vector<double> &residuals) {
  SignRuns s;
  double pos = 0, neg = 0;
  int last = 0;
  for (double r : residuals) {
    const int sign = r > 0 ? 1 : (r < 0 ? -1 : 0);
    if (sign == 0)
      continue;
    (sign > 0 ? pos : neg) += 1;
    if (sign != last)
      ++s.runs;
    last = sign;
  }
  const double n = pos + neg;
  if (pos == 0 || neg == 0) {
    s.expected = 1.0;
    s.z = n > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
    return s;
  }
  s.expected = 2.0 * pos * neg / n + 1.0;
  const double var = 2.0 * pos * neg * (2.0 * pos * neg - n) / (n * n * (n - 1.0));
  s.z = var > 0 ? (static_cast<double>(s.runs) - s.expected) / std::sqrt(var) : 0.0;
  return s;
}

/// Residuals of the m x^-2 + n fit over the accepted window.
inline std::vector<double> window_residuals(const CriticalRatioResult &r, double min_ratio = 1.0) {
  std::vector<double> out;
  for (const auto &row : r.departure_table)
    if (row.ratio >= min_ratio && row.ratio <= r.critical_ratio)
      out.push_back(row.e_large - (r.fit_m / (row.ratio * row.ratio) + r.fit_n));
  return out;
}

} // namespace lqc
