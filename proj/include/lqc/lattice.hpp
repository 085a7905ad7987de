#pragma once

// Cubic lattice geometry, the 1/r and screened interaction kernels, and the
// conversion between lattice energies and atomic units.
//
// Conventions used everywhere in the library:
//   * lattice spacing a = 1, all lengths in sites;
//   * flat index i = x + N*(y + N*z) (x fastest);
//   * energies stay in lattice units until an explicit conversion.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "lqc/errors.hpp"

namespace lqc {

using Vec3 = std::array<double, 3>;
using Site = std::array<std::size_t, 3>;

enum class Boundary { open, periodic };

inline const char *to_string(Boundary b) {
  return b == Boundary::open ? "open" : "periodic";
}

class LatticeSpec {
public:
  LatticeSpec() = default;
  explicit LatticeSpec(std::size_t n, Boundary boundary = Boundary::open)
      : n_(n), boundary_(boundary) {
    if (n < 2)
      throw DomainError("lattice needs at least 2 sites per side, got " +
                        std::to_string(n));
  }

  std::size_t n() const noexcept { return n_; }
  Boundary boundary() const noexcept { return boundary_; }
  std::size_t sites() const noexcept { return n_ * n_ * n_; }

  std::size_t flatten(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + n_ * (y + n_ * z);
  }
  std::size_t flatten(const Site &s) const noexcept { return flatten(s[0], s[1], s[2]); }

  Site unflatten(std::size_t i) const noexcept {
    return {i % n_, (i / n_) % n_, i / (n_ * n_)};
  }

  /// Distance between two points; minimum image only on periodic lattices.
  double distance(const Vec3 &a, const Vec3 &b) const noexcept {
    double s = 0.0;
    const double len = static_cast<double>(n_);
    for (int d = 0; d < 3; ++d) {
      double delta = std::abs(a[d] - b[d]);
      if (boundary_ == Boundary::periodic)
        delta = std::min(delta, len - std::fmod(delta, len));
      s += delta * delta;
    }
    return std::sqrt(s);
  }

  bool contains(const Vec3 &p) const noexcept {
    const double hi = static_cast<double>(n_ - 1);
    for (double c : p)
      if (!(c >= 0.0 && c <= hi))
        return false;
    return true;
  }

  friend bool operator==(const LatticeSpec &, const LatticeSpec &) = default;

private:
  std::size_t n_ = 2;
  Boundary boundary_ = Boundary::open;
};

inline Vec3 to_point(const Site &s) {
  return {static_cast<double>(s[0]), static_cast<double>(s[1]),
          static_cast<double>(s[2])};
}

struct Nucleus {
  double charge = 1.0;
  Vec3 pos{};
};

struct ChemistryParams {
  double t_f = 1.0;  ///< fermion hopping
  double v0 = 1.0;   ///< interaction strength
  std::vector<Nucleus> nuclei;
  int n_e = 1;

  void validate() const {
    if (!(t_f > 0.0) || !std::isfinite(t_f))
      throw DomainError("t_f must be positive");
    if (!(v0 > 0.0) || !std::isfinite(v0))
      throw DomainError("v0 must be positive");
    if (n_e < 1)
      throw DomainError("n_e must be at least 1");
    for (const auto &nuc : nuclei)
      if (!(nuc.charge > 0.0))
        throw DomainError("nuclear charge must be positive");
  }

  /// a0 / a
  double bohr_radius() const noexcept { return 2.0 * t_f / v0; }
  double rydberg() const noexcept { return v0 * v0 / (4.0 * t_f); }
  double ratio() const noexcept { return t_f / v0; }
};

/// Parameters with v0 = 1 and t_f = ratio; the scale used by scans.
inline ChemistryParams params_for_ratio(double ratio, std::vector<Nucleus> nuclei,
                                        int n_e) {
  ChemistryParams p;
  p.v0 = 1.0;
  p.t_f = ratio;
  p.nuclei = std::move(nuclei);
  p.n_e = n_e;
  p.validate();
  return p;
}

/// Interaction kernel. `length` is infinite for the bare Coulomb form.
struct PotentialKind {
  enum class Form { coulomb, yukawa };
  Form form = Form::coulomb;
  double length = std::numeric_limits<double>::infinity();
  double offset = 0.0;

  static PotentialKind coulomb() { return {}; }
  static PotentialKind yukawa(double length, double offset = 0.0) {
    if (!(length > 0.0))
      throw DomainError("yukawa length must be positive");
    return {Form::yukawa, length, offset};
  }
};

/// V(r) with the lattice cutoff V(0) = pi * v0.
inline double potential_eval(const PotentialKind &kind, double v0, double r) {
  const double c = kind.form == PotentialKind::Form::yukawa ? kind.offset : 0.0;
  if (r <= 0.0)
    return c + std::numbers::pi * v0;
  double v = v0 / r;
  if (kind.form == PotentialKind::Form::yukawa && std::isfinite(kind.length))
    v *= std::exp(-r / kind.length);
  return c + v;
}

/// Where nuclei sit relative to the lattice: shifted off-site along one axis.
struct OffsetConvention {
  int axis = 1;
  double shift = 0.5;
};

inline std::size_t center_index(std::size_t n) { return n / 2; }

/// Single nucleus at (m, m + 1/2, m) with m = floor(N/2).
inline Vec3 centered_nucleus(std::size_t n, OffsetConvention off = {}) {
  const double m = static_cast<double>(center_index(n));
  Vec3 p{m, m, m};
  p[off.axis] += off.shift;
  return p;
}

/// Two nuclei separated by d sites along x: (m - ceil(d/2), ., .) and
/// (m + floor(d/2), ., .), both carrying the same off-site shift.
inline std::array<Vec3, 2> nucleus_pair(std::size_t n, int d, OffsetConvention off = {}) {
  if (d < 0)
    throw DomainError("separation must be non-negative");
  const double m = static_cast<double>(center_index(n));
  Vec3 a = centered_nucleus(n, off), b = a;
  a[0] = m - std::ceil(d / 2.0);
  b[0] = m + std::floor(d / 2.0);
  return {a, b};
}

enum class OnSiteNucleus { reject, cutoff };

/// W(j) = sum_n Z_n v0 / |j - r_n|. The Hamiltonian uses -W.
inline std::vector<double> nuclear_field(const LatticeSpec &lattice,
                                         const ChemistryParams &params,
                                         OnSiteNucleus policy = OnSiteNucleus::reject) {
  params.validate();
  for (const auto &nuc : params.nuclei)
    if (!lattice.contains(nuc.pos))
      throw DomainError("nucleus lies outside the lattice volume");

  const auto coulomb = PotentialKind::coulomb();
  std::vector<double> w(lattice.sites(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec3 p = to_point(lattice.unflatten(i));
    double s = 0.0;
    for (const auto &nuc : params.nuclei) {
      const double r = lattice.distance(p, nuc.pos);
      if (r < 1e-12 && policy == OnSiteNucleus::reject)
        throw DomainError("nucleus placed exactly on a lattice site; "
                          "use the pi*v0 cutoff explicitly to allow it");
      s += nuc.charge * potential_eval(coulomb, params.v0, r);
    }
    w[i] = s;
  }
  return w;
}

/// Shift by the band bottom 6 t_f per electron and express in Rydberg.
inline double to_atomic_units(double e_lattice, const ChemistryParams &params) {
  return (e_lattice + 6.0 * params.t_f * params.n_e) / params.rydberg();
}

inline double from_atomic_units(double e_ry, const ChemistryParams &params) {
  return e_ry * params.rydberg() - 6.0 * params.t_f * params.n_e;
}

} // namespace lqc
