#pragma once

// Two electrons on the lattice: a one-particle basis of H2+ eigenstates plus
// mean-field (Hartree, no exchange) orbitals, the four-index repulsion
// integrals through the open-boundary convolution, and configuration
// interaction in the exchange-symmetric two-particle space.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "lqc/convolution.hpp"
#include "lqc/errors.hpp"
#include "lqc/lattice.hpp"
#include "lqc/single_particle.hpp"

namespace lqc {

struct OrbitalBasis {
  std::vector<OrbitalField> orbitals;
  std::vector<std::string> provenance;
  double overlap_condition = 0.0;     ///< smallest eigenvalue of the retained overlap matrix
  std::vector<std::string> dropped;  ///< near-duplicates removed before orthonormalization

  std::size_t size() const noexcept { return orbitals.size(); }
};

/// Drop candidates that are (numerically) in the span of earlier ones, then
/// apply symmetric orthonormalization S^(-1/2) to the survivors.
inline OrbitalBasis combine_basis(const std::vector<OrbitalField> &candidates,
                                  const std::vector<std::string> &tags, double duplicate_tol = 1e-8,
                                  double eigen_floor = 1e-8) {
  if (candidates.size() != tags.size())
    throw DomainError("one provenance tag per candidate orbital is required");
  if (candidates.empty())
    throw DomainError("no candidate orbitals");
  const auto &lat = candidates.front().lattice;
  const std::size_t sites = lat.sites();

  OrbitalBasis basis;
  std::vector<std::vector<double>> ortho;  // Gram-Schmidt copies for the duplicate test
  std::vector<const OrbitalField *> kept;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto &phi = candidates[c];
    if (!(phi.lattice == lat) || phi.values.size() != sites)
      throw DomainError("basis orbitals live on different lattices");
    std::vector<double> t = phi.values;
    const double n0 = std::sqrt(dot(t, t));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto &q : ortho) {
        const double s = dot(q, t);
        for (std::size_t i = 0; i < sites; ++i)
          t[i] -= s * q[i];
      }
    const double n1 = std::sqrt(dot(t, t));
    if (!(n0 > 0.0) || (n1 / n0) * (n1 / n0) < duplicate_tol) {
      basis.dropped.push_back(tags[c]);
      continue;
    }
    for (double &v : t)
      v /= n1;
    ortho.push_back(std::move(t));
    kept.push_back(&phi);
    basis.provenance.push_back(tags[c]);
  }

  const auto n = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b <= a; ++b)
      s(a, b) = s(b, a) = dot(kept[static_cast<std::size_t>(a)]->values,
                              kept[static_cast<std::size_t>(b)]->values);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  basis.overlap_condition = es.eigenvalues().minCoeff();
  if (!(basis.overlap_condition > eigen_floor))
    throw DomainError("overlap matrix is singular after duplicate removal");
  const Eigen::MatrixXd inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  for (Eigen::Index a = 0; a < n; ++a) {
    OrbitalField out{lat, std::vector<double>(sites, 0.0)};
    for (Eigen::Index b = 0; b < n; ++b) {
      const double w = inv_sqrt(b, a);
      const auto &src = kept[static_cast<std::size_t>(b)]->values;
      for (std::size_t i = 0; i < sites; ++i)
        out.values[i] += w * src[i];
    }
    basis.orbitals.push_back(std::move(out));
  }
  return basis;
}

// ------------------------------------------------------------ integrals

/// h_{ijrs} = sum_x phi_i(x) phi_r(x) (V * phi_j phi_s)(x). One slot per
/// unordered pair of unordered index pairs {(i,r), (j,s)}; every symmetry
/// image reads the same slot.
class EeIntegralTensor {
public:
  EeIntegralTensor() = default;
  explicit EeIntegralTensor(std::size_t n)
      : n_(n), pairs_(n * (n + 1) / 2), values_(pairs_ * (pairs_ + 1) / 2, 0.0) {}

  /// From a dense n^4 array (index i + n(j + n(r + n s))), rejecting input
  /// that breaks the real-orbital symmetries.
  static EeIntegralTensor from_dense(std::size_t n, const std::vector<double> &full,
                                     double tol = 1e-12) {
    if (full.size() != n * n * n * n)
      throw DomainError("dense tensor must have n^4 entries");
    EeIntegralTensor t(n);
    auto at = [&](std::size_t i, std::size_t j, std::size_t r, std::size_t s) {
      return full[i + n * (j + n * (r + n * s))];
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t s = 0; s < n; ++s) {
            const double v = at(i, j, r, s);
            for (double w : {at(r, j, i, s), at(i, s, r, j), at(r, s, i, j), at(j, i, s, r)})
              if (std::abs(v - w) > tol * std::max(1.0, std::abs(v)))
                throw DomainError("integral tensor is not symmetric");
            t.slot(i, j, r, s) = v;
          }
    return t;
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t stored() const noexcept { return values_.size(); }
  /// Upper bound on independent real-orbital entries, n^2 (n^2 + 3) / 4.
  static std::size_t symmetry_bound(std::size_t n) { return n * n * (n * n + 3) / 4; }

  static std::size_t pair_index(std::size_t a, std::size_t b) noexcept {
    if (a < b)
      std::swap(a, b);
    return a * (a + 1) / 2 + b;
  }
  std::size_t slot_index(std::size_t i, std::size_t j, std::size_t r, std::size_t s) const noexcept {
    return pair_index(pair_index(i, r), pair_index(j, s));
  }

  double operator()(std::size_t i, std::size_t j, std::size_t r, std::size_t s) const noexcept {
    return values_[slot_index(i, j, r, s)];
  }
  double &slot(std::size_t i, std::size_t j, std::size_t r, std::size_t s) noexcept {
    return values_[slot_index(i, j, r, s)];
  }
  const std::vector<double> &values() const noexcept { return values_; }
  std::vector<double> &values() noexcept { return values_; }

private:
  std::size_t n_ = 0;
  std::size_t pairs_ = 0;
  std::vector<double> values_;
};

/// All canonical integrals. Each pair product phi_j phi_s is convolved once;
/// its potential is contracted with every pair product of lower or equal
/// canonical index. `jobs` > 1 splits the pair products across threads, each
/// with its own transform workspace.
inline EeIntegralTensor ee_integrals(const OrbitalBasis &basis, const PotentialKind &kind, double v0,
                                     std::size_t jobs = 1) {
  const std::size_t n = basis.size();
  if (n == 0)
    throw DomainError("empty basis");
  const auto &lat = basis.orbitals.front().lattice;
  const std::size_t sites = lat.sites();
  EeIntegralTensor tensor(n);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b <= a; ++b)
      pairs.emplace_back(a, b);

  auto worker = [&](std::size_t first, std::size_t stride) {
    ConvolutionEngine engine(lat, kind, v0);
    std::vector<double> rho(sites), pot(sites), w(sites);
    for (std::size_t q = first; q < pairs.size(); q += stride) {
      const auto [j, s] = pairs[q];
      const auto &pj = basis.orbitals[j].values, &ps = basis.orbitals[s].values;
      for (std::size_t x = 0; x < sites; ++x)
        rho[x] = pj[x] * ps[x];
      engine.convolve(rho, pot);
      for (std::size_t i = 0; i < n; ++i) {
        const auto &pi = basis.orbitals[i].values;
        for (std::size_t x = 0; x < sites; ++x)
          w[x] = pi[x] * pot[x];
        for (std::size_t r = 0; r <= i; ++r) {
          if (EeIntegralTensor::pair_index(i, r) > q)
            break;
          tensor.slot(i, j, r, s) = dot(w, basis.orbitals[r].values);
        }
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, pairs.size()));
  if (jobs == 1) {
    worker(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t)
      pool.emplace_back(worker, t, jobs);
  }
  return tensor;
}

// ------------------------------------------------------------ orbitals

inline Spectrum h2plus_orbitals(const LatticeSpec &lattice, const ChemistryParams &params,
                                std::size_t n1, SolverSettings settings = {}) {
  if (params.nuclei.size() != 2)
    throw DomainError("H2+ orbitals need exactly two nuclei");
  return solve_lowest(bare_hamiltonian(lattice, params, OnSiteNucleus::reject), n1, settings);
}

struct HartreeFockOptions {
  double tol_ry = 1e-9;       ///< orbital-energy change, in Rydberg
  double density_tol = 1e-8;  ///< L2 norm of the density change
  std::size_t max_sweeps = 400;
  double min_mixing = 1.0 / 64.0;  ///< floor for repeated damping
  double scale = 1.0;  ///< repulsion factor F applied to the mean field
  SolverSettings solver{};
};

struct HartreeFockResult {
  Spectrum spectrum;  ///< n2 lowest states of the final mean-field operator
  std::size_t sweeps = 0;
  bool converged = false;
  bool damped = false;
  double final_mixing = 1.0;
  double energy_drift = 0.0;
  std::vector<double> mean_field;
};

/// Self-consistent Hartree iteration for two electrons sharing one orbital:
/// each sees the other's density through the kernel. Starts from the
/// one-electron ground state. When the orbital energy starts to oscillate it
/// switches to 0.5 density mixing, halving again while the oscillation lasts.
inline HartreeFockResult hartree_fock(const LatticeSpec &lattice, const ChemistryParams &params,
                                      const PotentialKind &potential, std::size_t n2,
                                      HartreeFockOptions opt = {},
                                      const OrbitalField *initial = nullptr) {
  if (n2 == 0)
    throw DomainError("hartree_fock needs at least one orbital");
  const auto bare = bare_hamiltonian(lattice, params);
  const double ry = params.rydberg();
  SolverSettings st = opt.solver;
  ConvolutionEngine engine(lattice, potential, params.v0);

  OrbitalField psi;
  if (initial) {
    psi = *initial;
  } else {
    psi = solve_lowest(bare, 1, st).orbitals.front();
  }
  const std::size_t sites = lattice.sites();
  std::vector<double> rho(sites), rho_new(sites), field(sites), onsite(sites);
  for (std::size_t i = 0; i < sites; ++i)
    rho[i] = psi.values[i] * psi.values[i];

  HartreeFockResult out;
  double last = std::numeric_limits<double>::quiet_NaN(), last_step = 0.0;
  double mix = 1.0;
  auto build = [&](const std::vector<double> &density) {
    engine.convolve(density, field);
    for (std::size_t i = 0; i < sites; ++i)
      onsite[i] = bare.onsite()[i] + opt.scale * field[i];
    return OneBodyOperator(lattice, params.t_f, onsite);
  };

  for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    const auto op = build(rho);
    const std::vector<OrbitalField> guess{psi};
    auto s = solve_lowest(op, 1, st, &guess);
    psi = std::move(s.orbitals.front());
    const double lambda = s.energies.front();
    double change = 0.0;
    for (std::size_t i = 0; i < sites; ++i) {
      rho_new[i] = psi.values[i] * psi.values[i];
      change += (rho_new[i] - rho[i]) * (rho_new[i] - rho[i]);
    }
    change = std::sqrt(change);
    const double step = std::isnan(last) ? std::numeric_limits<double>::infinity() : lambda - last;
    out.sweeps = sweep;
    out.final_mixing = mix;
    out.energy_drift = std::abs(step) / ry;
    if (std::abs(step) < opt.tol_ry * ry && change < opt.density_tol) {
      out.converged = true;
      break;
    }
    if (std::isfinite(step) && sweep > 2 && step * last_step < 0.0 &&
        std::abs(step) > 0.5 * std::abs(last_step)) {
      // Charge sloshing between near-degenerate wells: damp, and keep
      // damping harder while it persists.
      mix = out.damped ? std::max(opt.min_mixing, 0.5 * mix) : 0.5;
      out.damped = true;
    }
    for (std::size_t i = 0; i < sites; ++i)
      rho[i] = mix * rho_new[i] + (1.0 - mix) * rho[i];
    last_step = step;
    last = lambda;
  }
  if (!out.converged) {
    throw ConvergenceError("Hartree iteration did not converge after " +
                               std::to_string(out.sweeps) + " sweeps; energy drift " +
                               std::to_string(out.energy_drift) + " Ry",
                           {out.energy_drift});
  }
  const auto op = build(rho);
  const std::vector<OrbitalField> guess{psi};
  out.spectrum = solve_lowest(op, n2, st, &guess);
  out.mean_field = field;
  return out;
}

// ------------------------------------------------------------ CI

struct CiResult {
  double energy = 0.0;           ///< lattice units
  Eigen::VectorXd vector;        ///< in the symmetric pair basis (i <= j, row-major by j)
  Eigen::MatrixXd coefficients;  ///< n x n, Psi = sum_ab C_ab |a b>
  Eigen::MatrixXd one_body;      ///< <phi_i|H0|phi_r>
};

inline Eigen::MatrixXd one_body_matrix(const OrbitalBasis &basis, const OneBodyOperator &h0) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd h(n, n);
  std::vector<double> tmp(h0.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    h0.apply(basis.orbitals[static_cast<std::size_t>(r)].values, tmp);
    for (Eigen::Index i = 0; i < n; ++i)
      h(i, r) = dot(basis.orbitals[static_cast<std::size_t>(i)].values, tmp);
  }
  return 0.5 * (h + h.transpose());
}

/// Projected two-electron Hamiltonian on {|ii>, (|ij> + |ji>)/sqrt 2}: one-body
/// part from `one_body`, repulsion F h_{ijrs}. Lowest eigenpair.
inline CiResult assemble_and_solve(const Eigen::MatrixXd &one_body, const EeIntegralTensor &tensor,
                                   double repulsion_scale) {
  const std::size_t n = tensor.n();
  if (n < 2)
    throw DomainError("configuration interaction needs at least 2 orbitals");
  if (static_cast<std::size_t>(one_body.rows()) != n || one_body.cols() != one_body.rows())
    throw DomainError("one-body matrix does not match the integral tensor");
  if (!(repulsion_scale >= 0.0))
    throw DomainError("repulsion scale must be non-negative");

  std::vector<std::pair<std::size_t, std::size_t>> states;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i)
      states.emplace_back(i, j);
  const auto dim = static_cast<Eigen::Index>(states.size());
  auto h1 = [&](std::size_t a, std::size_t b) {
    return one_body(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  // <ab|H|cd>, particle 1 in a/c, particle 2 in b/d.
  auto prod = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    double v = repulsion_scale * tensor(a, b, c, d);
    if (b == d)
      v += h1(a, c);
    if (a == c)
      v += h1(b, d);
    return v;
  };
  Eigen::MatrixXd h(dim, dim);
  for (Eigen::Index p = 0; p < dim; ++p) {
    const auto [i, j] = states[static_cast<std::size_t>(p)];
    const double cp = i == j ? 0.5 : std::sqrt(0.5);
    for (Eigen::Index q = 0; q <= p; ++q) {
      const auto [r, s] = states[static_cast<std::size_t>(q)];
      const double cq = r == s ? 0.5 : std::sqrt(0.5);
      const double v = cp * cq * (prod(i, j, r, s) + prod(i, j, s, r) + prod(j, i, r, s) + prod(j, i, s, r));
      h(p, q) = h(q, p) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  CiResult res;
  res.energy = es.eigenvalues()(0);
  res.vector = es.eigenvectors().col(0);
  const auto sign = [&] {
    for (Eigen::Index p = 0; p < dim; ++p)
      if (std::abs(res.vector(p)) > 1e-8)
        return res.vector(p) < 0 ? -1.0 : 1.0;
    return 1.0;
  }();
  res.vector *= sign;
  res.one_body = one_body;
  res.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index p = 0; p < dim; ++p) {
    const auto [i, j] = states[static_cast<std::size_t>(p)];
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    if (i == j) {
      res.coefficients(ii, ii) = res.vector(p);
    } else {
      res.coefficients(ii, jj) = res.coefficients(jj, ii) = std::sqrt(0.5) * res.vector(p);
    }
  }
  return res;
}

inline CiResult assemble_and_solve(const OrbitalBasis &basis, const EeIntegralTensor &tensor,
                                   const OneBodyOperator &h0, double repulsion_scale) {
  if (tensor.n() != basis.size())
    throw DomainError("integral tensor was built on a different basis");
  return assemble_and_solve(one_body_matrix(basis, h0), tensor, repulsion_scale);
}

// ------------------------------------------------------------ curves

struct MolecularCurvePoint {
  int d_lattice = 0;
  double d_atomic = 0.0;
  double ratio = 0.0;
  double e_electronic = 0.0;      ///< Ry, kernel offset C removed
  double e_electronic_raw = 0.0;  ///< Ry, including F * C
  double e_total = 0.0;           ///< e_electronic + 2/(d/a0) when repulsion is on
  double e_total_raw = 0.0;
  double h2plus_ground = 0.0;  ///< lowest H2+ orbital energy, Ry (one-electron shift)
  std::size_t basis_size = 0;
  std::size_t hf_sweeps = 0;
  bool ok = true;
  std::string error;
};

struct CurveSettings {
  std::size_t n1 = 8;
  std::size_t n2 = 8;
  double repulsion_scale = 1.0;  ///< F
  bool nuclear_repulsion = true;
  double solver_tol_ry = 1e-8;  ///< eigen residual, in Rydberg
  std::size_t jobs = 1;
  HartreeFockOptions hf{};
};

using RatioFunction = std::function<double(int)>;

/// One point of the H2 potential: nuclei at the pair positions for d, basis
/// of n1 H2+ states and n2 mean-field states, CI in the symmetric sector.
inline MolecularCurvePoint molecular_point(int d, std::size_t lattice_n, const PotentialKind &kind,
                                           double ratio, const CurveSettings &cs) {
  MolecularCurvePoint pt;
  pt.d_lattice = d;
  pt.ratio = ratio;
  const LatticeSpec lattice(lattice_n);
  const auto pos = nucleus_pair(lattice_n, d);
  const auto params = params_for_ratio(ratio, {Nucleus{1.0, pos[0]}, Nucleus{1.0, pos[1]}}, 2);
  pt.d_atomic = static_cast<double>(d) / params.bohr_radius();
  const double ry = params.rydberg();

  SolverSettings st;
  st.tol = cs.solver_tol_ry * ry;
  const auto h2p = h2plus_orbitals(lattice, params, cs.n1, st);
  pt.h2plus_ground = (h2p.energies.front() + 6.0 * params.t_f) / ry;

  std::vector<OrbitalField> cand = h2p.orbitals;
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < cs.n1; ++i)
    tags.push_back("h2plus_level_" + std::to_string(i));
  PotentialKind bare_kind = kind;
  bare_kind.offset = 0.0;
  if (cs.n2 > 0) {
    auto hfo = cs.hf;
    hfo.solver = st;
    hfo.scale = cs.repulsion_scale;
    const auto hf = hartree_fock(lattice, params, bare_kind, cs.n2, hfo, &h2p.orbitals.front());
    pt.hf_sweeps = hf.sweeps;
    for (std::size_t i = 0; i < hf.spectrum.orbitals.size(); ++i) {
      cand.push_back(hf.spectrum.orbitals[i]);
      tags.push_back("hartree_fock_iterate_" + std::to_string(i));
    }
  }
  const auto basis = combine_basis(cand, tags);
  pt.basis_size = basis.size();
  const auto tensor = ee_integrals(basis, bare_kind, params.v0, cs.jobs);
  const auto ci = assemble_and_solve(basis, tensor, bare_hamiltonian(lattice, params), cs.repulsion_scale);

  const double offset = kind.form == PotentialKind::Form::yukawa ? kind.offset : 0.0;
  pt.e_electronic = to_atomic_units(ci.energy, params);
  pt.e_electronic_raw = pt.e_electronic + cs.repulsion_scale * offset / ry;
  const double rep = cs.nuclear_repulsion && d > 0 ? 2.0 / pt.d_atomic : 0.0;
  pt.e_total = pt.e_electronic + rep;
  pt.e_total_raw = pt.e_electronic_raw + rep;
  return pt;
}

/// Per-point failures are recorded on the point and the scan continues.
inline std::vector<MolecularCurvePoint> molecular_curve(const std::vector<int> &d_values,
                                                        std::size_t lattice_n,
                                                        const PotentialKind &kind,
                                                        const RatioFunction &schedule,
                                                        const CurveSettings &cs = {}) {
  std::vector<MolecularCurvePoint> out;
  for (int d : d_values) {
    if (cs.nuclear_repulsion && d < 1)
      throw DomainError("nuclear repulsion needs separations of at least one site");
    double ratio = 0.0;
    try {
      ratio = schedule(d);
      out.push_back(molecular_point(d, lattice_n, kind, ratio, cs));
    } catch (const Error &e) {
      MolecularCurvePoint pt;
      pt.d_lattice = d;
      pt.ratio = ratio;
      pt.ok = false;
      pt.error = e.what();
      out.push_back(std::move(pt));
    }
  }
  return out;
}

/// Two hydrogen atoms, each alone on the same lattice at the positions the
/// H2 nuclei take for separation d: the dissociation reference, in Ry.
inline double separated_atoms_energy(std::size_t lattice_n, int d, double ratio,
                                     double solver_tol_ry = 1e-8) {
  const LatticeSpec lattice(lattice_n);
  double total = 0.0;
  for (const auto &pos : nucleus_pair(lattice_n, d)) {
    const auto params = params_for_ratio(ratio, {Nucleus{1.0, pos}}, 1);
    SolverSettings st;
    st.tol = solver_tol_ry * params.rydberg();
    total += to_atomic_units(lowest_eigenpairs(lattice, params, 1, st.tol, st).energies.front(), params);
  }
  return total;
}

} // namespace lqc
