#pragma once

// Block Davidson for the lowest eigenpairs of a large real symmetric operator
// given only as a matrix-vector product. Corrections come from a
// caller-supplied preconditioner t = P(theta) r and are orthogonalized (two
// classical Gram-Schmidt passes) against the whole search space, converged
// Ritz vectors included. When the space is full it restarts from the lowest
// Ritz vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "lqc/errors.hpp"

namespace lqc {

struct EigenOptions {
  std::size_t count = 1;
  double tol = 1e-8;  ///< absolute residual norm ||H v - theta v||
  std::size_t max_iterations = 5000;
  std::size_t guard = 0;         ///< extra block vectors; 0 picks a default
  std::size_t max_subspace = 0;  ///< 0 picks a default
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct EigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  std::vector<double> residuals;
  std::size_t iterations = 0;
  std::size_t applications = 0;
  bool converged = false;
};

/// Deterministic uniform numbers in (-1, 1), identical on every platform.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double symmetric() noexcept {
    return 2.0 * (static_cast<double>(next() >> 11) * 0x1.0p-53) - 1.0;
  }

private:
  std::uint64_t state_;
};

struct IdentityPreconditioner {
  void operator()(double, std::span<const double> r, std::span<double> t) const {
    std::copy(r.begin(), r.end(), t.begin());
  }
};

template <class Op, class Prec>
EigenResult block_davidson(std::size_t n, Op &&apply, Prec &&precondition,
                           const EigenOptions &opt, const Eigen::MatrixXd *guess = nullptr) {
  using Eigen::Index;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const std::size_t k = opt.count;
  if (k == 0 || k >= n)
    throw DomainError("requested eigenpair count must be in [1, n)");
  const std::size_t guard = opt.guard ? opt.guard : std::max<std::size_t>(2, (k + 2) / 3);
  const std::size_t block = std::min(k + guard, n);
  std::size_t mmax = opt.max_subspace ? opt.max_subspace : std::max(3 * block, block + 16);
  mmax = std::min(std::max(mmax, 2 * block), n);

  MatrixXd V(static_cast<Index>(n), static_cast<Index>(mmax));
  MatrixXd AV(static_cast<Index>(n), static_cast<Index>(mmax));
  MatrixXd H = MatrixXd::Zero(static_cast<Index>(mmax), static_cast<Index>(mmax));
  Index m = 0;
  EigenResult result;
  SplitMix64 rng(opt.seed);

  auto apply_col = [&](Index c) {
    apply(std::span<const double>(V.col(c).data(), n), std::span<double>(AV.col(c).data(), n));
    ++result.applications;
  };

  // Orthogonalize t against the current space and append it if it survives.
  VectorXd coeff;
  auto append = [&](VectorXd &t) -> bool {
    if (m >= static_cast<Index>(mmax))
      return false;
    const double norm0 = t.norm();
    if (!(norm0 > 0.0) || !std::isfinite(norm0))
      return false;
    for (int pass = 0; pass < 2 && m > 0; ++pass) {
      coeff.noalias() = V.leftCols(m).transpose() * t;
      t.noalias() -= V.leftCols(m) * coeff;
    }
    const double norm = t.norm();
    if (norm < 1e-10 * norm0)
      return false;
    V.col(m) = t / norm;
    apply_col(m);
    coeff.noalias() = V.leftCols(m + 1).transpose() * AV.col(m);
    for (Index i = 0; i <= m; ++i)
      H(i, m) = H(m, i) = coeff(i);
    ++m;
    return true;
  };

  auto random_vector = [&] {
    VectorXd t(static_cast<Index>(n));
    for (Index i = 0; i < t.size(); ++i)
      t(i) = rng.symmetric();
    return t;
  };

  {
    const Index ng = guess ? std::min<Index>(guess->cols(), static_cast<Index>(block)) : 0;
    for (Index j = 0; j < ng; ++j) {
      VectorXd t = guess->col(j);
      append(t);
    }
    for (int attempts = 0; m < static_cast<Index>(block) && attempts < 8 * static_cast<int>(block);
         ++attempts) {
      VectorXd t = random_vector();
      append(t);
    }
  }

  MatrixXd X, AX;
  VectorXd theta;
  std::vector<double> res;
  for (std::size_t it = 0;; ++it) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H.topLeftCorner(m, m));
    theta = es.eigenvalues();
    const MatrixXd &Y = es.eigenvectors();
    const Index nb = std::min<Index>(static_cast<Index>(block), m);
    X.noalias() = V.leftCols(m) * Y.leftCols(nb);
    AX.noalias() = AV.leftCols(m) * Y.leftCols(nb);
    MatrixXd R = AX - X * theta.head(nb).asDiagonal();
    res.assign(static_cast<std::size_t>(nb), 0.0);
    bool done = nb >= static_cast<Index>(k);
    for (Index i = 0; i < nb; ++i) {
      res[static_cast<std::size_t>(i)] = R.col(i).norm();
      if (i < static_cast<Index>(k) && !(res[static_cast<std::size_t>(i)] <= opt.tol))
        done = false;
    }
    result.iterations = it;
    if (done || it >= opt.max_iterations || m == static_cast<Index>(n)) {
      result.converged = done || (m == static_cast<Index>(n) && nb >= static_cast<Index>(k));
      break;
    }

    std::vector<VectorXd> corrections;
    for (Index i = 0; i < nb; ++i) {
      if (res[static_cast<std::size_t>(i)] <= opt.tol)
        continue;
      VectorXd t(static_cast<Index>(n));
      precondition(theta(i), std::span<const double>(R.col(i).data(), n),
                   std::span<double>(t.data(), n));
      corrections.push_back(std::move(t));
    }

    if (m + static_cast<Index>(corrections.size()) > static_cast<Index>(mmax)) {
      const Index keep = std::min<Index>(
          m, std::max<Index>(nb, static_cast<Index>(mmax) / 2));
      MatrixXd Vk = V.leftCols(m) * Y.leftCols(keep);
      MatrixXd AVk = AV.leftCols(m) * Y.leftCols(keep);
      V.leftCols(keep) = Vk;
      AV.leftCols(keep) = AVk;
      H.setZero();
      for (Index i = 0; i < keep; ++i)
        H(i, i) = theta(i);
      m = keep;
    }

    std::size_t added = 0;
    for (auto &t : corrections)
      added += append(t) ? 1 : 0;
    for (int attempts = 0; added == 0 && attempts < 4; ++attempts) {
      VectorXd t = random_vector();
      added += append(t) ? 1 : 0;
    }
    if (added == 0) {
      result.iterations = it + 1;
      break;
    }
  }

  const Index nk = std::min<Index>(static_cast<Index>(k), X.cols());
  result.values = theta.head(nk);
  result.vectors = X.leftCols(nk);
  result.residuals.assign(res.begin(), res.begin() + nk);
  return result;
}

inline std::string describe_residuals(const std::vector<double> &res) {
  std::ostringstream os;
  os.precision(3);
  for (std::size_t i = 0; i < res.size(); ++i)
    os << (i ? ", " : "") << res[i];
  return os.str();
}

} // namespace lqc
