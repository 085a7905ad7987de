#pragma once

// The one-electron lattice operator  H = -t_f * sum_<ij> (hop) + u(j)  and
// the kinetic-inverse preconditioner used by the eigensolver.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "lqc/errors.hpp"
#include "lqc/fftw.hpp"
#include "lqc/lattice.hpp"

namespace lqc {

class OneBodyOperator {
public:
  /// `onsite` holds the full diagonal: -W for the bare problem, plus any mean field.
  OneBodyOperator(LatticeSpec lattice, double t_f, std::vector<double> onsite)
      : lattice_(lattice), t_f_(t_f), onsite_(std::move(onsite)) {
    if (onsite_.size() != lattice_.sites())
      throw DomainError("on-site potential does not match lattice size");
  }

  const LatticeSpec &lattice() const noexcept { return lattice_; }
  double hopping() const noexcept { return t_f_; }
  const std::vector<double> &onsite() const noexcept { return onsite_; }
  std::size_t size() const noexcept { return onsite_.size(); }

  void apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != size() || out.size() != size())
      throw DomainError("vector length does not match lattice");
    const std::size_t n = lattice_.n();
    const bool periodic = lattice_.boundary() == Boundary::periodic;
    const std::size_t plane = n * n;
    for (std::size_t z = 0; z < n; ++z) {
      for (std::size_t y = 0; y < n; ++y) {
        const std::size_t row = n * (y + n * z);
        const double *c = in.data() + row;
        const double *ym = nullptr, *yp = nullptr, *zm = nullptr, *zp = nullptr;
        if (y > 0) ym = c - n; else if (periodic) ym = c + (n - 1) * n;
        if (y + 1 < n) yp = c + n; else if (periodic) yp = c - (n - 1) * n;
        if (z > 0) zm = c - plane; else if (periodic) zm = c + (n - 1) * plane;
        if (z + 1 < n) zp = c + plane; else if (periodic) zp = c - (n - 1) * plane;
        double *o = out.data() + row;
        const double *u = onsite_.data() + row;
        for (std::size_t x = 0; x < n; ++x) {
          double s = 0.0;
          if (ym) s += ym[x];
          if (yp) s += yp[x];
          if (zm) s += zm[x];
          if (zp) s += zp[x];
          if (x > 0) s += c[x - 1]; else if (periodic) s += c[n - 1];
          if (x + 1 < n) s += c[x + 1]; else if (periodic) s += c[0];
          o[x] = -t_f_ * s + u[x] * c[x];
        }
      }
    }
  }

  std::vector<double> apply(std::span<const double> in) const {
    std::vector<double> out(size());
    apply(in, out);
    return out;
  }

  double kinetic_bottom() const noexcept {
    if (lattice_.boundary() == Boundary::periodic)
      return -6.0 * t_f_;
    return -6.0 * t_f_ * std::cos(std::numbers::pi / static_cast<double>(lattice_.n() + 1));
  }

private:
  LatticeSpec lattice_;
  double t_f_;
  std::vector<double> onsite_;
};

/// t = (K - sigma)^{-1} r with K the open-boundary hopping operator, applied
/// exactly through a 3D sine transform. sigma follows the Ritz value but is
/// clamped below the kinetic band bottom so the shifted operator stays
/// positive definite.
class KineticPreconditioner {
public:
  KineticPreconditioner(const LatticeSpec &lattice, double t_f)
      : n_(lattice.n()), t_f_(t_f), buffer_(lattice.sites()) {
    if (lattice.boundary() != Boundary::open)
      throw DomainError("sine-transform preconditioner requires open boundaries");
    const int ni = static_cast<int>(n_);
    plan_ = fft::plan_dst1_3d(ni, buffer_.data(), buffer_.data());
    band_.resize(n_);
    for (std::size_t q = 0; q < n_; ++q)
      band_[q] = -2.0 * t_f_ * std::cos(std::numbers::pi * static_cast<double>(q + 1) /
                                        static_cast<double>(n_ + 1));
    bottom_ = 3.0 * band_[0];
    const double h = std::numbers::pi / static_cast<double>(n_ + 1);
    floor_ = 3.0 * t_f_ * h * h;
    const double norm = 2.0 * static_cast<double>(n_ + 1);
    scale_ = 1.0 / (norm * norm * norm);
  }

  KineticPreconditioner(const KineticPreconditioner &) = delete;
  KineticPreconditioner &operator=(const KineticPreconditioner &) = delete;

  void operator()(double theta, std::span<const double> r, std::span<double> t) {
    const double sigma = std::min(theta, bottom_ - floor_);
    std::copy(r.begin(), r.end(), buffer_.data());
    fftw_execute(plan_.get());
    std::size_t i = 0;
    for (std::size_t z = 0; z < n_; ++z)
      for (std::size_t y = 0; y < n_; ++y) {
        const double yz = band_[y] + band_[z] - sigma;
        for (std::size_t x = 0; x < n_; ++x, ++i)
          buffer_[i] *= scale_ / (band_[x] + yz);
      }
    fftw_execute(plan_.get());
    std::copy(buffer_.data(), buffer_.data() + t.size(), t.begin());
  }

private:
  std::size_t n_;
  double t_f_;
  fft::RealBuffer buffer_;
  fft::Plan plan_;
  std::vector<double> band_;
  double bottom_ = 0.0;
  double floor_ = 0.0;
  double scale_ = 1.0;
};

} // namespace lqc
