#pragma once

// Open-boundary convolution of a lattice field with a radial kernel,
// (V * rho)(i) = sum_j V(|i - j|) rho(j), done on a zero-padded (2N)^3 grid so
// the circular transform never wraps a charge onto its periodic image.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "lqc/errors.hpp"
#include "lqc/fftw.hpp"
#include "lqc/lattice.hpp"

namespace lqc {

class ConvolutionEngine {
public:
  ConvolutionEngine(const LatticeSpec &lattice, const PotentialKind &kind, double v0)
      : n_(lattice.n()), m_(2 * lattice.n()), kind_(kind), v0_(v0),
        real_(m_ * m_ * m_), spectrum_(m_ * m_ * (m_ / 2 + 1)),
        kernel_(m_ * m_ * (m_ / 2 + 1)) {
    if (lattice.boundary() != Boundary::open)
      throw DomainError("convolution engine implements open-boundary semantics only");
    const int mi = static_cast<int>(m_);
    forward_ = fft::plan_r2c_3d(mi, mi, mi, real_.data(), spectrum_.data());
    backward_ = fft::plan_c2r_3d(mi, mi, mi, spectrum_.data(), real_.data());

    // Kernel on the padded grid at minimum-image offsets. Every physical
    // separation (|d| <= N-1 per axis) appears exactly once.
    auto offset = [&](std::size_t a) {
      return a < n_ ? static_cast<double>(a) : static_cast<double>(a) - static_cast<double>(m_);
    };
    for (std::size_t z = 0; z < m_; ++z)
      for (std::size_t y = 0; y < m_; ++y)
        for (std::size_t x = 0; x < m_; ++x) {
          const double dx = offset(x), dy = offset(y), dz = offset(z);
          real_[x + m_ * (y + m_ * z)] =
              potential_eval(kind_, v0_, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
    fftw_execute(forward_.get());
    const double scale = 1.0 / static_cast<double>(m_ * m_ * m_);
    for (std::size_t i = 0; i < kernel_.size(); ++i) {
      kernel_[i][0] = spectrum_[i][0] * scale;
      kernel_[i][1] = spectrum_[i][1] * scale;
    }
  }

  ConvolutionEngine(const ConvolutionEngine &) = delete;
  ConvolutionEngine &operator=(const ConvolutionEngine &) = delete;

  std::size_t n() const noexcept { return n_; }
  const PotentialKind &kind() const noexcept { return kind_; }
  double v0() const noexcept { return v0_; }

  void convolve(std::span<const double> density, std::span<double> out) {
    const std::size_t sites = n_ * n_ * n_;
    if (density.size() != sites || out.size() != sites)
      throw DomainError("field size does not match lattice");
    std::fill(real_.data(), real_.data() + real_.size(), 0.0);
    for (std::size_t z = 0; z < n_; ++z)
      for (std::size_t y = 0; y < n_; ++y)
        std::copy_n(density.data() + n_ * (y + n_ * z), n_, real_.data() + m_ * (y + m_ * z));
    fftw_execute(forward_.get());
    for (std::size_t i = 0; i < spectrum_.size(); ++i) {
      const double ar = spectrum_[i][0], ai = spectrum_[i][1];
      const double br = kernel_[i][0], bi = kernel_[i][1];
      spectrum_[i][0] = ar * br - ai * bi;
      spectrum_[i][1] = ar * bi + ai * br;
    }
    fftw_execute(backward_.get());
    for (std::size_t z = 0; z < n_; ++z)
      for (std::size_t y = 0; y < n_; ++y)
        std::copy_n(real_.data() + m_ * (y + m_ * z), n_, out.data() + n_ * (y + n_ * z));
  }

  std::vector<double> convolve(std::span<const double> density) {
    std::vector<double> out(density.size());
    convolve(density, out);
    return out;
  }

private:
  std::size_t n_, m_;
  PotentialKind kind_;
  double v0_;
  fft::RealBuffer real_;
  fft::ComplexBuffer spectrum_;
  fft::ComplexBuffer kernel_;
  fft::Plan forward_, backward_;
};

inline std::vector<double> ee_convolution(std::span<const double> density,
                                          const PotentialKind &kind, double v0,
                                          const LatticeSpec &lattice) {
  ConvolutionEngine engine(lattice, kind, v0);
  return engine.convolve(density);
}

} // namespace lqc
