#pragma once

// Thin RAII layer over FFTW3. Plan creation is not thread-safe in FFTW, so
// every planner call goes through one process-wide mutex; execution on
// object-owned buffers is reentrant.

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <new>
#include <type_traits>

#include <fftw3.h>

namespace lqc::fft {

inline std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void *p) const noexcept { fftw_free(p); }
};

template <class T> class Buffer {
public:
  Buffer() = default;
  explicit Buffer(std::size_t n)
      : data_(static_cast<T *>(fftw_malloc(sizeof(T) * n))), size_(n) {
    if (!data_)
      throw std::bad_alloc();
  }
  T *data() noexcept { return data_.get(); }
  const T *data() const noexcept { return data_.get(); }
  std::size_t size() const noexcept { return size_; }
  T &operator[](std::size_t i) noexcept { return data_.get()[i]; }
  const T &operator[](std::size_t i) const noexcept { return data_.get()[i]; }

private:
  std::unique_ptr<T, FftwFree> data_;
  std::size_t size_ = 0;
};

using RealBuffer = Buffer<double>;
using ComplexBuffer = Buffer<fftw_complex>;

struct PlanDestroy {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

inline Plan plan_r2c_3d(int n0, int n1, int n2, double *in, fftw_complex *out) {
  std::lock_guard lock(planner_mutex());
  return Plan(fftw_plan_dft_r2c_3d(n0, n1, n2, in, out, FFTW_ESTIMATE));
}

inline Plan plan_c2r_3d(int n0, int n1, int n2, fftw_complex *in, double *out) {
  std::lock_guard lock(planner_mutex());
  return Plan(fftw_plan_dft_c2r_3d(n0, n1, n2, in, out, FFTW_ESTIMATE));
}

/// 3D DST-I (RODFT00) on a cube; it is its own inverse up to (2(n+1))^3.
inline Plan plan_dst1_3d(int n, double *in, double *out) {
  std::lock_guard lock(planner_mutex());
  return Plan(fftw_plan_r2r_3d(n, n, n, in, out, FFTW_RODFT00, FFTW_RODFT00,
                               FFTW_RODFT00, FFTW_ESTIMATE));
}

} // namespace lqc::fft
