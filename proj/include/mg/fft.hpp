#pragma once

// Thin RAII layer over FFTW's real-to-complex 3D transforms.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <tuple>
#include <vector>

namespace mg {

/// std::allocator replacement backed by fftw_malloc so every buffer carries
/// the SIMD alignment FFTW planned for.
template <class T>
struct FftwAllocator {
  using value_type = T;

  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept {
    return true;
  }
};

using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Forward (r2c) and backward (c2r) plans for one grid shape. Unnormalised,
/// FFTW sign conventions: forward uses exp(-i k.x).
class FftPlans {
 public:
  FftPlans(int n1, int n2, int n3) : n1_(n1), n2_(n2), n3_(n3) {
    const std::size_t nreal = static_cast<std::size_t>(n1) * n2 * n3;
    const std::size_t ncplx = static_cast<std::size_t>(n1) * n2 * (n3 / 2 + 1);
    RealBuffer r(nreal);
    ComplexBuffer c(ncplx);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_3d(n1, n2, n3, r.data(), as_fftw(c.data()), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_3d(n1, n2, n3, as_fftw(c.data()), r.data(), FFTW_ESTIMATE);
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  ~FftPlans() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void forward(const RealBuffer& in, ComplexBuffer& out) const {
    // out-of-place r2c preserves its input
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()), as_fftw(out.data()));
  }

  /// c2r destroys its input, so callers pass a scratch copy.
  void backward(ComplexBuffer& scratch, RealBuffer& out) const {
    fftw_execute_dft_c2r(backward_, as_fftw(scratch.data()), out.data());
  }

 private:
  static fftw_complex* as_fftw(std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(p);
  }

  int n1_, n2_, n3_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Shared, lazily created plans for a grid shape. Safe to call from any thread.
inline std::shared_ptr<const FftPlans> plans_for(int n1, int n2, int n3) {
  static std::mutex cache_mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const FftPlans>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[{n1, n2, n3}];
  if (!slot) slot = std::make_shared<const FftPlans>(n1, n2, n3);
  return slot;
}

}  // namespace mg
