#pragma once
// Real-to-complex 4-D transforms on n^4 periodic arrays (FFTW backend).
//
// Conventions: forward is unnormalized, inverse is unnormalized as well;
// callers divide by n^4 after the inverse. Index order is row major with
// the fourth axis fastest, so the half spectrum has shape n x n x n x (n/2+1).

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace bhc {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

class RealFft4 {
 public:
  explicit RealFft4(int n) : n_(n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("RealFft4: n must be even and >= 2");
    const auto nn = static_cast<std::size_t>(n);
    real_size_ = nn * nn * nn * nn;
    complex_size_ = nn * nn * nn * (nn / 2 + 1);
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size_));
    if (!real_ || !spec_) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int dims[4] = {n, n, n, n};
    forward_ = fftw_plan_dft_r2c(4, dims, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r(4, dims, spec_, real_, FFTW_ESTIMATE);
    if (!forward_ || !inverse_) {
      release();
      throw std::runtime_error("RealFft4: FFTW planning failed");
    }
  }
  ~RealFft4() { release(); }
  RealFft4(const RealFft4&) = delete;
  RealFft4& operator=(const RealFft4&) = delete;

  int n() const { return n_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }

  double* real_data() { return real_; }
  std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec_); }

  void forward() { fftw_execute(forward_); }
  // Overwrites the spectrum buffer (c2r is destructive).
  void inverse() { fftw_execute(inverse_); }

 private:
  void release() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
    forward_ = inverse_ = nullptr;
    if (real_) fftw_free(real_);
    if (spec_) fftw_free(spec_);
    real_ = nullptr;
    spec_ = nullptr;
  }

  int n_;
  std::size_t real_size_ = 0, complex_size_ = 0;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

namespace detail {
inline std::map<int, std::unique_ptr<RealFft4>>& fft_cache() {
  thread_local std::map<int, std::unique_ptr<RealFft4>> cache;
  return cache;
}
}  // namespace detail

// Per-thread workspace for size n. Not reentrant: finish with one before
// asking for the same n again on the same thread.
inline RealFft4& fft_workspace(int n) {
  auto& cache = detail::fft_cache();
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<RealFft4>(n)).first;
  return *it->second;
}

// Drops this thread's workspaces (the padded ones are large).
inline void release_fft_workspaces() { detail::fft_cache().clear(); }

// Signed wavenumber of index k on an n-point axis; k = n/2 maps to -n/2.
inline int signed_wavenumber(int k, int n) { return k < n / 2 ? k : k - n; }

// Multiplicity of a half-spectrum mode along the last axis in Parseval sums.
inline double half_spectrum_weight(int k3, int n) { return (k3 == 0 || k3 == n / 2) ? 1.0 : 2.0; }

}  // namespace bhc
