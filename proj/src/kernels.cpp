#include "threadweave/kernels.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tw::kernels {

namespace {

// Work thresholds below which the parallel path is not worth the fork.
constexpr long long kMatmulGrain = 1 << 18;   // m*k*n flops
constexpr std::size_t kMapGrain = 1 << 16;    // elements

std::atomic<bool> g_force_serial{false};

bool go_parallel(long long work, long long grain) {
#ifdef _OPENMP
  return !g_force_serial.load(std::memory_order_relaxed) && work >= grain && max_threads() > 1;
#else
  (void)work;
  (void)grain;
  return false;
#endif
}

}  // namespace

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_max_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

void force_serial(bool on) { g_force_serial.store(on, std::memory_order_relaxed); }
bool serial_forced() { return g_force_serial.load(std::memory_order_relaxed); }

// Each output row of C is one unit of work; the k-loop order inside a row is
// identical in both variants, which keeps the parallel result bit-exact.
static inline void matmul_row(const double* A, const double* B, double* C, int k, int n, int i,
                              bool accumulate) {
  double* crow = C + static_cast<std::size_t>(i) * n;
  if (!accumulate)
    for (int j = 0; j < n; ++j) crow[j] = 0.0;
  const double* arow = A + static_cast<std::size_t>(i) * k;
  for (int l = 0; l < k; ++l) {
    const double a = arow[l];
    const double* brow = B + static_cast<std::size_t>(l) * n;
    for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
  }
}

void matmul_serial(const double* A, const double* B, double* C, int m, int k, int n,
                   bool accumulate) {
  for (int i = 0; i < m; ++i) matmul_row(A, B, C, k, n, i, accumulate);
}

void matmul(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate) {
  const long long work = 1LL * m * k * n;
  if (go_parallel(work, kMatmulGrain) && m > 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) matmul_row(A, B, C, k, n, i, accumulate);
    return;
  }
  matmul_serial(A, B, C, m, k, n, accumulate);
}

static inline void matmul_nt_row(const double* A, const double* B, double* C, int k, int n, int i,
                                 bool accumulate) {
  const double* arow = A + static_cast<std::size_t>(i) * k;
  double* crow = C + static_cast<std::size_t>(i) * n;
  for (int j = 0; j < n; ++j) {
    const double* brow = B + static_cast<std::size_t>(j) * k;
    double s = 0.0;
    for (int l = 0; l < k; ++l) s += arow[l] * brow[l];
    crow[j] = accumulate ? crow[j] + s : s;
  }
}

void matmul_nt_serial(const double* A, const double* B, double* C, int m, int k, int n,
                      bool accumulate) {
  for (int i = 0; i < m; ++i) matmul_nt_row(A, B, C, k, n, i, accumulate);
}

void matmul_nt(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate) {
  const long long work = 1LL * m * k * n;
  if (go_parallel(work, kMatmulGrain) && m > 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) matmul_nt_row(A, B, C, k, n, i, accumulate);
    return;
  }
  matmul_nt_serial(A, B, C, m, k, n, accumulate);
}

// Row i of the k1 x n output owns column i of A; the m-loop order is fixed.
static inline void matmul_tn_row(const double* A, const double* B, double* C, int m, int k, int n,
                                 int i, bool accumulate) {
  double* crow = C + static_cast<std::size_t>(i) * n;
  if (!accumulate)
    for (int j = 0; j < n; ++j) crow[j] = 0.0;
  for (int l = 0; l < m; ++l) {
    const double a = A[static_cast<std::size_t>(l) * k + i];
    const double* brow = B + static_cast<std::size_t>(l) * n;
    for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
  }
}

void matmul_tn_serial(const double* A, const double* B, double* C, int m, int k, int n,
                      bool accumulate) {
  for (int i = 0; i < k; ++i) matmul_tn_row(A, B, C, m, k, n, i, accumulate);
}

void matmul_tn(const double* A, const double* B, double* C, int m, int k, int n, bool accumulate) {
  const long long work = 1LL * m * k * n;
  if (go_parallel(work, kMatmulGrain) && k > 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < k; ++i) matmul_tn_row(A, B, C, m, k, n, i, accumulate);
    return;
  }
  matmul_tn_serial(A, B, C, m, k, n, accumulate);
}

void vtanh_serial(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}
void vtanh(const double* x, double* y, std::size_t n) {
  if (go_parallel(static_cast<long long>(n), kMapGrain)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = std::tanh(x[i]);
    return;
  }
  vtanh_serial(x, y, n);
}

void vsigmoid_serial(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}
void vsigmoid(const double* x, double* y, std::size_t n) {
  if (go_parallel(static_cast<long long>(n), kMapGrain)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    return;
  }
  vsigmoid_serial(x, y, n);
}

void vexp_serial(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}
void vexp(const double* x, double* y, std::size_t n) {
  if (go_parallel(static_cast<long long>(n), kMapGrain)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = std::exp(x[i]);
    return;
  }
  vexp_serial(x, y, n);
}

void vadd_serial(const double* x, const double* y, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + y[i];
}
void vadd(const double* x, const double* y, double* z, std::size_t n) {
  if (go_parallel(static_cast<long long>(n), kMapGrain)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) z[i] = x[i] + y[i];
    return;
  }
  vadd_serial(x, y, z, n);
}

void vmul_serial(const double* x, const double* y, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}
void vmul(const double* x, const double* y, double* z, std::size_t n) {
  if (go_parallel(static_cast<long long>(n), kMapGrain)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) z[i] = x[i] * y[i];
    return;
  }
  vmul_serial(x, y, z, n);
}

void axpy_serial(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}
void axpy(double a, const double* x, double* y, std::size_t n) {
  if (go_parallel(static_cast<long long>(n), kMapGrain)) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += a * x[i];
    return;
  }
  axpy_serial(a, x, y, n);
}

double vsum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace tw::kernels
