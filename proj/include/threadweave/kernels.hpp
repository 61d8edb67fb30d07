#pragma once

#include <cstddef>

namespace tw::kernels {

// Dense inner loops, each in two variants: a plain serial reference and a
// dispatching entry that goes OpenMP-parallel above a grain size. Parallel
// variants split work across independent output elements only, so results
// are bit-identical to the serial reference for any thread count.

bool openmp_available();
int max_threads();
void set_max_threads(int n);

// Disables the parallel paths at runtime (used by tests and benchmarks).
void force_serial(bool on);
bool serial_forced();

// C[m x n] = (or +=) A[m x k] * B[k x n]
void matmul_serial(const double* A, const double* B, double* C, int m, int k, int n,
                   bool accumulate = false);
void matmul(const double* A, const double* B, double* C, int m, int k, int n,
            bool accumulate = false);

// C[m x n] = (or +=) A[m x k] * B[n x k]^T
void matmul_nt_serial(const double* A, const double* B, double* C, int m, int k, int n,
                      bool accumulate = false);
void matmul_nt(const double* A, const double* B, double* C, int m, int k, int n,
               bool accumulate = false);

// C[k x n] = (or +=) A[m x k]^T * B[m x n]
void matmul_tn_serial(const double* A, const double* B, double* C, int m, int k, int n,
                      bool accumulate = false);
void matmul_tn(const double* A, const double* B, double* C, int m, int k, int n,
               bool accumulate = false);

// Elementwise maps.
void vtanh_serial(const double* x, double* y, std::size_t n);
void vtanh(const double* x, double* y, std::size_t n);
void vsigmoid_serial(const double* x, double* y, std::size_t n);
void vsigmoid(const double* x, double* y, std::size_t n);
void vexp_serial(const double* x, double* y, std::size_t n);
void vexp(const double* x, double* y, std::size_t n);

void vadd_serial(const double* x, const double* y, double* z, std::size_t n);
void vadd(const double* x, const double* y, double* z, std::size_t n);
void vmul_serial(const double* x, const double* y, double* z, std::size_t n);
void vmul(const double* x, const double* y, double* z, std::size_t n);

// y += a * x
void axpy_serial(double a, const double* x, double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);

// Reductions stay serial: a parallel reduction reorders the summation and
// the result must not depend on thread count.
double vsum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

}  // namespace tw::kernels
