#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops behind the tensor library. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2 variant compiled
// in its own translation unit. The top-level entry points dispatch at
// runtime on CPU capability; tests compare the two backends directly.
//
// Conventions: all matrices row-major and dense. `acc` accumulates into the
// output instead of overwriting it.

namespace tcdst::kernels {

enum class Backend { kScalar, kAvx2 };

bool avx2_supported();
Backend active_backend();
// Test/debug hook; throws if the backend is unavailable on this CPU.
// The TCDST_KERNELS environment variable ("scalar"/"avx2") has the same effect.
void set_backend(Backend b);
const char* backend_name(Backend b);

namespace scalar {

// c[m x n] (+)= a[m x k] * b[k x n]
template <class T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc);
// c[m x n] (+)= a[m x k] * b^T, with b stored [n x k]
template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc);
// c[k x n] (+)= a^T * b, with a stored [m x k], b stored [m x n]
template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc);

template <class T> void add(const T* a, const T* b, T* out, std::size_t n);
template <class T> void sub(const T* a, const T* b, T* out, std::size_t n);
template <class T> void mul(const T* a, const T* b, T* out, std::size_t n);
template <class T> void axpy(T alpha, const T* x, T* y, std::size_t n);
template <class T> void scale(const T* x, T alpha, T* out, std::size_t n);
template <class T> T sum(const T* x, std::size_t n);
template <class T> T max_value(const T* x, std::size_t n);
template <class T> T dot(const T* a, const T* b, std::size_t n);

// One bias-corrected Adam update over a flat parameter block.
template <class T>
void adam_update(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                 T beta2, T eps, std::int64_t step);

}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TCDST_X86_64 1
// Plain float/double overloads; defined in a TU built with -mavx2 -mfma.
namespace avx2 {

#define TCDST_AVX2_DECLS(T)                                                    \
  void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,   \
                 std::size_t n, bool acc);                                     \
  void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,   \
                 std::size_t n, bool acc);                                     \
  void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,   \
                 std::size_t n, bool acc);                                     \
  void add(const T* a, const T* b, T* out, std::size_t n);                     \
  void sub(const T* a, const T* b, T* out, std::size_t n);                     \
  void mul(const T* a, const T* b, T* out, std::size_t n);                     \
  void axpy(T alpha, const T* x, T* y, std::size_t n);                         \
  void scale(const T* x, T alpha, T* out, std::size_t n);                      \
  T sum(const T* x, std::size_t n);                                            \
  T max_value(const T* x, std::size_t n);                                      \
  T dot(const T* a, const T* b, std::size_t n);                                \
  void adam_update(T* p, const T* g, T* m, T* v, std::size_t n, T lr,          \
                   T beta1, T beta2, T eps, std::int64_t step);

TCDST_AVX2_DECLS(float)
TCDST_AVX2_DECLS(double)
#undef TCDST_AVX2_DECLS

}  // namespace avx2
#endif

// Dispatched entry points (instantiated for float and double).
template <class T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc);
template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc);
template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc);
template <class T> void add(const T* a, const T* b, T* out, std::size_t n);
template <class T> void sub(const T* a, const T* b, T* out, std::size_t n);
template <class T> void mul(const T* a, const T* b, T* out, std::size_t n);
template <class T> void axpy(T alpha, const T* x, T* y, std::size_t n);
template <class T> void scale(const T* x, T alpha, T* out, std::size_t n);
template <class T> T sum(const T* x, std::size_t n);
template <class T> T max_value(const T* x, std::size_t n);
template <class T> T dot(const T* a, const T* b, std::size_t n);
template <class T>
void adam_update(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                 T beta2, T eps, std::int64_t step);

}  // namespace tcdst::kernels
