#include <algorithm>
#include <cmath>

#include "tcdst/kernels.hpp"

// Reference kernels: plain loops, no intrinsics. These define the semantics
// the AVX2 backend is tested against.

namespace tcdst::kernels::scalar {

template <class T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc) {
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    if (!acc) std::fill(ci, ci + n, T(0));
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      const T* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const T* bj = b + j * k;
      T s = 0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      if (acc)
        c[i * n + j] += s;
      else
        c[i * n + j] = s;
    }
  }
}

template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc) {
  if (!acc) std::fill(c, c + k * n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    const T* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      T* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

template <class T>
void add(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <class T>
void sub(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

template <class T>
void mul(const T* a, const T* b, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void scale(const T* x, T alpha, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

template <class T>
T sum(const T* x, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

template <class T>
T max_value(const T* x, std::size_t n) {
  T mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  return mx;
}

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <class T>
void adam_update(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                 T beta2, T eps, std::int64_t step) {
  const T c1 = T(1) / T(1 - std::pow(static_cast<double>(beta1), static_cast<double>(step)));
  const T c2 = T(1) / T(1 - std::pow(static_cast<double>(beta2), static_cast<double>(step)));
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T mhat = m[i] * c1;
    const T vhat = v[i] * c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

#define TCDST_INSTANTIATE_KERNELS(T)                                            \
  template void matmul_nn<T>(const T*, const T*, T*, std::size_t, std::size_t,  \
                             std::size_t, bool);                                \
  template void matmul_nt<T>(const T*, const T*, T*, std::size_t, std::size_t,  \
                             std::size_t, bool);                                \
  template void matmul_tn<T>(const T*, const T*, T*, std::size_t, std::size_t,  \
                             std::size_t, bool);                                \
  template void add<T>(const T*, const T*, T*, std::size_t);                    \
  template void sub<T>(const T*, const T*, T*, std::size_t);                    \
  template void mul<T>(const T*, const T*, T*, std::size_t);                    \
  template void axpy<T>(T, const T*, T*, std::size_t);                          \
  template void scale<T>(const T*, T, T*, std::size_t);                         \
  template T sum<T>(const T*, std::size_t);                                     \
  template T max_value<T>(const T*, std::size_t);                               \
  template T dot<T>(const T*, const T*, std::size_t);                           \
  template void adam_update<T>(T*, const T*, T*, T*, std::size_t, T, T, T, T,   \
                               std::int64_t);

TCDST_INSTANTIATE_KERNELS(float)
TCDST_INSTANTIATE_KERNELS(double)

#undef TCDST_INSTANTIATE_KERNELS

}  // namespace tcdst::kernels::scalar
