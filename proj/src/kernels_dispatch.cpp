#include "tcdst/kernels.hpp"

#include <cstdlib>
#include <string>

#include "tcdst/error.hpp"

namespace tcdst::kernels {

bool avx2_supported() {
#ifdef TCDST_X86_64
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend pick_default() {
  if (const char* env = std::getenv("TCDST_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return Backend::kScalar;
    if (v == "avx2") {
      if (!avx2_supported())
        throw StateError("TCDST_KERNELS=avx2 but this CPU lacks AVX2/FMA");
      return Backend::kAvx2;
    }
    throw ConfigError("unknown TCDST_KERNELS value '" + v + "' (want scalar or avx2)");
  }
  return avx2_supported() ? Backend::kAvx2 : Backend::kScalar;
}

Backend& current() {
  static Backend b = pick_default();
  return b;
}

}  // namespace

Backend active_backend() { return current(); }

void set_backend(Backend b) {
  if (b == Backend::kAvx2 && !avx2_supported())
    throw StateError("AVX2 backend requested but this CPU lacks AVX2/FMA");
  current() = b;
}

const char* backend_name(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

#ifdef TCDST_X86_64
#define TCDST_DISPATCH(fn, ...)                   \
  if (current() == Backend::kAvx2)                \
    return avx2::fn(__VA_ARGS__);                 \
  return scalar::fn(__VA_ARGS__)
#else
#define TCDST_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

template <class T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc) {
  TCDST_DISPATCH(matmul_nn, a, b, c, m, k, n, acc);
}

template <class T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc) {
  TCDST_DISPATCH(matmul_nt, a, b, c, m, k, n, acc);
}

template <class T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
               std::size_t n, bool acc) {
  TCDST_DISPATCH(matmul_tn, a, b, c, m, k, n, acc);
}

template <class T>
void add(const T* a, const T* b, T* out, std::size_t n) {
  TCDST_DISPATCH(add, a, b, out, n);
}

template <class T>
void sub(const T* a, const T* b, T* out, std::size_t n) {
  TCDST_DISPATCH(sub, a, b, out, n);
}

template <class T>
void mul(const T* a, const T* b, T* out, std::size_t n) {
  TCDST_DISPATCH(mul, a, b, out, n);
}

template <class T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  TCDST_DISPATCH(axpy, alpha, x, y, n);
}

template <class T>
void scale(const T* x, T alpha, T* out, std::size_t n) {
  TCDST_DISPATCH(scale, x, alpha, out, n);
}

template <class T>
T sum(const T* x, std::size_t n) {
  TCDST_DISPATCH(sum, x, n);
}

template <class T>
T max_value(const T* x, std::size_t n) {
  TCDST_DISPATCH(max_value, x, n);
}

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  TCDST_DISPATCH(dot, a, b, n);
}

template <class T>
void adam_update(T* p, const T* g, T* m, T* v, std::size_t n, T lr, T beta1,
                 T beta2, T eps, std::int64_t step) {
  TCDST_DISPATCH(adam_update, p, g, m, v, n, lr, beta1, beta2, eps, step);
}

#define TCDST_INSTANTIATE_DISPATCH(T)                                         \
  template void matmul_nn<T>(const T*, const T*, T*, std::size_t,             \
                             std::size_t, std::size_t, bool);                 \
  template void matmul_nt<T>(const T*, const T*, T*, std::size_t,             \
                             std::size_t, std::size_t, bool);                 \
  template void matmul_tn<T>(const T*, const T*, T*, std::size_t,             \
                             std::size_t, std::size_t, bool);                 \
  template void add<T>(const T*, const T*, T*, std::size_t);                  \
  template void sub<T>(const T*, const T*, T*, std::size_t);                  \
  template void mul<T>(const T*, const T*, T*, std::size_t);                  \
  template void axpy<T>(T, const T*, T*, std::size_t);                        \
  template void scale<T>(const T*, T, T*, std::size_t);                       \
  template T sum<T>(const T*, std::size_t);                                   \
  template T max_value<T>(const T*, std::size_t);                             \
  template T dot<T>(const T*, const T*, std::size_t);                         \
  template void adam_update<T>(T*, const T*, T*, T*, std::size_t, T, T, T, T, \
                               std::int64_t);

TCDST_INSTANTIATE_DISPATCH(float)
TCDST_INSTANTIATE_DISPATCH(double)

}  // namespace tcdst::kernels
