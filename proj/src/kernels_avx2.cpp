#include "tcdst/kernels.hpp"

#ifdef TCDST_X86_64

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma;
// nothing here runs unless the dispatcher confirmed CPU support.

namespace tcdst::kernels::avx2 {

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_hadd_pd(lo, lo);
  return _mm_cvtsd_f64(lo);
}

}  // namespace

// ---------------------------------------------------------------------------
// matmul_nn: rows of c kept in registers, b rows streamed
// ---------------------------------------------------------------------------


void matmul_nn(const float* a, const float* b, float* c, std::size_t m,
                      std::size_t k, std::size_t n, bool acc) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    float* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 32 <= n; j += 32) {
      __m256 c0, c1, c2, c3;
      if (acc) {
        c0 = _mm256_loadu_ps(ci + j);
        c1 = _mm256_loadu_ps(ci + j + 8);
        c2 = _mm256_loadu_ps(ci + j + 16);
        c3 = _mm256_loadu_ps(ci + j + 24);
      } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_ps();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256 av = _mm256_set1_ps(ai[p]);
        const float* bp = b + p * n + j;
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp), c0);
        c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + 8), c1);
        c2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + 16), c2);
        c3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + 24), c3);
      }
      _mm256_storeu_ps(ci + j, c0);
      _mm256_storeu_ps(ci + j + 8, c1);
      _mm256_storeu_ps(ci + j + 16, c2);
      _mm256_storeu_ps(ci + j + 24, c3);
    }
    for (; j + 8 <= n; j += 8) {
      __m256 c0 = acc ? _mm256_loadu_ps(ci + j) : _mm256_setzero_ps();
      for (std::size_t p = 0; p < k; ++p) {
        c0 = _mm256_fmadd_ps(_mm256_set1_ps(ai[p]), _mm256_loadu_ps(b + p * n + j), c0);
      }
      _mm256_storeu_ps(ci + j, c0);
    }
    for (; j < n; ++j) {
      float s = acc ? ci[j] : 0.f;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * b[p * n + j];
      ci[j] = s;
    }
  }
}


void matmul_nn(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n, bool acc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256d c0, c1, c2, c3;
      if (acc) {
        c0 = _mm256_loadu_pd(ci + j);
        c1 = _mm256_loadu_pd(ci + j + 4);
        c2 = _mm256_loadu_pd(ci + j + 8);
        c3 = _mm256_loadu_pd(ci + j + 12);
      } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(ai[p]);
        const double* bp = b + p * n + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 4), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 8), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 12), c3);
      }
      _mm256_storeu_pd(ci + j, c0);
      _mm256_storeu_pd(ci + j + 4, c1);
      _mm256_storeu_pd(ci + j + 8, c2);
      _mm256_storeu_pd(ci + j + 12, c3);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = acc ? _mm256_loadu_pd(ci + j) : _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        c0 = _mm256_fmadd_pd(_mm256_set1_pd(ai[p]), _mm256_loadu_pd(b + p * n + j), c0);
      }
      _mm256_storeu_pd(ci + j, c0);
    }
    for (; j < n; ++j) {
      double s = acc ? ci[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * b[p * n + j];
      ci[j] = s;
    }
  }
}

// ---------------------------------------------------------------------------
// matmul_nt: row-by-row dot products, 4 b-rows at a time
// ---------------------------------------------------------------------------


void matmul_nt(const float* a, const float* b, float* c, std::size_t m,
                      std::size_t k, std::size_t n, bool acc) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* ai = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
      __m256 s2 = _mm256_setzero_ps(), s3 = _mm256_setzero_ps();
      const float* b0 = b + j * k;
      const float* b1 = b0 + k;
      const float* b2 = b1 + k;
      const float* b3 = b2 + k;
      std::size_t p = 0;
      for (; p + 8 <= k; p += 8) {
        const __m256 av = _mm256_loadu_ps(ai + p);
        s0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), s0);
        s1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), s1);
        s2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + p), s2);
        s3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + p), s3);
      }
      float r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
      for (; p < k; ++p) {
        r0 += ai[p] * b0[p];
        r1 += ai[p] * b1[p];
        r2 += ai[p] * b2[p];
        r3 += ai[p] * b3[p];
      }
      float* ci = c + i * n + j;
      if (acc) {
        ci[0] += r0; ci[1] += r1; ci[2] += r2; ci[3] += r3;
      } else {
        ci[0] = r0; ci[1] = r1; ci[2] = r2; ci[3] = r3;
      }
    }
    for (; j < n; ++j) {
      const float* bj = b + j * k;
      __m256 s = _mm256_setzero_ps();
      std::size_t p = 0;
      for (; p + 8 <= k; p += 8)
        s = _mm256_fmadd_ps(_mm256_loadu_ps(ai + p), _mm256_loadu_ps(bj + p), s);
      float r = hsum(s);
      for (; p < k; ++p) r += ai[p] * bj[p];
      if (acc)
        c[i * n + j] += r;
      else
        c[i * n + j] = r;
    }
  }
}


void matmul_nt(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n, bool acc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(ai + p);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
      }
      double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
      for (; p < k; ++p) {
        r0 += ai[p] * b0[p];
        r1 += ai[p] * b1[p];
        r2 += ai[p] * b2[p];
        r3 += ai[p] * b3[p];
      }
      double* ci = c + i * n + j;
      if (acc) {
        ci[0] += r0; ci[1] += r1; ci[2] += r2; ci[3] += r3;
      } else {
        ci[0] = r0; ci[1] = r1; ci[2] = r2; ci[3] = r3;
      }
    }
    for (; j < n; ++j) {
      const double* bj = b + j * k;
      __m256d s = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4)
        s = _mm256_fmadd_pd(_mm256_loadu_pd(ai + p), _mm256_loadu_pd(bj + p), s);
      double r = hsum(s);
      for (; p < k; ++p) r += ai[p] * bj[p];
      if (acc)
        c[i * n + j] += r;
      else
        c[i * n + j] = r;
    }
  }
}

// ---------------------------------------------------------------------------
// matmul_tn: c rows updated with 4 a-rows per pass
// ---------------------------------------------------------------------------


void matmul_tn(const float* a, const float* b, float* c, std::size_t m,
                      std::size_t k, std::size_t n, bool acc) {
  if (!acc) std::fill(c, c + k * n, 0.f);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const float* a0 = a + i * k;
    const float* a1 = a0 + k;
    const float* a2 = a1 + k;
    const float* a3 = a2 + k;
    const float* b0 = b + i * n;
    const float* b1 = b0 + n;
    const float* b2 = b1 + n;
    const float* b3 = b2 + n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256 v0 = _mm256_set1_ps(a0[p]);
      const __m256 v1 = _mm256_set1_ps(a1[p]);
      const __m256 v2 = _mm256_set1_ps(a2[p]);
      const __m256 v3 = _mm256_set1_ps(a3[p]);
      float* cp = c + p * n;
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256 cv = _mm256_loadu_ps(cp + j);
        cv = _mm256_fmadd_ps(v0, _mm256_loadu_ps(b0 + j), cv);
        cv = _mm256_fmadd_ps(v1, _mm256_loadu_ps(b1 + j), cv);
        cv = _mm256_fmadd_ps(v2, _mm256_loadu_ps(b2 + j), cv);
        cv = _mm256_fmadd_ps(v3, _mm256_loadu_ps(b3 + j), cv);
        _mm256_storeu_ps(cp + j, cv);
      }
      for (; j < n; ++j)
        cp[j] += a0[p] * b0[j] + a1[p] * b1[j] + a2[p] * b2[j] + a3[p] * b3[j];
    }
  }
  for (; i < m; ++i) {
    const float* ai = a + i * k;
    const float* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256 av = _mm256_set1_ps(ai[p]);
      float* cp = c + p * n;
      std::size_t j = 0;
      for (; j + 8 <= n; j += 8) {
        __m256 cv = _mm256_loadu_ps(cp + j);
        cv = _mm256_fmadd_ps(av, _mm256_loadu_ps(bi + j), cv);
        _mm256_storeu_ps(cp + j, cv);
      }
      for (; j < n; ++j) cp[j] += ai[p] * bi[j];
    }
  }
}


void matmul_tn(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n, bool acc) {
  if (!acc) std::fill(c, c + k * n, 0.0);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    const double* a2 = a1 + k;
    const double* a3 = a2 + k;
    const double* b0 = b + i * n;
    const double* b1 = b0 + n;
    const double* b2 = b1 + n;
    const double* b3 = b2 + n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d v0 = _mm256_set1_pd(a0[p]);
      const __m256d v1 = _mm256_set1_pd(a1[p]);
      const __m256d v2 = _mm256_set1_pd(a2[p]);
      const __m256d v3 = _mm256_set1_pd(a3[p]);
      double* cp = c + p * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cv = _mm256_loadu_pd(cp + j);
        cv = _mm256_fmadd_pd(v0, _mm256_loadu_pd(b0 + j), cv);
        cv = _mm256_fmadd_pd(v1, _mm256_loadu_pd(b1 + j), cv);
        cv = _mm256_fmadd_pd(v2, _mm256_loadu_pd(b2 + j), cv);
        cv = _mm256_fmadd_pd(v3, _mm256_loadu_pd(b3 + j), cv);
        _mm256_storeu_pd(cp + j, cv);
      }
      for (; j < n; ++j)
        cp[j] += a0[p] * b0[j] + a1[p] * b1[j] + a2[p] * b2[j] + a3[p] * b3[j];
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d av = _mm256_set1_pd(ai[p]);
      double* cp = c + p * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cv = _mm256_loadu_pd(cp + j);
        cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(bi + j), cv);
        _mm256_storeu_pd(cp + j, cv);
      }
      for (; j < n; ++j) cp[j] += ai[p] * bi[j];
    }
  }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------


void add(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}


void add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}


void sub(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}


void sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}


void mul(const float* a, const float* b, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}


void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}


void axpy(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}


void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}


void scale(const float* x, float alpha, float* out, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}


void scale(const double* x, double alpha, double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------


float sum(const float* x, std::size_t n) {
  __m256 s = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) s = _mm256_add_ps(s, _mm256_loadu_ps(x + i));
  float r = hsum(s);
  for (; i < n; ++i) r += x[i];
  return r;
}


double sum(const double* x, std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) s = _mm256_add_pd(s, _mm256_loadu_pd(x + i));
  double r = hsum(s);
  for (; i < n; ++i) r += x[i];
  return r;
}


float max_value(const float* x, std::size_t n) {
  float r = x[0];
  std::size_t i = 0;
  if (n >= 8) {
    __m256 mx = _mm256_loadu_ps(x);
    for (i = 8; i + 8 <= n; i += 8) mx = _mm256_max_ps(mx, _mm256_loadu_ps(x + i));
    alignas(32) float lanes[8];
    _mm256_store_ps(lanes, mx);
    r = lanes[0];
    for (int l = 1; l < 8; ++l) r = std::max(r, lanes[l]);
  }
  for (; i < n; ++i) r = std::max(r, x[i]);
  return r;
}


double max_value(const double* x, std::size_t n) {
  double r = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d mx = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) mx = _mm256_max_pd(mx, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, mx);
    r = lanes[0];
    for (int l = 1; l < 4; ++l) r = std::max(r, lanes[l]);
  }
  for (; i < n; ++i) r = std::max(r, x[i]);
  return r;
}


float dot(const float* a, const float* b, std::size_t n) {
  __m256 s0 = _mm256_setzero_ps(), s1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s0);
    s1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), s1);
  }
  for (; i + 8 <= n; i += 8)
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s0);
  float r = hsum(_mm256_add_ps(s0, s1));
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}


double dot(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double r = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

// ---------------------------------------------------------------------------
// Adam update
// ---------------------------------------------------------------------------


void adam_update(float* p, const float* g, float* m, float* v,
                        std::size_t n, float lr, float beta1, float beta2,
                        float eps, std::int64_t step) {
  const float c1 = 1.f / static_cast<float>(1.0 - std::pow(static_cast<double>(beta1), static_cast<double>(step)));
  const float c2 = 1.f / static_cast<float>(1.0 - std::pow(static_cast<double>(beta2), static_cast<double>(step)));
  const __m256 vb1 = _mm256_set1_ps(beta1), vnb1 = _mm256_set1_ps(1.f - beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2), vnb2 = _mm256_set1_ps(1.f - beta2);
  const __m256 vc1 = _mm256_set1_ps(c1), vc2 = _mm256_set1_ps(c2);
  const __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(vnb1, gv));
    __m256 vv = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                              _mm256_mul_ps(vnb2, _mm256_mul_ps(gv, gv)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_mul_ps(mv, vc1);
    const __m256 vhat = _mm256_mul_ps(vv, vc2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    const __m256 upd = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.f - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}


void adam_update(double* p, const double* g, double* m, double* v,
                         std::size_t n, double lr, double beta1, double beta2,
                         double eps, std::int64_t step) {
  const double c1 = 1.0 / (1.0 - std::pow(beta1, static_cast<double>(step)));
  const double c2 = 1.0 / (1.0 - std::pow(beta2, static_cast<double>(step)));
  const __m256d vb1 = _mm256_set1_pd(beta1), vnb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2), vnb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vc1 = _mm256_set1_pd(c1), vc2 = _mm256_set1_pd(c2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vnb1, gv));
    __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(vnb2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_mul_pd(mv, vc1);
    const __m256d vhat = _mm256_mul_pd(vv, vc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

}  // namespace tcdst::kernels::avx2

#endif  // TCDST_X86_64
