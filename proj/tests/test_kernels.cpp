#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tcdst/error.hpp"
#include "tcdst/kernels.hpp"
#include "tcdst/rng.hpp"

using namespace tcdst;
namespace K = tcdst::kernels;

namespace {

template <class T>
std::vector<T> random_vec(Rng& rng, std::size_t n) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.normal(0.0, 1.0));
  return v;
}

template <class T>
void check_close(const std::vector<T>& got, const std::vector<T>& want, T rel) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    const T denom = std::max({std::abs(got[i]), std::abs(want[i]), T(1)});
    CHECK(std::abs(got[i] - want[i]) / denom <= rel);
  }
}

template <class T>
T rel_tol() {
  return std::is_same_v<T, float> ? T(1e-5) : T(1e-13);
}

const std::size_t kSizes[] = {1, 2, 3, 5, 7, 8, 9, 16, 17, 31, 32, 33, 64, 65};

// Runs f once per backend on fresh copies and compares the results.
template <class T, class F>
void compare_backends(F f) {
  if (!K::avx2_supported()) return;
  K::set_backend(K::Backend::kScalar);
  auto ref = f();
  K::set_backend(K::Backend::kAvx2);
  auto got = f();
  K::set_backend(K::Backend::kScalar);
  check_close<T>(got, ref, rel_tol<T>());
}

template <class T>
void matmul_suite() {
  Rng rng(7);
  for (std::size_t m : {1, 3, 8, 13}) {
    for (std::size_t k : kSizes) {
      for (std::size_t n : kSizes) {
        auto a = random_vec<T>(rng, m * k);
        auto b_nn = random_vec<T>(rng, k * n);
        auto b_nt = random_vec<T>(rng, n * k);
        auto b_tn = random_vec<T>(rng, m * n);
        auto seed_nn = random_vec<T>(rng, m * n);
        auto seed_tn = random_vec<T>(rng, k * n);
        for (bool acc : {false, true}) {
          compare_backends<T>([&] {
            auto c = acc ? seed_nn : std::vector<T>(m * n, T(-9));
            K::matmul_nn(a.data(), b_nn.data(), c.data(), m, k, n, acc);
            return c;
          });
          compare_backends<T>([&] {
            auto c = acc ? seed_nn : std::vector<T>(m * n, T(-9));
            K::matmul_nt(a.data(), b_nt.data(), c.data(), m, k, n, acc);
            return c;
          });
          compare_backends<T>([&] {
            auto c = acc ? seed_tn : std::vector<T>(k * n, T(-9));
            K::matmul_tn(a.data(), b_tn.data(), c.data(), m, k, n, acc);
            return c;
          });
        }
      }
    }
  }
}

template <class T>
void elementwise_suite() {
  Rng rng(11);
  for (std::size_t n : kSizes) {
    auto a = random_vec<T>(rng, n);
    auto b = random_vec<T>(rng, n);
    compare_backends<T>([&] {
      std::vector<T> out(n);
      K::add(a.data(), b.data(), out.data(), n);
      return out;
    });
    compare_backends<T>([&] {
      std::vector<T> out(n);
      K::sub(a.data(), b.data(), out.data(), n);
      return out;
    });
    compare_backends<T>([&] {
      std::vector<T> out(n);
      K::mul(a.data(), b.data(), out.data(), n);
      return out;
    });
    compare_backends<T>([&] {
      auto y = b;
      K::axpy(T(0.37), a.data(), y.data(), n);
      return y;
    });
    compare_backends<T>([&] {
      std::vector<T> out(n);
      K::scale(a.data(), T(-1.25), out.data(), n);
      return out;
    });
    compare_backends<T>([&] { return std::vector<T>{K::sum(a.data(), n)}; });
    compare_backends<T>([&] { return std::vector<T>{K::max_value(a.data(), n)}; });
    compare_backends<T>([&] { return std::vector<T>{K::dot(a.data(), b.data(), n)}; });
  }
}

template <class T>
void adam_suite() {
  Rng rng(13);
  for (std::size_t n : kSizes) {
    auto p0 = random_vec<T>(rng, n);
    auto g = random_vec<T>(rng, n);
    auto m0 = random_vec<T>(rng, n);
    std::vector<T> v0(n);
    for (auto& x : v0) x = static_cast<T>(rng.uniform01());
    for (std::int64_t step : {1, 2, 50}) {
      compare_backends<T>([&] {
        auto p = p0;
        auto m = m0;
        auto v = v0;
        K::adam_update(p.data(), g.data(), m.data(), v.data(), n, T(1e-3),
                       T(0.9), T(0.999), T(1e-8), step);
        auto out = p;
        out.insert(out.end(), m.begin(), m.end());
        out.insert(out.end(), v.begin(), v.end());
        return out;
      });
    }
  }
}

}  // namespace

TEST_CASE("kernels: matmul hand values") {
  // [[1,2,3],[4,5,6]] * [[7,8],[9,10],[11,12]] = [[58,64],[139,154]]
  const double a[] = {1, 2, 3, 4, 5, 6};
  const double b[] = {7, 8, 9, 10, 11, 12};
  double c[4] = {100, 100, 100, 100};
  K::scalar::matmul_nn(a, b, c, 2, 3, 2, false);
  CHECK(c[0] == doctest::Approx(58));
  CHECK(c[1] == doctest::Approx(64));
  CHECK(c[2] == doctest::Approx(139));
  CHECK(c[3] == doctest::Approx(154));

  // Same product via nt with b stored transposed [2 x 3].
  const double bt[] = {7, 9, 11, 8, 10, 12};
  double c2[4] = {1, 1, 1, 1};
  K::scalar::matmul_nt(a, bt, c2, 2, 3, 2, true);
  CHECK(c2[0] == doctest::Approx(59));
  CHECK(c2[3] == doctest::Approx(155));

  // a^T * b with a [2 x 3]: result [3 x 2] row 0 = [1*7+4*9, 1*8+4*10].
  double c3[6];
  K::scalar::matmul_tn(a, b, c3, 2, 3, 2, false);
  CHECK(c3[0] == doctest::Approx(43));
  CHECK(c3[1] == doctest::Approx(48));
}

TEST_CASE("kernels: adam first step hand value") {
  // theta=0, g=0.3, lr=1e-3: mhat=0.3, vhat=0.09, delta ~ lr.
  double p = 0, g = 0.3, m = 0, v = 0;
  K::scalar::adam_update(&p, &g, &m, &v, 1, 1e-3, 0.9, 0.999, 1e-8, 1);
  CHECK(m == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(v == doctest::Approx(9e-5).epsilon(1e-12));
  CHECK(p == doctest::Approx(-1e-3 * 0.3 / (0.3 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("kernels: backend dispatch controls") {
  K::set_backend(K::Backend::kScalar);
  CHECK(K::active_backend() == K::Backend::kScalar);
  CHECK(std::string(K::backend_name(K::Backend::kScalar)) == "scalar");
  CHECK(std::string(K::backend_name(K::Backend::kAvx2)) == "avx2");
  if (K::avx2_supported()) {
    K::set_backend(K::Backend::kAvx2);
    CHECK(K::active_backend() == K::Backend::kAvx2);
    K::set_backend(K::Backend::kScalar);
  } else {
    CHECK_THROWS_AS(K::set_backend(K::Backend::kAvx2), StateError);
  }
}

TEST_CASE("kernels: scalar/avx2 equivalence f32") {
  matmul_suite<float>();
  elementwise_suite<float>();
  adam_suite<float>();
}

TEST_CASE("kernels: scalar/avx2 equivalence f64") {
  matmul_suite<double>();
  elementwise_suite<double>();
  adam_suite<double>();
}
