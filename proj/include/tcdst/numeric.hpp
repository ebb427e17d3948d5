#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tcdst/error.hpp"

// Plain (non-differentiable) numeric primitives. The tape ops in
// autodiff.hpp implement the same math with gradients; these are the
// reference forms used by tests and by eval-only code paths.

namespace tcdst {

template <class T>
std::vector<T> softmax(const std::vector<T>& logits) {
  if (logits.empty()) throw DimensionError("softmax: empty input");
  T mx = logits[0];
  for (T v : logits) {
    if (std::isnan(v)) throw NumericError("softmax: NaN input");
    mx = std::max(mx, v);
  }
  std::vector<T> out(logits.size());
  T z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    z += out[i];
  }
  for (auto& p : out) p /= z;
  return out;
}

template <class T>
T cross_entropy(const std::vector<T>& probs, std::size_t target) {
  if (target >= probs.size())
    throw IndexError("cross_entropy: target " + std::to_string(target) +
                     " out of range for " + std::to_string(probs.size()) +
                     " classes");
  return -std::log(std::max(probs[target], T(1e-12)));
}

template <class T>
std::vector<T> layer_norm(const std::vector<T>& x, const std::vector<T>& gain,
                          const std::vector<T>& bias, T eps) {
  if (gain.size() != x.size() || bias.size() != x.size())
    throw DimensionError("layer_norm: length mismatch");
  const std::size_t n = x.size();
  T mean = 0;
  for (T v : x) mean += v;
  mean /= static_cast<T>(n);
  T var = 0;
  for (T v : x) var += (v - mean) * (v - mean);
  var /= static_cast<T>(n);
  const T inv = T(1) / std::sqrt(var + eps);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = gain[i] * ((x[i] - mean) * inv) + bias[i];
  return out;
}

// Exact-erf GELU; clean under finite differences.
template <class T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(0.7071067811865476)));
}

template <class T>
T gelu_grad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * T(0.7071067811865476)));
  const T pdf = std::exp(T(-0.5) * x * x) * T(0.3989422804014327);
  return cdf + x * pdf;
}

}  // namespace tcdst
