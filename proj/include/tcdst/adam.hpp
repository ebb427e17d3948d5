#pragma once

#include <cstdint>
#include <vector>

#include "tcdst/autodiff.hpp"
#include "tcdst/error.hpp"
#include "tcdst/kernels.hpp"

namespace tcdst {

template <class T>
struct AdamState {
  std::int64_t step_count = 0;
  T learning_rate = T(2e-6);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);
  // one m/v buffer per parameter, in registration order
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;

  static AdamState make(const ParamStore<T>& store, T lr) {
    AdamState s;
    s.learning_rate = lr;
    s.m.reserve(store.size());
    s.v.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
      s.m.emplace_back(store.at(i).numel(), T(0));
      s.v.emplace_back(store.at(i).numel(), T(0));
    }
    return s;
  }
};

// One bias-corrected Adam step over every parameter, reading store grads.
template <class T>
void adam_step(ParamStore<T>& store, AdamState<T>& state) {
  if (state.m.size() != store.size() || state.v.size() != store.size())
    throw DimensionError("adam_step: state tracks " + std::to_string(state.m.size()) +
                         " parameters, store holds " + std::to_string(store.size()));
  state.step_count += 1;
  for (std::size_t i = 0; i < store.size(); ++i) {
    Param<T>& p = store.at(i);
    if (state.m[i].size() != p.numel() || state.v[i].size() != p.numel())
      throw DimensionError("adam_step: moment shape mismatch on '" + p.name + "'");
    kernels::adam_update(p.values.data(), p.grad.data(), state.m[i].data(),
                         state.v[i].data(), p.numel(), state.learning_rate,
                         state.beta1, state.beta2, state.epsilon,
                         state.step_count);
  }
}

}  // namespace tcdst
