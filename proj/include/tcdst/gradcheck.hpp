#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "tcdst/autodiff.hpp"
#include "tcdst/error.hpp"

namespace tcdst {

template <class T>
struct GradCheckReport {
  T max_rel_error = T(0);
  std::string worst_param;
  std::size_t worst_offset = 0;
  T worst_analytic = T(0);
  T worst_numeric = T(0);
  std::size_t checked = 0;
};

// loss_fn(record): computes the scalar loss over `store`; when record is
// true it must also run backward so gradients land in the store. Central
// finite differences, step 1e-5; meant for 64-bit parameters.
template <class T>
GradCheckReport<T> grad_check(ParamStore<T>& store,
                              const std::function<T(bool)>& loss_fn,
                              T fd_step = T(1e-5)) {
  store.zero_grads();
  const T base = loss_fn(true);
  if (!std::isfinite(base)) throw NumericError("grad_check: non-finite loss");

  GradCheckReport<T> rep;
  for (std::size_t pi = 0; pi < store.size(); ++pi) {
    Param<T>& p = store.at(pi);
    for (std::size_t j = 0; j < p.numel(); ++j) {
      const T saved = p.values[j];
      p.values[j] = saved + fd_step;
      const T up = loss_fn(false);
      p.values[j] = saved - fd_step;
      const T down = loss_fn(false);
      p.values[j] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("grad_check: non-finite loss near '" + p.name + "'");
      const T numeric = (up - down) / (T(2) * fd_step);
      const T analytic = p.grad[j];
      const T denom = std::max({std::abs(analytic), std::abs(numeric), T(1e-2)});
      const T rel = std::abs(analytic - numeric) / denom;
      ++rep.checked;
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst_param = p.name;
        rep.worst_offset = j;
        rep.worst_analytic = analytic;
        rep.worst_numeric = numeric;
      }
    }
  }
  return rep;
}

}  // namespace tcdst
