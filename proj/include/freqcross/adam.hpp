#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "freqcross/tensor.hpp"

namespace freqcross {

// Adam with bias correction. Moments are kept in double regardless of the
// training dtype: the cost is negligible next to the conv GEMMs and it makes
// checkpoint round-trips exact.
template <typename T>
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t step = 0;
  std::vector<std::vector<double>> m;  // parallel to the parameter list
  std::vector<std::vector<double>> v;

  void init(const std::vector<Parameter<T>>& params) {
    m.clear();
    v.clear();
    for (const Parameter<T>& p : params) {
      m.emplace_back(static_cast<size_t>(p.tensor.size()), 0.0);
      v.emplace_back(static_cast<size_t>(p.tensor.size()), 0.0);
    }
    step = 0;
  }
};

template <typename T>
void adam_step(std::vector<Parameter<T>>& params, AdamState<T>& state) {
  if (state.m.empty() && !params.empty()) state.init(params);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    fail(ErrorKind::ShapeMismatch, "optimizer state tracks " + std::to_string(state.m.size()) +
                                       " tensors, model has " + std::to_string(params.size()));
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& w = params[i].tensor;
    if (state.m[i].size() != static_cast<size_t>(w.size())) {
      fail(ErrorKind::ShapeMismatch,
           "optimizer state size mismatch for " + params[i].name);
    }
    const T* g = w.grad_data();
    T* wv = w.data();
    double* mi = state.m[i].data();
    double* vi = state.v[i].data();
    const int64_t n = w.size();
    for (int64_t j = 0; j < n; ++j) {
      const double gj = g[j];
      mi[j] = state.beta1 * mi[j] + (1.0 - state.beta1) * gj;
      vi[j] = state.beta2 * vi[j] + (1.0 - state.beta2) * gj * gj;
      const double mhat = mi[j] / bc1;
      const double vhat = vi[j] / bc2;
      wv[j] = T(wv[j] - state.lr * mhat / (std::sqrt(vhat) + state.epsilon));
    }
  }
}

}  // namespace freqcross
