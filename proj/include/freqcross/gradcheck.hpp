#pragma once

#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "freqcross/tensor.hpp"

namespace freqcross {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst = 0.0;
  std::string worst_name;
  bool passed = true;
};

namespace detail {

template <typename T>
bool bitwise_equal(T a, T b) {
  return std::memcmp(&a, &b, sizeof(T)) == 0;
}

}  // namespace detail

// Compare analytic gradients of a scalar-valued fragment against central
// finite differences. The fragment must be a pure function of the parameters
// (re-derive any randomness from a fixed seed inside it); it receives a tape
// when gradients are wanted and nullptr for the probing evaluations. With
// max_checks_per_param > 0 only an evenly strided subset of each parameter
// is probed.
template <typename T>
GradCheckReport gradcheck(const std::function<Tensor<T>(Tape<T>*)>& fragment,
                          std::vector<Parameter<T>*> params, double h, double tolerance,
                          int64_t max_checks_per_param = 0) {
  const auto eval = [&fragment]() -> double {
    Tensor<T> loss = fragment(nullptr);
    if (loss.size() != 1) fail(ErrorKind::ShapeMismatch, "gradcheck fragment must be scalar");
    return static_cast<double>(loss.values()[0]);
  };

  const T first = T(eval());
  const T second = T(eval());
  if (!detail::bitwise_equal(first, second)) {
    fail(ErrorKind::NonDeterministicFragment,
         "fragment returned different losses on identical invocations");
  }

  for (Parameter<T>* p : params) p->tensor.zero_grad();
  Tape<T> tape;
  Tensor<T> loss = fragment(&tape);
  backward(loss);

  GradCheckReport report;
  for (Parameter<T>* p : params) {
    std::vector<T>& w = p->tensor.values();
    const std::vector<T> analytic = p->tensor.grad();
    const int64_t n = static_cast<int64_t>(w.size());
    int64_t stride = 1;
    if (max_checks_per_param > 0 && n > max_checks_per_param) {
      stride = n / max_checks_per_param;
    }
    GradCheckEntry entry;
    entry.name = p->name;
    for (int64_t i = 0; i < n; i += stride) {
      const T saved = w[static_cast<size_t>(i)];
      w[static_cast<size_t>(i)] = T(saved + h);
      const double up = eval();
      w[static_cast<size_t>(i)] = T(saved - h);
      const double down = eval();
      w[static_cast<size_t>(i)] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = analytic[static_cast<size_t>(i)];
      const double denom = std::max(std::abs(fd), std::abs(an));
      const double rel = denom < 1e-10 ? 0.0 : std::abs(fd - an) / denom;
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    if (entry.max_rel_err > report.worst) {
      report.worst = entry.max_rel_err;
      report.worst_name = entry.name;
    }
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.worst <= tolerance;
  return report;
}

}  // namespace freqcross
