#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "freqcross/error.hpp"

namespace freqcross {

template <typename T>
class Tape;

// Dense row-major tensor with shared storage. Copies are shallow (views of
// the same buffer), which is what lets tape closures hold their operands
// cheaply. The gradient buffer exists exactly when requires_grad is set.
template <typename T>
class Tensor {
 public:
  Tensor() : s_(std::make_shared<Storage>()) {}

  explicit Tensor(std::vector<int> shape, bool requires_grad = false)
      : s_(std::make_shared<Storage>()) {
    int64_t n = 1;
    for (const int d : shape) {
      if (d < 0) fail(ErrorKind::ShapeMismatch, "negative tensor dimension");
      n *= d;
    }
    s_->shape = std::move(shape);
    s_->values.assign(static_cast<size_t>(n), T(0));
    if (requires_grad) set_requires_grad(true);
  }

  const std::vector<int>& shape() const { return s_->shape; }
  int rank() const { return static_cast<int>(s_->shape.size()); }
  int dim(int i) const { return s_->shape[static_cast<size_t>(i)]; }
  int64_t size() const { return static_cast<int64_t>(s_->values.size()); }

  std::vector<T>& values() { return s_->values; }
  const std::vector<T>& values() const { return s_->values; }
  T* data() { return s_->values.data(); }
  const T* data() const { return s_->values.data(); }

  bool requires_grad() const { return s_->requires_grad; }
  void set_requires_grad(bool on) {
    s_->requires_grad = on;
    if (on) {
      s_->grad.assign(s_->values.size(), T(0));
    } else {
      s_->grad.clear();
      s_->grad.shrink_to_fit();
    }
  }

  std::vector<T>& grad() { return s_->grad; }
  const std::vector<T>& grad() const { return s_->grad; }
  T* grad_data() { return s_->grad.data(); }
  const T* grad_data() const { return s_->grad.data(); }
  void zero_grad() { std::fill(s_->grad.begin(), s_->grad.end(), T(0)); }

  Tape<T>* tape() const { return s_->tape; }
  void set_tape(Tape<T>* t) { s_->tape = t; }

  bool same_storage(const Tensor& other) const { return s_ == other.s_; }

 private:
  struct Storage {
    std::vector<int> shape;
    std::vector<T> values;
    std::vector<T> grad;
    bool requires_grad = false;
    Tape<T>* tape = nullptr;
  };
  std::shared_ptr<Storage> s_;
};

// Reverse-mode tape: each op pushes one closure that reads its output's grad
// and accumulates into its inputs' grads. Running the tape replays the
// closures newest-first and then clears itself.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> node) { nodes_.push_back(std::move(node)); }
  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  void run_reverse() {
    for (size_t i = nodes_.size(); i-- > 0;) nodes_[i]();
    nodes_.clear();
  }

 private:
  std::vector<std::function<void()>> nodes_;
};

// Fill gradients of everything reachable from a recorded scalar loss, then
// clear the tape. Parameters that never fed the loss keep whatever is in
// their grad buffer (the training loop zeroes grads before each pass).
template <typename T>
void backward(Tensor<T> loss) {
  if (loss.tape() == nullptr) fail(ErrorKind::NoTape, "loss was not recorded on a tape");
  if (loss.size() != 1) {
    fail(ErrorKind::ShapeMismatch, "backward needs a scalar loss, got " +
                                       std::to_string(loss.size()) + " elements");
  }
  loss.grad()[0] = T(1);
  loss.tape()->run_reverse();
}

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
};

}  // namespace freqcross
