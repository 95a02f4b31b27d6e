#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "freqcross/gemm.hpp"
#include "freqcross/parallel.hpp"
#include "freqcross/rng.hpp"
#include "freqcross/tensor.hpp"

namespace freqcross {
namespace detail {

template <typename T>
bool track(Tape<T>* tape, std::initializer_list<const Tensor<T>*> inputs) {
  if (tape == nullptr) return false;
  for (const Tensor<T>* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
Tensor<T> make_output(std::vector<int> shape, bool tracked, Tape<T>* tape) {
  Tensor<T> out(std::move(shape), tracked);
  if (tracked) out.set_tape(tape);
  return out;
}

inline void check(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorKind::ShapeMismatch, msg);
}

// Patch matrix for convolution: col has C*KH*KW rows and OH*OW columns; out
// of range taps read zero.
template <typename T>
void im2col(const T* x, int c_in, int h, int w, int kh, int kw, int stride, int pad, int oh,
            int ow, T* col) {
  int64_t row = 0;
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx, ++row) {
        T* dst = col + row * static_cast<int64_t>(oh) * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          T* drow = dst + static_cast<int64_t>(oy) * ow;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < ow; ++ox) drow[ox] = T(0);
            continue;
          }
          const T* src = x + (static_cast<int64_t>(c) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            drow[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

// Transpose of im2col as a scatter-add into the input gradient.
template <typename T>
void col2im_add(const T* col, int c_in, int h, int w, int kh, int kw, int stride, int pad,
                int oh, int ow, T* dx) {
  int64_t row = 0;
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx, ++row) {
        const T* src = col + row * static_cast<int64_t>(oh) * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          T* drow = dx + (static_cast<int64_t>(c) * h + iy) * w;
          const T* srow = src + static_cast<int64_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

}  // namespace detail

// --- convolution -----------------------------------------------------------

// x (B, C, H, W) * w (OC, C, KH, KW) + b (OC) -> (B, OC, OH, OW), zero
// padding. An empty b means no bias term (the usual choice when a batchnorm
// follows). Forward and the input-gradient pass parallelize over the batch;
// the weight-gradient pass runs the batch serially (fixed accumulation
// order) and parallelizes over output channels.
template <typename T>
Tensor<T> conv2d(Tape<T>* tape, Tensor<T> x, Tensor<T> w, Tensor<T> b,
                 int stride, int padding) {
  detail::check(x.rank() == 4, "conv2d input must be rank 4 (batch, channels, height, width)");
  detail::check(w.rank() == 4, "conv2d weight must be rank 4 (out, in, kh, kw)");
  const int batch = x.dim(0), c_in = x.dim(1), h = x.dim(2), width = x.dim(3);
  const int c_out = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  detail::check(w.dim(1) == c_in, "conv2d channel dimension: input has " + std::to_string(c_in) +
                                      ", weight expects " + std::to_string(w.dim(1)));
  const bool has_bias = b.size() != 0;
  detail::check(!has_bias || b.size() == c_out,
                "conv2d bias dimension: want " + std::to_string(c_out) + ", got " +
                    std::to_string(b.size()));
  detail::check(stride >= 1, "conv2d stride must be positive");
  detail::check(padding >= 0, "conv2d padding must be nonnegative");
  const int oh = (h + 2 * padding - kh) / stride + 1;
  const int ow = (width + 2 * padding - kw) / stride + 1;
  detail::check(h + 2 * padding >= kh && width + 2 * padding >= kw,
                "conv2d kernel larger than padded input");

  const bool tracked = detail::track(tape, {&x, &w, &b});
  Tensor<T> out = detail::make_output<T>({batch, c_out, oh, ow}, tracked, tape);

  const int64_t patch = static_cast<int64_t>(c_in) * kh * kw;   // im2col rows
  const int64_t area = static_cast<int64_t>(oh) * ow;           // im2col cols
  const int64_t in_plane = static_cast<int64_t>(c_in) * h * width;
  const int64_t out_plane = static_cast<int64_t>(c_out) * area;

  parallel_for(batch, [&](int64_t n) {
    std::vector<T> col(static_cast<size_t>(patch * area));
    detail::im2col(x.data() + n * in_plane, c_in, h, width, kh, kw, stride, padding, oh, ow,
                   col.data());
    T* dst = out.data() + n * out_plane;
    gemm_nn(c_out, area, patch, w.data(), col.data(), dst, false);
    if (!has_bias) return;
    for (int oc = 0; oc < c_out; ++oc) {
      const T bias = b.data()[oc];
      T* row = dst + static_cast<int64_t>(oc) * area;
      for (int64_t i = 0; i < area; ++i) row[i] += bias;
    }
  });

  if (tracked) {
    tape->record([x, w, b, out, stride, padding, batch, c_in, h, width, c_out, kh, kw, oh, ow,
                  patch, area, in_plane, out_plane]() mutable {
      const T* dy = out.grad_data();
      if (b.requires_grad()) {
        T* db = b.grad_data();
        for (int64_t n = 0; n < batch; ++n) {
          for (int oc = 0; oc < c_out; ++oc) {
            const T* row = dy + n * out_plane + static_cast<int64_t>(oc) * area;
            T acc = T(0);
            for (int64_t i = 0; i < area; ++i) acc += row[i];
            db[oc] += acc;
          }
        }
      }
      if (w.requires_grad()) {
        std::vector<T> col(static_cast<size_t>(patch * area));
        for (int64_t n = 0; n < batch; ++n) {  // serial: fixed accumulation order
          detail::im2col(x.data() + n * in_plane, c_in, h, width, kh, kw, stride, padding, oh,
                         ow, col.data());
          const T* dyn = dy + n * out_plane;
          parallel_for(c_out, [&](int64_t oc) {  // weight rows are disjoint
            gemm_nt(1, patch, area, dyn + oc * area, col.data(),
                    w.grad_data() + oc * patch, true);
          });
        }
      }
      if (x.requires_grad()) {
        parallel_for(batch, [&](int64_t n) {
          std::vector<T> col_grad(static_cast<size_t>(patch * area));
          gemm_tn(patch, area, c_out, w.data(), dy + n * out_plane, col_grad.data(), false);
          detail::col2im_add(col_grad.data(), c_in, h, width, kh, kw, stride, padding, oh, ow,
                             x.grad_data() + n * in_plane);
        });
      }
    });
  }
  return out;
}

// --- batch normalization ---------------------------------------------------

template <typename T>
struct BatchNorm2d {
  Tensor<T> gamma;  // registered as model parameters
  Tensor<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNorm2d(int channels = 0)
      : gamma(std::vector<int>{channels}),
        beta(std::vector<int>{channels}),
        running_mean(static_cast<size_t>(channels), T(0)),
        running_var(static_cast<size_t>(channels), T(1)) {
    std::fill(gamma.values().begin(), gamma.values().end(), T(1));
  }

  int channels() const { return static_cast<int>(running_mean.size()); }
};

// Train mode normalizes by the biased batch statistics and folds them into
// the running estimates; eval mode uses the running estimates only. The
// per-channel reductions are serial within a channel, so the result does not
// depend on the worker count.
template <typename T>
Tensor<T> batchnorm2d(Tape<T>* tape, Tensor<T> x, BatchNorm2d<T>& bn, bool train) {
  detail::check(x.rank() == 4, "batchnorm2d input must be rank 4");
  const int batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  detail::check(channels == bn.channels(),
                "batchnorm2d channel dimension: input has " + std::to_string(channels) +
                    ", layer has " + std::to_string(bn.channels()));
  const int64_t plane = static_cast<int64_t>(h) * w;
  const int64_t stride_n = static_cast<int64_t>(channels) * plane;
  const int64_t count = static_cast<int64_t>(batch) * plane;  // samples per channel

  const bool tracked = detail::track(tape, {&x, &bn.gamma, &bn.beta});
  Tensor<T> out = detail::make_output<T>({batch, channels, h, w}, tracked, tape);

  std::vector<double> mean(channels), invstd(channels);
  if (train) {
    parallel_for(channels, [&](int64_t c) {
      double sum = 0.0;
      for (int64_t n = 0; n < batch; ++n) {
        const T* src = x.data() + n * stride_n + c * plane;
        for (int64_t i = 0; i < plane; ++i) sum += src[i];
      }
      const double mu = sum / static_cast<double>(count);
      double var = 0.0;
      for (int64_t n = 0; n < batch; ++n) {
        const T* src = x.data() + n * stride_n + c * plane;
        for (int64_t i = 0; i < plane; ++i) {
          const double d = src[i] - mu;
          var += d * d;
        }
      }
      var /= static_cast<double>(count);
      mean[c] = mu;
      invstd[c] = 1.0 / std::sqrt(var + bn.eps);
      bn.running_mean[c] = T((1.0 - bn.momentum) * bn.running_mean[c] + bn.momentum * mu);
      bn.running_var[c] = T((1.0 - bn.momentum) * bn.running_var[c] + bn.momentum * var);
    });
  } else {
    for (int c = 0; c < channels; ++c) {
      mean[c] = bn.running_mean[c];
      invstd[c] = 1.0 / std::sqrt(static_cast<double>(bn.running_var[c]) + bn.eps);
    }
  }

  // Kept for backward: xhat is also the eval-mode normalized input.
  auto xhat = std::make_shared<std::vector<T>>(x.values().size());
  parallel_for(channels, [&](int64_t c) {
    const T g = bn.gamma.data()[c];
    const T be = bn.beta.data()[c];
    const double mu = mean[c];
    const double is = invstd[c];
    for (int64_t n = 0; n < batch; ++n) {
      const int64_t base = n * stride_n + c * plane;
      const T* src = x.data() + base;
      T* xh = xhat->data() + base;
      T* dst = out.data() + base;
      for (int64_t i = 0; i < plane; ++i) {
        xh[i] = T((src[i] - mu) * is);
        dst[i] = g * xh[i] + be;
      }
    }
  });

  if (tracked) {
    Tensor<T> gamma = bn.gamma;
    Tensor<T> beta = bn.beta;
    std::vector<double> saved_invstd = invstd;
    tape->record([x, gamma, beta, out, xhat, saved_invstd, train, batch, channels, plane,
                  stride_n, count]() mutable {
      const T* dy = out.grad_data();
      parallel_for(channels, [&](int64_t c) {
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (int64_t n = 0; n < batch; ++n) {
          const int64_t base = n * stride_n + c * plane;
          const T* d = dy + base;
          const T* xh = xhat->data() + base;
          for (int64_t i = 0; i < plane; ++i) {
            sum_dy += d[i];
            sum_dy_xhat += static_cast<double>(d[i]) * xh[i];
          }
        }
        if (gamma.requires_grad()) gamma.grad_data()[c] += T(sum_dy_xhat);
        if (beta.requires_grad()) beta.grad_data()[c] += T(sum_dy);
        if (!x.requires_grad()) return;
        const double g = gamma.data()[c];
        const double is = saved_invstd[c];
        T* dx = x.grad_data();
        if (train) {
          const double inv_count = 1.0 / static_cast<double>(count);
          for (int64_t n = 0; n < batch; ++n) {
            const int64_t base = n * stride_n + c * plane;
            const T* d = dy + base;
            const T* xh = xhat->data() + base;
            T* dst = dx + base;
            for (int64_t i = 0; i < plane; ++i) {
              dst[i] += T(g * is * (d[i] - inv_count * (sum_dy + xh[i] * sum_dy_xhat)));
            }
          }
        } else {
          for (int64_t n = 0; n < batch; ++n) {
            const int64_t base = n * stride_n + c * plane;
            const T* d = dy + base;
            T* dst = dx + base;
            for (int64_t i = 0; i < plane; ++i) dst[i] += T(g * is * d[i]);
          }
        }
      });
    });
  }
  return out;
}

// --- elementwise and pooling ----------------------------------------------

template <typename T>
Tensor<T> relu(Tape<T>* tape, Tensor<T> x) {
  const bool tracked = detail::track(tape, {&x});
  Tensor<T> out = detail::make_output<T>(x.shape(), tracked, tape);
  const int64_t n = x.size();
  for (int64_t i = 0; i < n; ++i) out.data()[i] = x.data()[i] > T(0) ? x.data()[i] : T(0);
  if (tracked) {
    tape->record([x, out, n]() mutable {
      if (!x.requires_grad()) return;
      const T* dy = out.grad_data();
      T* dx = x.grad_data();
      for (int64_t i = 0; i < n; ++i) {
        if (x.data()[i] > T(0)) dx[i] += dy[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> sigmoid(Tape<T>* tape, Tensor<T> x) {
  const bool tracked = detail::track(tape, {&x});
  Tensor<T> out = detail::make_output<T>(x.shape(), tracked, tape);
  const int64_t n = x.size();
  for (int64_t i = 0; i < n; ++i) {
    const double v = x.data()[i];
    out.data()[i] = T(v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                : std::exp(v) / (1.0 + std::exp(v)));
  }
  if (tracked) {
    tape->record([x, out, n]() mutable {
      if (!x.requires_grad()) return;
      const T* dy = out.grad_data();
      T* dx = x.grad_data();
      for (int64_t i = 0; i < n; ++i) {
        const T s = out.data()[i];
        dx[i] += dy[i] * s * (T(1) - s);
      }
    });
  }
  return out;
}

// Max pooling with optional zero-count padding (padded taps never win).
template <typename T>
Tensor<T> maxpool2d(Tape<T>* tape, Tensor<T> x, int kernel, int stride,
                    int padding = 0) {
  detail::check(x.rank() == 4, "maxpool2d input must be rank 4");
  detail::check(kernel >= 1 && stride >= 1, "maxpool2d kernel and stride must be positive");
  detail::check(padding >= 0 && padding < kernel, "maxpool2d padding must be in [0, kernel)");
  const int batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = (h + 2 * padding - kernel) / stride + 1;
  const int ow = (w + 2 * padding - kernel) / stride + 1;
  detail::check(oh >= 1 && ow >= 1, "maxpool2d window larger than padded input");

  const bool tracked = detail::track(tape, {&x});
  Tensor<T> out = detail::make_output<T>({batch, channels, oh, ow}, tracked, tape);
  const int64_t planes = static_cast<int64_t>(batch) * channels;
  const int64_t in_plane = static_cast<int64_t>(h) * w;
  const int64_t out_plane = static_cast<int64_t>(oh) * ow;

  auto argmax = std::make_shared<std::vector<int32_t>>(out.values().size());
  parallel_for(planes, [&](int64_t p) {
    const T* src = x.data() + p * in_plane;
    T* dst = out.data() + p * out_plane;
    int32_t* arg = argmax->data() + p * out_plane;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        T best = T(0);
        int32_t best_idx = -1;
        for (int ky = 0; ky < kernel; ++ky) {
          const int iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < kernel; ++kx) {
            const int ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= w) continue;
            const int32_t idx = iy * w + ix;
            if (best_idx < 0 || src[idx] > best) {
              best = src[idx];
              best_idx = idx;
            }
          }
        }
        dst[oy * ow + ox] = best_idx >= 0 ? best : T(0);
        arg[oy * ow + ox] = best_idx;
      }
    }
  });

  if (tracked) {
    tape->record([x, out, argmax, planes, in_plane, out_plane]() mutable {
      if (!x.requires_grad()) return;
      const T* dy = out.grad_data();
      parallel_for(planes, [&](int64_t p) {  // scatter stays inside one plane
        T* dx = x.grad_data() + p * in_plane;
        const T* d = dy + p * out_plane;
        const int32_t* arg = argmax->data() + p * out_plane;
        for (int64_t i = 0; i < out_plane; ++i) {
          if (arg[i] >= 0) dx[arg[i]] += d[i];
        }
      });
    });
  }
  return out;
}

// (B, C, H, W) -> (B, C), mean over the spatial plane.
template <typename T>
Tensor<T> global_avg_pool(Tape<T>* tape, Tensor<T> x) {
  detail::check(x.rank() == 4, "global_avg_pool input must be rank 4");
  const int batch = x.dim(0), channels = x.dim(1);
  const int64_t plane = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  detail::check(plane > 0, "global_avg_pool needs a nonempty spatial plane");

  const bool tracked = detail::track(tape, {&x});
  Tensor<T> out = detail::make_output<T>({batch, channels}, tracked, tape);
  const int64_t planes = static_cast<int64_t>(batch) * channels;
  for (int64_t p = 0; p < planes; ++p) {
    const T* src = x.data() + p * plane;
    double acc = 0.0;
    for (int64_t i = 0; i < plane; ++i) acc += src[i];
    out.data()[p] = T(acc / static_cast<double>(plane));
  }
  if (tracked) {
    tape->record([x, out, planes, plane]() mutable {
      if (!x.requires_grad()) return;
      const T* dy = out.grad_data();
      T* dx = x.grad_data();
      for (int64_t p = 0; p < planes; ++p) {
        const T share = dy[p] / static_cast<T>(plane);
        T* dst = dx + p * plane;
        for (int64_t i = 0; i < plane; ++i) dst[i] += share;
      }
    });
  }
  return out;
}

// --- dense layers ----------------------------------------------------------

// x (B, in) * w^T (in, out) + b -> (B, out); weight stored (out, in).
template <typename T>
Tensor<T> linear(Tape<T>* tape, Tensor<T> x, Tensor<T> w, Tensor<T> b) {
  detail::check(x.rank() == 2, "linear input must be rank 2 (batch, features)");
  detail::check(w.rank() == 2, "linear weight must be rank 2 (out, in)");
  const int batch = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  detail::check(w.dim(1) == in, "linear feature dimension: input has " + std::to_string(in) +
                                    ", weight expects " + std::to_string(w.dim(1)));
  detail::check(b.size() == out_dim, "linear bias dimension: want " + std::to_string(out_dim) +
                                         ", got " + std::to_string(b.size()));

  const bool tracked = detail::track(tape, {&x, &w, &b});
  Tensor<T> out = detail::make_output<T>({batch, out_dim}, tracked, tape);
  gemm_nt(batch, out_dim, in, x.data(), w.data(), out.data(), false);
  for (int n = 0; n < batch; ++n) {
    T* row = out.data() + static_cast<int64_t>(n) * out_dim;
    for (int o = 0; o < out_dim; ++o) row[o] += b.data()[o];
  }

  if (tracked) {
    tape->record([x, w, b, out, batch, in, out_dim]() mutable {
      const T* dy = out.grad_data();
      if (b.requires_grad()) {
        T* db = b.grad_data();
        for (int n = 0; n < batch; ++n) {
          const T* row = dy + static_cast<int64_t>(n) * out_dim;
          for (int o = 0; o < out_dim; ++o) db[o] += row[o];
        }
      }
      if (w.requires_grad()) {
        gemm_tn(out_dim, in, batch, dy, x.data(), w.grad_data(), true);
      }
      if (x.requires_grad()) {
        gemm_nn(batch, in, out_dim, dy, w.data(), x.grad_data(), true);
      }
    });
  }
  return out;
}

// Inverted-scaling dropout: kept activations are divided by 1-p during
// training so eval mode is the identity.
template <typename T>
Tensor<T> dropout(Tape<T>* tape, Tensor<T> x, double p, Rng& rng, bool train) {
  if (p < 0.0 || p >= 1.0) fail(ErrorKind::InvalidSpec, "dropout rate must be in [0,1)");
  if (!train || p == 0.0) return x;

  const bool tracked = detail::track(tape, {&x});
  Tensor<T> out = detail::make_output<T>(x.shape(), tracked, tape);
  const int64_t n = x.size();
  const T scale = T(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<T>>(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {  // raster order draw per element
    const T m = rng.uniform() < p ? T(0) : scale;
    (*mask)[i] = m;
    out.data()[i] = x.data()[i] * m;
  }
  if (tracked) {
    tape->record([x, out, mask, n]() mutable {
      if (!x.requires_grad()) return;
      const T* dy = out.grad_data();
      T* dx = x.grad_data();
      for (int64_t i = 0; i < n; ++i) dx[i] += dy[i] * (*mask)[i];
    });
  }
  return out;
}

// --- structure ops ---------------------------------------------------------

template <typename T>
Tensor<T> concat(Tape<T>* tape, const std::vector<Tensor<T>>& xs, int axis) {
  if (xs.empty()) fail(ErrorKind::EmptyInput, "concat of zero tensors");
  const int rank = xs.front().rank();
  detail::check(axis >= 0 && axis < rank, "concat axis out of range");
  int axis_total = 0;
  for (const Tensor<T>& t : xs) {
    detail::check(t.rank() == rank, "concat rank mismatch");
    for (int d = 0; d < rank; ++d) {
      detail::check(d == axis || t.dim(d) == xs.front().dim(d),
                    "concat dimension " + std::to_string(d) + " differs between inputs");
    }
    axis_total += t.dim(axis);
  }
  std::vector<int> shape = xs.front().shape();
  shape[static_cast<size_t>(axis)] = axis_total;

  bool any_grad = false;
  for (const Tensor<T>& t : xs) any_grad = any_grad || t.requires_grad();
  const bool tracked = tape != nullptr && any_grad;
  Tensor<T> out = detail::make_output<T>(shape, tracked, tape);

  int64_t outer = 1;
  for (int d = 0; d < axis; ++d) outer *= xs.front().dim(d);
  int64_t tail = 1;
  for (int d = axis + 1; d < rank; ++d) tail *= xs.front().dim(d);
  const int64_t out_block = static_cast<int64_t>(axis_total) * tail;

  int64_t offset = 0;  // in units of tail within one outer block
  for (const Tensor<T>& t : xs) {
    const int64_t block = static_cast<int64_t>(t.dim(axis)) * tail;
    for (int64_t o = 0; o < outer; ++o) {
      const T* src = t.data() + o * block;
      T* dst = out.data() + o * out_block + offset;
      for (int64_t i = 0; i < block; ++i) dst[i] = src[i];
    }
    offset += block;
  }

  if (tracked) {
    std::vector<Tensor<T>> inputs = xs;
    tape->record([inputs, out, outer, tail, out_block, axis]() mutable {
      const T* dy = out.grad_data();
      int64_t offset = 0;
      for (Tensor<T>& t : inputs) {
        const int64_t block = static_cast<int64_t>(t.dim(axis)) * tail;
        if (t.requires_grad()) {
          for (int64_t o = 0; o < outer; ++o) {
            const T* src = dy + o * out_block + offset;
            T* dst = t.grad_data() + o * block;
            for (int64_t i = 0; i < block; ++i) dst[i] += src[i];
          }
        }
        offset += block;
      }
    });
  }
  return out;
}

// Elementwise sum of identically shaped tensors (the residual connection).
template <typename T>
Tensor<T> add(Tape<T>* tape, Tensor<T> a, Tensor<T> b) {
  detail::check(a.shape() == b.shape(), "add needs identical shapes");
  const bool tracked = detail::track(tape, {&a, &b});
  Tensor<T> out = detail::make_output<T>(a.shape(), tracked, tape);
  const int64_t n = a.size();
  for (int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] + b.data()[i];
  if (tracked) {
    tape->record([a, b, out, n]() mutable {
      const T* dy = out.grad_data();
      if (a.requires_grad()) {
        T* da = a.grad_data();
        for (int64_t i = 0; i < n; ++i) da[i] += dy[i];
      }
      if (b.requires_grad()) {
        T* db = b.grad_data();
        for (int64_t i = 0; i < n; ++i) db[i] += dy[i];
      }
    });
  }
  return out;
}

// --- loss ------------------------------------------------------------------

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy over the batch plus lambda * sum of squared
// values of the listed (weight) parameters. Probabilities are clamped to
// [1e-7, 1-1e-7]; a clamped probability contributes zero gradient.
template <typename T>
Tensor<T> bce_l2_loss(Tape<T>* tape, Tensor<T> p, const std::vector<T>& y,
                      const std::vector<Tensor<T>>& l2_params, double lambda) {
  if (p.size() != static_cast<int64_t>(y.size())) {
    fail(ErrorKind::LengthMismatch, "loss needs matching lengths: " + std::to_string(p.size()) +
                                        " probabilities vs " + std::to_string(y.size()) +
                                        " labels");
  }
  if (p.size() == 0) fail(ErrorKind::EmptyInput, "loss of an empty batch");
  const int64_t n = p.size();

  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double pc =
        std::min(1.0 - kProbClamp, std::max(kProbClamp, static_cast<double>(p.data()[i])));
    const double yi = y[static_cast<size_t>(i)];
    acc += yi * std::log(pc) + (1.0 - yi) * std::log(1.0 - pc);
  }
  double penalty = 0.0;
  for (const Tensor<T>& w : l2_params) {
    for (const T v : w.values()) penalty += static_cast<double>(v) * v;
  }
  const double value = -acc / static_cast<double>(n) + lambda * penalty;

  bool any_grad = p.requires_grad();
  for (const Tensor<T>& w : l2_params) any_grad = any_grad || w.requires_grad();
  const bool tracked = tape != nullptr && any_grad;
  Tensor<T> out = detail::make_output<T>({1}, tracked, tape);
  out.data()[0] = T(value);

  if (tracked) {
    std::vector<Tensor<T>> penalized = l2_params;
    auto labels = std::make_shared<std::vector<T>>(y);
    tape->record([p, out, labels, penalized, lambda, n]() mutable {
      const double g = out.grad_data()[0];
      if (p.requires_grad()) {
        T* dp = p.grad_data();
        for (int64_t i = 0; i < n; ++i) {
          const double pv = p.data()[i];
          if (pv < kProbClamp || pv > 1.0 - kProbClamp) continue;  // clamp plateau
          const double yi = (*labels)[static_cast<size_t>(i)];
          dp[i] += T(g * (-(yi / pv) + (1.0 - yi) / (1.0 - pv)) / static_cast<double>(n));
        }
      }
      for (Tensor<T>& w : penalized) {
        if (!w.requires_grad()) continue;
        T* dw = w.grad_data();
        const T* wv = w.data();
        const int64_t m = w.size();
        for (int64_t i = 0; i < m; ++i) dw[i] += T(g * 2.0 * lambda * wv[i]);
      }
    });
  }
  return out;
}

// --- initialization --------------------------------------------------------

// Kaiming-style uniform fill over (-sqrt(6/fan_in), sqrt(6/fan_in)), drawn
// in element order.
template <typename T>
void fill_kaiming_uniform(Tensor<T>& w, int64_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (T& v : w.values()) v = T(rng.uniform(-bound, bound));
}

}  // namespace freqcross
