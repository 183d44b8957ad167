#include "salent/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace salent {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("engine: " + what);
}

// Double-precision mirror of Weights, parallel to spec.layers.
struct DWeights {
  std::vector<std::vector<double>> kernels;
  std::vector<std::vector<double>> biases;
};

DWeights widen(const Weights& w) {
  DWeights d;
  d.kernels.resize(w.kernels.size());
  d.biases.resize(w.biases.size());
  for (size_t i = 0; i < w.kernels.size(); ++i) {
    d.kernels[i].assign(w.kernels[i].values().begin(), w.kernels[i].values().end());
    d.biases[i].assign(w.biases[i].values().begin(), w.biases[i].values().end());
  }
  return d;
}

void round_storage(std::vector<double>& v, Precision p) {
  if (p == Precision::f32) {
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  }
}

// Valid output range [lo,hi] such that o*stride + k_off - pad lands inside
// [0, in_size) for every o in the range.
inline void valid_out_span(int k_off, int stride, int pad, int in_size,
                           int out_size, int& lo, int& hi) {
  const int shift = k_off - pad;  // input index = o*stride + shift
  lo = shift < 0 ? (-shift + stride - 1) / stride : 0;
  hi = (in_size - 1 - shift) / stride;
  if (hi > out_size - 1) hi = out_size - 1;
}

struct Dims {
  int c = 0, h = 0, w = 0;  // h=w=1 for flat buffers, c = features
};

Dims dims_of(const LayerShape& s) {
  return s.spatial ? Dims{s.c, s.h, s.w} : Dims{s.features, 1, 1};
}

void conv_forward(const std::vector<double>& in, Dims id,
                  const std::vector<double>& kernel, const std::vector<double>& bias,
                  const LayerSpec& l, Dims od, int64_t batch,
                  std::vector<double>& out) {
  const int k = l.kernel, s = l.stride, p = l.padding;
  out.assign(static_cast<size_t>(batch) * od.c * od.h * od.w, 0.0);
  for (int64_t b = 0; b < batch; ++b) {
    for (int oc = 0; oc < od.c; ++oc) {
      double* obase = out.data() + ((b * od.c + oc) * od.h) * od.w;
      const double bv = bias[static_cast<size_t>(oc)];
      for (int i = 0; i < od.h * od.w; ++i) obase[i] = bv;
      for (int ic = 0; ic < id.c; ++ic) {
        const double* ibase = in.data() + ((b * id.c + ic) * id.h) * id.w;
        const double* kbase =
            kernel.data() + ((static_cast<size_t>(oc) * id.c + ic) * k) * k;
        for (int ky = 0; ky < k; ++ky) {
          int oy_lo, oy_hi;
          valid_out_span(ky, s, p, id.h, od.h, oy_lo, oy_hi);
          for (int kx = 0; kx < k; ++kx) {
            const double wv = kbase[ky * k + kx];
            int ox_lo, ox_hi;
            valid_out_span(kx, s, p, id.w, od.w, ox_lo, ox_hi);
            for (int oy = oy_lo; oy <= oy_hi; ++oy) {
              const int iy = oy * s + ky - p;
              const double* irow = ibase + iy * id.w + (kx - p);
              double* orow = obase + oy * od.w;
              for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                orow[ox] += wv * irow[ox * s];
              }
            }
          }
        }
      }
    }
  }
}

void conv_backward_input(const std::vector<double>& dout, Dims od,
                         const std::vector<double>& kernel, const LayerSpec& l,
                         Dims id, int64_t batch, std::vector<double>& din) {
  const int k = l.kernel, s = l.stride, p = l.padding;
  din.assign(static_cast<size_t>(batch) * id.c * id.h * id.w, 0.0);
  for (int64_t b = 0; b < batch; ++b) {
    for (int oc = 0; oc < od.c; ++oc) {
      const double* gbase = dout.data() + ((b * od.c + oc) * od.h) * od.w;
      for (int ic = 0; ic < id.c; ++ic) {
        double* dbase = din.data() + ((b * id.c + ic) * id.h) * id.w;
        const double* kbase =
            kernel.data() + ((static_cast<size_t>(oc) * id.c + ic) * k) * k;
        for (int ky = 0; ky < k; ++ky) {
          int oy_lo, oy_hi;
          valid_out_span(ky, s, p, id.h, od.h, oy_lo, oy_hi);
          for (int kx = 0; kx < k; ++kx) {
            const double wv = kbase[ky * k + kx];
            int ox_lo, ox_hi;
            valid_out_span(kx, s, p, id.w, od.w, ox_lo, ox_hi);
            for (int oy = oy_lo; oy <= oy_hi; ++oy) {
              const int iy = oy * s + ky - p;
              double* drow = dbase + iy * id.w + (kx - p);
              const double* grow = gbase + oy * od.w;
              for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                drow[ox * s] += wv * grow[ox];
              }
            }
          }
        }
      }
    }
  }
}

void conv_backward_params(const std::vector<double>& in, Dims id,
                          const std::vector<double>& dout, Dims od,
                          const LayerSpec& l, int64_t batch,
                          std::vector<double>& dkernel, std::vector<double>& dbias) {
  const int k = l.kernel, s = l.stride, p = l.padding;
  for (int64_t b = 0; b < batch; ++b) {
    for (int oc = 0; oc < od.c; ++oc) {
      const double* gbase = dout.data() + ((b * od.c + oc) * od.h) * od.w;
      double acc = 0.0;
      for (int i = 0; i < od.h * od.w; ++i) acc += gbase[i];
      dbias[static_cast<size_t>(oc)] += acc;
      for (int ic = 0; ic < id.c; ++ic) {
        const double* ibase = in.data() + ((b * id.c + ic) * id.h) * id.w;
        double* kbase =
            dkernel.data() + ((static_cast<size_t>(oc) * id.c + ic) * k) * k;
        for (int ky = 0; ky < k; ++ky) {
          int oy_lo, oy_hi;
          valid_out_span(ky, s, p, id.h, od.h, oy_lo, oy_hi);
          for (int kx = 0; kx < k; ++kx) {
            int ox_lo, ox_hi;
            valid_out_span(kx, s, p, id.w, od.w, ox_lo, ox_hi);
            double sum = 0.0;
            for (int oy = oy_lo; oy <= oy_hi; ++oy) {
              const int iy = oy * s + ky - p;
              const double* irow = ibase + iy * id.w + (kx - p);
              const double* grow = gbase + oy * od.w;
              for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                sum += irow[ox * s] * grow[ox];
              }
            }
            kbase[ky * k + kx] += sum;
          }
        }
      }
    }
  }
}

void maxpool_forward(const std::vector<double>& in, Dims id, const LayerSpec& l,
                     Dims od, int64_t batch, std::vector<double>& out) {
  const int k = l.kernel, s = l.stride;
  out.resize(static_cast<size_t>(batch) * od.c * od.h * od.w);
  size_t oi = 0;
  for (int64_t b = 0; b < batch; ++b) {
    for (int c = 0; c < id.c; ++c) {
      const double* ibase = in.data() + ((b * id.c + c) * id.h) * id.w;
      for (int oy = 0; oy < od.h; ++oy) {
        for (int ox = 0; ox < od.w; ++ox) {
          double best = ibase[(oy * s) * id.w + ox * s];
          for (int ky = 0; ky < k; ++ky) {
            const double* irow = ibase + (oy * s + ky) * id.w + ox * s;
            for (int kx = 0; kx < k; ++kx) {
              if (irow[kx] > best) best = irow[kx];
            }
          }
          out[oi++] = best;
        }
      }
    }
  }
}

// Routes each window's gradient to the first-occurrence argmax in row-major
// window order, recomputed from the cached input.
void maxpool_backward(const std::vector<double>& in, Dims id,
                      const std::vector<double>& dout, Dims od,
                      const LayerSpec& l, int64_t batch, std::vector<double>& din) {
  const int k = l.kernel, s = l.stride;
  din.assign(in.size(), 0.0);
  size_t oi = 0;
  for (int64_t b = 0; b < batch; ++b) {
    for (int c = 0; c < id.c; ++c) {
      const size_t plane = (static_cast<size_t>(b) * id.c + c) * id.h * id.w;
      const double* ibase = in.data() + plane;
      for (int oy = 0; oy < od.h; ++oy) {
        for (int ox = 0; ox < od.w; ++ox) {
          double best = ibase[(oy * s) * id.w + ox * s];
          int best_idx = (oy * s) * id.w + ox * s;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int idx = (oy * s + ky) * id.w + ox * s + kx;
              if (ibase[idx] > best) {
                best = ibase[idx];
                best_idx = idx;
              }
            }
          }
          din[plane + best_idx] += dout[oi++];
        }
      }
    }
  }
}

void linear_forward(const std::vector<double>& in, const std::vector<double>& weight,
                    const std::vector<double>& bias, int in_f, int out_f,
                    int64_t batch, std::vector<double>& out) {
  out.resize(static_cast<size_t>(batch) * out_f);
  for (int64_t b = 0; b < batch; ++b) {
    const double* irow = in.data() + b * in_f;
    double* orow = out.data() + b * out_f;
    for (int o = 0; o < out_f; ++o) {
      const double* wrow = weight.data() + static_cast<size_t>(o) * in_f;
      double acc = bias[static_cast<size_t>(o)];
      for (int i = 0; i < in_f; ++i) acc += wrow[i] * irow[i];
      orow[o] = acc;
    }
  }
}

void linear_backward_input(const std::vector<double>& dout,
                           const std::vector<double>& weight, int in_f, int out_f,
                           int64_t batch, std::vector<double>& din) {
  din.assign(static_cast<size_t>(batch) * in_f, 0.0);
  for (int64_t b = 0; b < batch; ++b) {
    const double* grow = dout.data() + b * out_f;
    double* drow = din.data() + b * in_f;
    for (int o = 0; o < out_f; ++o) {
      const double g = grow[o];
      const double* wrow = weight.data() + static_cast<size_t>(o) * in_f;
      for (int i = 0; i < in_f; ++i) drow[i] += g * wrow[i];
    }
  }
}

void linear_backward_params(const std::vector<double>& in,
                            const std::vector<double>& dout, int in_f, int out_f,
                            int64_t batch, std::vector<double>& dweight,
                            std::vector<double>& dbias) {
  for (int64_t b = 0; b < batch; ++b) {
    const double* irow = in.data() + b * in_f;
    const double* grow = dout.data() + b * out_f;
    for (int o = 0; o < out_f; ++o) {
      const double g = grow[o];
      dbias[static_cast<size_t>(o)] += g;
      double* wrow = dweight.data() + static_cast<size_t>(o) * in_f;
      for (int i = 0; i < in_f; ++i) wrow[i] += g * irow[i];
    }
  }
}

// Forward over all layers; acts[i] is layer i's batched output.
std::vector<std::vector<double>> run_forward(const NetworkSpec& spec,
                                             const std::vector<LayerShape>& shapes,
                                             const DWeights& dw,
                                             const std::vector<double>& input,
                                             int64_t batch, Precision precision) {
  std::vector<std::vector<double>> acts(spec.layers.size());
  const std::vector<double>* cur = &input;
  Dims id{spec.input_shape[0], spec.input_shape[1], spec.input_shape[2]};
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const Dims od = dims_of(shapes[i]);
    switch (l.kind) {
      case LayerKind::conv:
        conv_forward(*cur, id, dw.kernels[i], dw.biases[i], l, od, batch, acts[i]);
        break;
      case LayerKind::relu:
        acts[i].resize(cur->size());
        for (size_t j = 0; j < cur->size(); ++j) {
          acts[i][j] = (*cur)[j] > 0.0 ? (*cur)[j] : 0.0;
        }
        break;
      case LayerKind::maxpool:
        maxpool_forward(*cur, id, l, od, batch, acts[i]);
        break;
      case LayerKind::flatten:
        acts[i] = *cur;
        break;
      case LayerKind::linear:
        linear_forward(*cur, dw.kernels[i], dw.biases[i], l.in_features,
                       l.out_features, batch, acts[i]);
        break;
    }
    round_storage(acts[i], precision);
    cur = &acts[i];
    id = od;
  }
  return acts;
}

// Backward through layer i given its input/output and the gradient at its
// output; fills din and, when params is non-null, accumulates dkernel/dbias.
void run_layer_backward(const NetworkSpec& spec,
                        const std::vector<LayerShape>& shapes, const DWeights& dw,
                        size_t i, const std::vector<double>& in, Dims id,
                        const std::vector<double>& out,
                        const std::vector<double>& dout, int64_t batch,
                        std::vector<double>& din, Gradients* params) {
  const LayerSpec& l = spec.layers[i];
  const Dims od = dims_of(shapes[i]);
  switch (l.kind) {
    case LayerKind::conv:
      conv_backward_input(dout, od, dw.kernels[i], l, id, batch, din);
      if (params) {
        conv_backward_params(in, id, dout, od, l, batch, params->kernels[i],
                             params->biases[i]);
      }
      break;
    case LayerKind::relu:
      din.resize(dout.size());
      for (size_t j = 0; j < dout.size(); ++j) {
        din[j] = out[j] > 0.0 ? dout[j] : 0.0;
      }
      break;
    case LayerKind::maxpool:
      maxpool_backward(in, id, dout, od, l, batch, din);
      break;
    case LayerKind::flatten:
      din = dout;
      break;
    case LayerKind::linear:
      linear_backward_input(dout, dw.kernels[i], l.in_features, l.out_features,
                            batch, din);
      if (params) {
        linear_backward_params(in, dout, l.in_features, l.out_features, batch,
                               params->kernels[i], params->biases[i]);
      }
      break;
  }
}

Dims input_dims(const NetworkSpec& spec, const std::vector<LayerShape>& shapes,
                size_t i) {
  return i == 0 ? Dims{spec.input_shape[0], spec.input_shape[1], spec.input_shape[2]}
                : dims_of(shapes[i - 1]);
}

std::vector<double> widen_image(const NetworkSpec& spec, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != spec.input_shape[0] ||
      image.dim(1) != spec.input_shape[1] || image.dim(2) != spec.input_shape[2]) {
    fail("image shape does not match the network input shape");
  }
  return std::vector<double>(image.values().begin(), image.values().end());
}

Tensor narrow_to_tensor(const std::vector<double>& v, const LayerShape& shape) {
  std::vector<float> data(v.size());
  for (size_t i = 0; i < v.size(); ++i) data[i] = static_cast<float>(v[i]);
  if (shape.spatial) {
    return Tensor({shape.c, shape.h, shape.w}, std::move(data));
  }
  return Tensor({shape.features}, std::move(data));
}

// Gradient of logit class_index w.r.t. each layer output, walking backwards;
// stops after writing the entry for stop_layer (negative: all layers).
std::vector<std::vector<double>> backprop_activations(
    const NetworkSpec& spec, const std::vector<LayerShape>& shapes,
    const DWeights& dw, const std::vector<double>& input,
    const std::vector<std::vector<double>>& acts, int class_index, int stop_layer,
    Precision precision) {
  const size_t n = spec.layers.size();
  std::vector<std::vector<double>> grads(n);
  grads[n - 1].assign(static_cast<size_t>(spec.class_count), 0.0);
  grads[n - 1][static_cast<size_t>(class_index)] = 1.0;
  for (size_t i = n - 1; i > static_cast<size_t>(std::max(stop_layer, 0)); --i) {
    const std::vector<double>& in = i == 0 ? input : acts[i - 1];
    run_layer_backward(spec, shapes, dw, i, in, input_dims(spec, shapes, i),
                       acts[i], grads[i], 1, grads[i - 1], nullptr);
    (void)precision;
  }
  return grads;
}

}  // namespace

const Tensor& ActivationCache::output_of(const std::string& layer_name) const {
  for (const auto& [name, tensor] : outputs) {
    if (name == layer_name) return tensor;
  }
  fail("no cached output for layer '" + layer_name + "'");
}

ForwardResult forward(const NetworkSpec& spec, const Weights& weights,
                      const Tensor& image, Precision precision) {
  const auto shapes = infer_shapes(spec);
  const DWeights dw = widen(weights);
  const std::vector<double> input = widen_image(spec, image);
  auto acts = run_forward(spec, shapes, dw, input, 1, precision);

  ForwardResult result;
  result.logits = acts.back();
  result.cache.input = image;
  result.cache.outputs.reserve(spec.layers.size());
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    result.cache.outputs.emplace_back(spec.layers[i].name,
                                      narrow_to_tensor(acts[i], shapes[i]));
  }
  if (precision == Precision::f64) {
    result.cache.input64 = input;
    result.cache.raw64 = std::move(acts);
  }
  return result;
}

namespace {

// Rebuilds the double-precision activations recorded by forward().
void cache_to_buffers(const NetworkSpec& spec, const ActivationCache& cache,
                      std::vector<double>& input,
                      std::vector<std::vector<double>>& acts) {
  if (!cache.raw64.empty()) {
    input = cache.input64;
    acts = cache.raw64;
    return;
  }
  input.assign(cache.input.values().begin(), cache.input.values().end());
  acts.resize(cache.outputs.size());
  if (cache.outputs.size() != spec.layers.size()) {
    fail("activation cache does not match the spec");
  }
  for (size_t i = 0; i < cache.outputs.size(); ++i) {
    if (cache.outputs[i].first != spec.layers[i].name) {
      fail("activation cache does not match the spec");
    }
    const auto& v = cache.outputs[i].second.values();
    acts[i].assign(v.begin(), v.end());
  }
}

}  // namespace

Tensor backward_to_layer(const NetworkSpec& spec, const Weights& weights,
                         const ActivationCache& cache, int class_index,
                         const std::string& layer_name, Precision precision) {
  const auto shapes = infer_shapes(spec);
  const int target = spec.layer_index(layer_name);
  if (target < 0) fail("unknown layer '" + layer_name + "'");
  if (class_index < 0 || class_index >= spec.class_count) {
    fail("class index " + std::to_string(class_index) + " out of range");
  }
  const DWeights dw = widen(weights);
  std::vector<double> input;
  std::vector<std::vector<double>> acts;
  cache_to_buffers(spec, cache, input, acts);
  auto grads = backprop_activations(spec, shapes, dw, input, acts, class_index,
                                    target, precision);
  return narrow_to_tensor(grads[static_cast<size_t>(target)],
                          shapes[static_cast<size_t>(target)]);
}

std::vector<Tensor> backward_all_layers(const NetworkSpec& spec,
                                        const Weights& weights,
                                        const ActivationCache& cache,
                                        int class_index, Precision precision) {
  const auto shapes = infer_shapes(spec);
  if (class_index < 0 || class_index >= spec.class_count) {
    fail("class index " + std::to_string(class_index) + " out of range");
  }
  const DWeights dw = widen(weights);
  std::vector<double> input;
  std::vector<std::vector<double>> acts;
  cache_to_buffers(spec, cache, input, acts);
  auto grads = backprop_activations(spec, shapes, dw, input, acts, class_index,
                                    -1, precision);
  std::vector<Tensor> out;
  out.reserve(grads.size());
  for (size_t i = 0; i < grads.size(); ++i) {
    out.push_back(narrow_to_tensor(grads[i], shapes[i]));
  }
  return out;
}

namespace {

// Mean softmax cross-entropy and its logit gradient, batch-major.
double softmax_loss(const std::vector<double>& logits, const std::vector<int>& labels,
                    int classes, std::vector<double>& dlogits) {
  const int64_t batch = static_cast<int64_t>(labels.size());
  dlogits.assign(logits.size(), 0.0);
  double loss = 0.0;
  for (int64_t b = 0; b < batch; ++b) {
    const double* row = logits.data() + b * classes;
    double* drow = dlogits.data() + b * classes;
    double mx = row[0];
    for (int i = 1; i < classes; ++i) mx = std::max(mx, row[i]);
    double sum = 0.0;
    for (int i = 0; i < classes; ++i) sum += std::exp(row[i] - mx);
    const double log_z = mx + std::log(sum);
    loss += log_z - row[labels[static_cast<size_t>(b)]];
    const double inv = 1.0 / (sum * static_cast<double>(batch));
    for (int i = 0; i < classes; ++i) drow[i] = std::exp(row[i] - mx) * inv;
    drow[labels[static_cast<size_t>(b)]] -= 1.0 / static_cast<double>(batch);
  }
  return loss / static_cast<double>(batch);
}

std::vector<double> widen_batch(const NetworkSpec& spec, const Tensor& batch) {
  if (batch.rank() != 4 || batch.dim(1) != spec.input_shape[0] ||
      batch.dim(2) != spec.input_shape[1] || batch.dim(3) != spec.input_shape[2]) {
    fail("batch shape does not match the network input shape");
  }
  return std::vector<double>(batch.values().begin(), batch.values().end());
}

Gradients zero_gradients(const NetworkSpec& spec) {
  Gradients g;
  g.kernels.resize(spec.layers.size());
  g.biases.resize(spec.layers.size());
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.kind == LayerKind::conv) {
      g.kernels[i].assign(static_cast<size_t>(l.out_channels) * l.in_channels *
                              l.kernel * l.kernel,
                          0.0);
      g.biases[i].assign(static_cast<size_t>(l.out_channels), 0.0);
    } else if (l.kind == LayerKind::linear) {
      g.kernels[i].assign(static_cast<size_t>(l.out_features) * l.in_features, 0.0);
      g.biases[i].assign(static_cast<size_t>(l.out_features), 0.0);
    }
  }
  return g;
}

}  // namespace

LossResult loss_and_grads(const NetworkSpec& spec, const Weights& weights,
                          const Tensor& batch, const std::vector<int>& labels,
                          Precision precision) {
  const auto shapes = infer_shapes(spec);
  const int64_t n = batch.dim(0);
  if (static_cast<int64_t>(labels.size()) != n) fail("label count mismatch");
  for (int label : labels) {
    if (label < 0 || label >= spec.class_count) {
      fail("label " + std::to_string(label) + " out of range");
    }
  }
  const DWeights dw = widen(weights);
  const std::vector<double> input = widen_batch(spec, batch);
  auto acts = run_forward(spec, shapes, dw, input, n, precision);

  LossResult result;
  result.grads = zero_gradients(spec);
  std::vector<double> dout;
  result.loss = softmax_loss(acts.back(), labels, spec.class_count, dout);

  std::vector<double> din;
  for (size_t i = spec.layers.size(); i-- > 0;) {
    const std::vector<double>& in = i == 0 ? input : acts[i - 1];
    run_layer_backward(spec, shapes, dw, i, in, input_dims(spec, shapes, i),
                       acts[i], dout, n, din, &result.grads);
    dout = std::move(din);
    din.clear();
  }
  return result;
}

Weights sgd_step(const Weights& weights, const Gradients& grads,
                 double learning_rate) {
  Weights out = weights;
  for (size_t i = 0; i < out.kernels.size(); ++i) {
    if (grads.kernels[i].empty() && out.kernels[i].size() == 0) continue;
    if (static_cast<size_t>(out.kernels[i].size()) != grads.kernels[i].size() ||
        static_cast<size_t>(out.biases[i].size()) != grads.biases[i].size()) {
      fail("gradient shapes do not match the weights");
    }
    auto& kv = out.kernels[i].values();
    for (size_t j = 0; j < kv.size(); ++j) {
      kv[j] = static_cast<float>(static_cast<double>(kv[j]) -
                                 learning_rate * grads.kernels[i][j]);
    }
    auto& bv = out.biases[i].values();
    for (size_t j = 0; j < bv.size(); ++j) {
      bv[j] = static_cast<float>(static_cast<double>(bv[j]) -
                                 learning_rate * grads.biases[i][j]);
    }
  }
  return out;
}

std::vector<std::vector<double>> forward_logits_batch(const NetworkSpec& spec,
                                                      const Weights& weights,
                                                      const Tensor& batch,
                                                      Precision precision) {
  const auto shapes = infer_shapes(spec);
  const DWeights dw = widen(weights);
  const std::vector<double> input = widen_batch(spec, batch);
  const int64_t n = batch.dim(0);
  auto acts = run_forward(spec, shapes, dw, input, n, precision);
  const auto& logits = acts.back();
  std::vector<std::vector<double>> rows(static_cast<size_t>(n));
  for (int64_t b = 0; b < n; ++b) {
    rows[static_cast<size_t>(b)].assign(logits.begin() + b * spec.class_count,
                                        logits.begin() + (b + 1) * spec.class_count);
  }
  return rows;
}

double evaluate(const NetworkSpec& spec, const Weights& weights,
                const Dataset& dataset) {
  const int64_t n = dataset.count();
  if (n == 0) fail("evaluate: empty dataset");
  const auto shapes = infer_shapes(spec);
  const DWeights dw = widen(weights);

  constexpr int64_t kChunk = 128;
  int64_t correct = 0;
  const int64_t stride = dataset.images.size() / n;
  for (int64_t start = 0; start < n; start += kChunk) {
    const int64_t m = std::min(kChunk, n - start);
    std::vector<double> input(dataset.images.data() + start * stride,
                              dataset.images.data() + (start + m) * stride);
    auto acts = run_forward(spec, shapes, dw, input, m, Precision::f32);
    const auto& logits = acts.back();
    for (int64_t b = 0; b < m; ++b) {
      const double* row = logits.data() + b * spec.class_count;
      int arg = 0;
      for (int i = 1; i < spec.class_count; ++i) {
        if (row[i] > row[arg]) arg = i;  // ties keep the lowest index
      }
      if (arg == dataset.labels[static_cast<size_t>(start + b)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

namespace detail {

std::vector<double> forward_tail(const NetworkSpec& spec, const Weights& weights,
                                 int first_layer, const std::vector<double>& input,
                                 Precision precision) {
  const auto shapes = infer_shapes(spec);
  const DWeights dw = widen(weights);
  std::vector<double> cur = input;
  Dims id = input_dims(spec, shapes, static_cast<size_t>(first_layer));
  std::vector<double> next;
  for (size_t i = static_cast<size_t>(first_layer); i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const Dims od = dims_of(shapes[i]);
    switch (l.kind) {
      case LayerKind::conv:
        conv_forward(cur, id, dw.kernels[i], dw.biases[i], l, od, 1, next);
        break;
      case LayerKind::relu:
        next.resize(cur.size());
        for (size_t j = 0; j < cur.size(); ++j) next[j] = cur[j] > 0.0 ? cur[j] : 0.0;
        break;
      case LayerKind::maxpool:
        maxpool_forward(cur, id, l, od, 1, next);
        break;
      case LayerKind::flatten:
        next = cur;
        break;
      case LayerKind::linear:
        linear_forward(cur, dw.kernels[i], dw.biases[i], l.in_features,
                       l.out_features, 1, next);
        break;
    }
    round_storage(next, precision);
    cur = std::move(next);
    next.clear();
    id = od;
  }
  return cur;
}

}  // namespace detail

}  // namespace salent
