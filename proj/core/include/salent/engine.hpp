#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "salent/net.hpp"
#include "salent/tensor.hpp"

namespace salent {

/// f32: values are stored as float32 between operations while every
/// reduction accumulates in double. f64: double end to end (the mode used
/// by finite-difference checks).
enum class Precision { f32, f64 };

/// Every layer output of one single-image forward pass, in network order.
/// raw64 mirrors the outputs at full double precision when the pass ran
/// under Precision::f64.
struct ActivationCache {
  Tensor input;
  std::vector<std::pair<std::string, Tensor>> outputs;
  std::vector<double> input64;
  std::vector<std::vector<double>> raw64;

  const Tensor& output_of(const std::string& layer_name) const;
};

struct ForwardResult {
  std::vector<double> logits;
  ActivationCache cache;
};

/// Single-image forward pass with activation caching.
ForwardResult forward(const NetworkSpec& spec, const Weights& weights,
                      const Tensor& image, Precision precision = Precision::f32);

/// d(logit of class_index) / d(output of layer_name), same shape as that
/// output. Maxpool routes to the first-occurrence argmax, relu gates by
/// output > 0.
Tensor backward_to_layer(const NetworkSpec& spec, const Weights& weights,
                         const ActivationCache& cache, int class_index,
                         const std::string& layer_name,
                         Precision precision = Precision::f32);

/// Gradient of the class logit w.r.t. every layer output at once; entry i
/// matches backward_to_layer for layer i. One backward sweep.
std::vector<Tensor> backward_all_layers(const NetworkSpec& spec,
                                        const Weights& weights,
                                        const ActivationCache& cache,
                                        int class_index,
                                        Precision precision = Precision::f32);

/// Parameter gradients, parallel to Weights; double precision, fixed
/// summation order.
struct Gradients {
  std::vector<std::vector<double>> kernels;
  std::vector<std::vector<double>> biases;
};

struct LossResult {
  double loss = 0.0;
  Gradients grads;
};

/// Mean softmax cross-entropy over a (N,C,H,W) batch plus gradients for
/// every weight and bias.
LossResult loss_and_grads(const NetworkSpec& spec, const Weights& weights,
                          const Tensor& batch, const std::vector<int>& labels,
                          Precision precision = Precision::f32);

/// w <- w - lr*g, plain SGD. The update is computed in double and stored
/// back at float32.
Weights sgd_step(const Weights& weights, const Gradients& grads,
                 double learning_rate);

/// Fraction of argmax(logits) == label; argmax ties go to the lowest class.
double evaluate(const NetworkSpec& spec, const Weights& weights,
                const Dataset& dataset);

/// Batched logits without caching, one row per image.
std::vector<std::vector<double>> forward_logits_batch(
    const NetworkSpec& spec, const Weights& weights, const Tensor& batch,
    Precision precision = Precision::f32);

namespace detail {
/// Evaluates layers [first_layer..end) on a raw double buffer; used by the
/// finite-difference harness to treat the network tail as a function of one
/// intermediate activation.
std::vector<double> forward_tail(const NetworkSpec& spec,
                                 const Weights& weights, int first_layer,
                                 const std::vector<double>& input,
                                 Precision precision);
}  // namespace detail

}  // namespace salent
