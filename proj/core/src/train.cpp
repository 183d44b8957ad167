#include "salent/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace salent {

namespace {
[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("train: " + what);
}
}  // namespace

Weights init_weights(const NetworkSpec& spec, SplitMix64& rng) {
  infer_shapes(spec);  // validate before drawing
  Weights w;
  w.kernels.resize(spec.layers.size());
  w.biases.resize(spec.layers.size());
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    int64_t fan_in = 0;
    std::vector<int64_t> kshape;
    int64_t bias_n = 0;
    if (l.kind == LayerKind::conv) {
      fan_in = static_cast<int64_t>(l.in_channels) * l.kernel * l.kernel;
      kshape = {l.out_channels, l.in_channels, l.kernel, l.kernel};
      bias_n = l.out_channels;
    } else if (l.kind == LayerKind::linear) {
      fan_in = l.in_features;
      kshape = {l.out_features, l.in_features};
      bias_n = l.out_features;
    } else {
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Tensor kernel(kshape);
    for (int64_t j = 0; j < kernel.size(); ++j) {
      kernel[j] = static_cast<float>((2.0 * rng.next_double() - 1.0) * bound);
    }
    w.kernels[i] = std::move(kernel);
    w.biases[i] = Tensor({bias_n});
  }
  return w;
}

TrainResult train(const NetworkSpec& spec, const Dataset& train_set,
                  const Dataset& test_set, const TrainConfig& config) {
  if (config.learning_rate < 0.0) fail("learning rate must be non-negative");
  if (config.epochs < 1) fail("epochs must be >= 1");
  if (config.batch_size < 1) fail("batch size must be >= 1");
  const int64_t n = train_set.count();
  if (n == 0 || test_set.count() == 0) fail("datasets must be non-empty");
  for (int label : train_set.labels) {
    if (label < 0 || label >= spec.class_count) fail("train label out of range");
  }
  for (int label : test_set.labels) {
    if (label < 0 || label >= spec.class_count) fail("test label out of range");
  }

  SplitMix64 rng(config.seed);
  Weights weights = init_weights(spec, rng);

  const int64_t pixels = train_set.images.size() / n;
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates from the same stream that seeded the weights.
    for (int64_t i = n - 1; i > 0; --i) {
      const uint64_t j = rng.next_below(static_cast<uint64_t>(i) + 1);
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    for (int64_t start = 0; start < n; start += config.batch_size) {
      const int64_t m = std::min<int64_t>(config.batch_size, n - start);
      std::vector<float> batch_data(static_cast<size_t>(m * pixels));
      std::vector<int> batch_labels(static_cast<size_t>(m));
      for (int64_t b = 0; b < m; ++b) {
        const int64_t src = order[static_cast<size_t>(start + b)];
        std::copy(train_set.images.data() + src * pixels,
                  train_set.images.data() + (src + 1) * pixels,
                  batch_data.data() + b * pixels);
        batch_labels[static_cast<size_t>(b)] = train_set.labels[static_cast<size_t>(src)];
      }
      Tensor batch({m, spec.input_shape[0], spec.input_shape[1], spec.input_shape[2]},
                   std::move(batch_data));
      const LossResult step = loss_and_grads(spec, weights, batch, batch_labels,
                                             config.precision);
      weights = sgd_step(weights, step.grads, config.learning_rate);
    }
    result.epoch_accuracy.push_back(evaluate(spec, weights, test_set));
  }
  result.weights = std::move(weights);
  return result;
}

}  // namespace salent
