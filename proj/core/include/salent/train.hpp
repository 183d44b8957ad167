#pragma once

#include <cstdint>
#include <vector>

#include "salent/engine.hpp"
#include "salent/net.hpp"
#include "salent/rng.hpp"

namespace salent {

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 20;
  int batch_size = 32;
  uint64_t seed = 0;
  Precision precision = Precision::f32;
};

/// Kaiming-style uniform init in [-sqrt(6/fan_in), +sqrt(6/fan_in)], biases
/// zero. Draws consume the stream layer by layer in element order.
Weights init_weights(const NetworkSpec& spec, SplitMix64& rng);

struct TrainResult {
  Weights weights;
  std::vector<double> epoch_accuracy;  // on the test split, one per epoch
};

/// Deterministic SGD: same (spec, seed, data, config) gives bit-identical
/// weights. Data is reshuffled each epoch from the same PRNG stream that
/// seeded the weights.
TrainResult train(const NetworkSpec& spec, const Dataset& train_set,
                  const Dataset& test_set, const TrainConfig& config);

}  // namespace salent
