#pragma once

#include <optional>
#include <string>
#include <vector>

#include "salent/net.hpp"
#include "salent/profiler.hpp"
#include "salent/train.hpp"

namespace salent {

struct PruneConfig {
  double accuracy_tolerance = 0.01;
  int max_removals = 0;
  int protected_prefix = 2;     // leading conv layers never removed
  double flat_threshold = 0.005;
  TrainConfig train;
  ProfileOptions profile;       // defaults to ground-truth class policy
  int64_t profile_images = 0;   // cap on test images profiled per round; 0 = all
};

struct PruneIteration {
  int round = 0;
  std::string removed_layer;
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  EntropyProfile profile;
  NetworkSpec spec_after;
};

enum class StopReason { tolerance_exceeded, no_candidate, max_removals };
const char* to_string(StopReason reason);

struct PruneReport {
  double baseline_accuracy = 0.0;
  std::vector<PruneIteration> iterations;
  NetworkSpec final_spec;
  StopReason stop_reason = StopReason::max_removals;
};

/// Deepest unprotected conv layer whose AME delta against the previous
/// profiled row is >= -flat_threshold; nullopt when no layer qualifies.
std::optional<std::string> select_removal_candidate(const EntropyProfile& profile,
                                                    const NetworkSpec& spec,
                                                    const PruneConfig& config);

/// Deletes the conv (and its immediately following relu, when present),
/// re-chains the next conv's input channels, and recomputes the first
/// linear layer's in_features behind the flatten when needed.
NetworkSpec remove_layer(const NetworkSpec& spec, const std::string& layer_name);

/// Train, profile, remove, repeat. Stops when accuracy falls more than
/// accuracy_tolerance below baseline (that removal is rolled back), when no
/// candidate exists, or after max_removals rounds.
PruneReport greedy_prune(const NetworkSpec& spec, const Dataset& train_set,
                         const Dataset& test_set, const PruneConfig& config);

std::string report_to_json(const PruneReport& report);

}  // namespace salent
