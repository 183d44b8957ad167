#pragma once

#include <cstdint>
#include <vector>

#include "salent/tensor.hpp"

namespace salent {

/// Spatial displacement: k rows down, l columns right.
struct Offset {
  int k = 0;
  int l = 0;

  bool operator==(const Offset&) const = default;
};

/// Probability vector: non-negative entries summing to 1 within 1e-9.
class Distribution {
 public:
  explicit Distribution(std::vector<double> p);

  const std::vector<double>& probs() const { return p_; }
  size_t size() const { return p_.size(); }

 private:
  std::vector<double> p_;
};

/// 256x256 pair-count table for one offset. counts[g*256+g'] is the number
/// of in-bounds pixel pairs with X(i,j)=g and X(i+k,j+l)=g'.
struct JointHistogram {
  std::vector<uint32_t> counts;  // 256*256, row-major by g
  uint64_t total = 0;
  Offset offset;

  uint32_t at(int g, int gp) const {
    return counts[static_cast<size_t>(g) * 256 + gp];
  }
};

/// Shannon entropy in bits, 0*log0 = 0.
double entropy(const Distribution& dist);

/// Replaces entries i and j by a single entry p_i + p_j at position
/// min(i,j); the order of the remaining entries is preserved.
Distribution merge_outcomes(const Distribution& dist, size_t i, size_t j);

/// H(0): entropy of the 256-bin intensity histogram.
double univariate_entropy(const GrayMap& map);

/// Pair counting with both endpoints in bounds; no wrap-around.
JointHistogram joint_histogram(const GrayMap& map, Offset offset);

/// H(k,l): entropy of the normalized pair table. Summed over symmetric cell
/// pairs in a canonical order, so transposed histograms give bit-identical
/// results.
double bivariate_entropy(const JointHistogram& hist);

Distribution row_marginal(const JointHistogram& hist);
Distribution col_marginal(const JointHistogram& hist);

/// H_R(k,l) = (H(k,l) - H(0)) / H(0); 0 when H(0) = 0.
double relative_entropy(const GrayMap& map, Offset offset);

/// Mean of H_R over the four second-order neighbor offsets
/// (-1,0),(0,-1),(1,0),(0,1).
double aura_matrix_entropy(const GrayMap& map);

struct SdeOptions {
  int size_cap = 64;  // O(m^2 n^2) offsets; larger maps are rejected
};

/// Multiplicity-weighted mean of H_R over every in-bounds offset:
/// sum (m-|a|)(n-|b|) H_R(a,b) / sum (m-|a|)(n-|b|), with H_R(0,0) = 0.
double spatial_disorder_entropy(const GrayMap& map, SdeOptions options = {});

}  // namespace salent
