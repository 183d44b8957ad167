#include "salent/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace salent {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("entropy: " + what);
}

// One histogram term: (c/T)*(log2 T - log2 c). Keeps H(uniform-over-2^k)
// and H(constant) exact, which the relative measures divide by.
inline double count_term(uint64_t c, uint64_t total) {
  if (c == 0) return 0.0;
  return (static_cast<double>(c) / static_cast<double>(total)) *
         (std::log2(static_cast<double>(total)) - std::log2(static_cast<double>(c)));
}

// Distinct intensity values of a map, ascending. Values absent here have
// empty rows and columns in every pair histogram.
std::vector<int> present_values(const GrayMap& map) {
  bool seen[256] = {};
  for (uint8_t p : map.pixels) seen[p] = true;
  std::vector<int> values;
  for (int g = 0; g < 256; ++g) {
    if (seen[g]) values.push_back(g);
  }
  return values;
}

void check_offset(const GrayMap& map, Offset offset) {
  if (std::abs(offset.k) >= map.height || std::abs(offset.l) >= map.width) {
    fail("offset (" + std::to_string(offset.k) + "," + std::to_string(offset.l) +
         ") out of bounds for a " + std::to_string(map.width) + "x" +
         std::to_string(map.height) + " map");
  }
}

// Fills a 256x256 scratch table; returns the pair count.
uint64_t count_pairs(const GrayMap& map, Offset offset, std::vector<uint32_t>& counts) {
  counts.assign(256 * 256, 0);
  const int k = offset.k, l = offset.l;
  const int i_lo = std::max(0, -k), i_hi = map.height - 1 - std::max(0, k);
  const int j_lo = std::max(0, -l), j_hi = map.width - 1 - std::max(0, l);
  for (int i = i_lo; i <= i_hi; ++i) {
    const uint8_t* row = map.pixels.data() + static_cast<size_t>(i) * map.width;
    const uint8_t* other = map.pixels.data() + static_cast<size_t>(i + k) * map.width + l;
    for (int j = j_lo; j <= j_hi; ++j) {
      ++counts[static_cast<size_t>(row[j]) * 256 + other[j]];
    }
  }
  return static_cast<uint64_t>(i_hi - i_lo + 1) * static_cast<uint64_t>(j_hi - j_lo + 1);
}

// Entropy of a pair table. Cells are consumed in a canonical order — (g,g')
// and (g',g) as one two-term step, g ascending — so a table and its
// transpose sum to bit-identical results.
double pair_entropy(const std::vector<uint32_t>& counts, uint64_t total,
                    const std::vector<int>& values) {
  double acc = 0.0;
  for (size_t a = 0; a < values.size(); ++a) {
    const size_t g = static_cast<size_t>(values[a]);
    acc += count_term(counts[g * 256 + g], total);
    for (size_t b = a + 1; b < values.size(); ++b) {
      const size_t gp = static_cast<size_t>(values[b]);
      acc += count_term(counts[g * 256 + gp], total) +
             count_term(counts[gp * 256 + g], total);
    }
  }
  return acc;
}

double relative_from_pair(double pair_bits, double h0) {
  if (h0 == 0.0) return 0.0;
  return (pair_bits - h0) / h0;
}

}  // namespace

Distribution::Distribution(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) fail("empty distribution");
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) fail("distribution entries must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail("distribution sums to " + std::to_string(sum) + ", expected 1");
  }
}

double entropy(const Distribution& dist) {
  double acc = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) acc -= p * std::log2(p);
  }
  return acc;
}

Distribution merge_outcomes(const Distribution& dist, size_t i, size_t j) {
  if (i == j) fail("merge_outcomes: i == j");
  if (i >= dist.size() || j >= dist.size()) fail("merge_outcomes: index out of range");
  const size_t keep = std::min(i, j), drop = std::max(i, j);
  std::vector<double> p = dist.probs();
  p[keep] += p[drop];
  p.erase(p.begin() + static_cast<std::ptrdiff_t>(drop));
  return Distribution(std::move(p));
}

double univariate_entropy(const GrayMap& map) {
  uint64_t counts[256] = {};
  for (uint8_t p : map.pixels) ++counts[p];
  const uint64_t total = map.pixels.size();
  double acc = 0.0;
  for (int g = 0; g < 256; ++g) acc += count_term(counts[g], total);
  return acc;
}

JointHistogram joint_histogram(const GrayMap& map, Offset offset) {
  check_offset(map, offset);
  JointHistogram hist;
  hist.offset = offset;
  hist.total = count_pairs(map, offset, hist.counts);
  return hist;
}

double bivariate_entropy(const JointHistogram& hist) {
  if (hist.total == 0) fail("empty histogram");
  double acc = 0.0;
  for (size_t g = 0; g < 256; ++g) {
    acc += count_term(hist.counts[g * 256 + g], hist.total);
    for (size_t gp = g + 1; gp < 256; ++gp) {
      acc += count_term(hist.counts[g * 256 + gp], hist.total) +
             count_term(hist.counts[gp * 256 + g], hist.total);
    }
  }
  return acc;
}

Distribution row_marginal(const JointHistogram& hist) {
  if (hist.total == 0) fail("empty histogram");
  std::vector<double> p(256, 0.0);
  for (size_t g = 0; g < 256; ++g) {
    uint64_t c = 0;
    for (size_t gp = 0; gp < 256; ++gp) c += hist.counts[g * 256 + gp];
    p[g] = static_cast<double>(c) / static_cast<double>(hist.total);
  }
  return Distribution(std::move(p));
}

Distribution col_marginal(const JointHistogram& hist) {
  if (hist.total == 0) fail("empty histogram");
  std::vector<double> p(256, 0.0);
  for (size_t gp = 0; gp < 256; ++gp) {
    uint64_t c = 0;
    for (size_t g = 0; g < 256; ++g) c += hist.counts[g * 256 + gp];
    p[gp] = static_cast<double>(c) / static_cast<double>(hist.total);
  }
  return Distribution(std::move(p));
}

double relative_entropy(const GrayMap& map, Offset offset) {
  check_offset(map, offset);
  const double h0 = univariate_entropy(map);
  if (h0 == 0.0) return 0.0;
  const std::vector<int> values = present_values(map);
  std::vector<uint32_t> counts;
  const uint64_t total = count_pairs(map, offset, counts);
  return relative_from_pair(pair_entropy(counts, total, values), h0);
}

double aura_matrix_entropy(const GrayMap& map) {
  if (map.width < 2 || map.height < 2) fail("AME needs a map of at least 2x2");
  const double h0 = univariate_entropy(map);
  if (h0 == 0.0) return 0.0;
  const std::vector<int> values = present_values(map);
  std::vector<uint32_t> counts;

  auto hr = [&](int k, int l) {
    const uint64_t total = count_pairs(map, {k, l}, counts);
    return relative_from_pair(pair_entropy(counts, total, values), h0);
  };
  // Vertical and horizontal terms are paired so a transposed map sums to
  // bit-identical results.
  const double vertical = hr(-1, 0) + hr(1, 0);
  const double horizontal = hr(0, -1) + hr(0, 1);
  return 0.25 * (vertical + horizontal);
}

double spatial_disorder_entropy(const GrayMap& map, SdeOptions options) {
  if (map.width < 2 || map.height < 2) fail("SDE needs a map of at least 2x2");
  if (map.width > options.size_cap || map.height > options.size_cap) {
    fail("map exceeds the SDE size cap of " + std::to_string(options.size_cap) +
         "; use aura_matrix_entropy for large maps");
  }
  const double h0 = univariate_entropy(map);
  if (h0 == 0.0) return 0.0;
  const std::vector<int> values = present_values(map);
  std::vector<uint32_t> counts;

  const int m = map.height, n = map.width;
  double num = 0.0, den = 0.0;
  for (int a = -(m - 1); a <= m - 1; ++a) {
    for (int b = -(n - 1); b <= n - 1; ++b) {
      const double weight = static_cast<double>(m - std::abs(a)) *
                            static_cast<double>(n - std::abs(b));
      den += weight;
      if (a == 0 && b == 0) continue;  // H_R(0,0) = 0
      const uint64_t total = count_pairs(map, {a, b}, counts);
      num += weight * relative_from_pair(pair_entropy(counts, total, values), h0);
    }
  }
  return num / den;
}

}  // namespace salent
