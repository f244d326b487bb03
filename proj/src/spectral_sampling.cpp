#include "svss/spectral_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_set>
#include <vector>

#include "svss/errors.hpp"

namespace svss {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoPiSq = 2.0 * std::numbers::pi * std::numbers::pi;

// First linear pair index of row i in the (i < j) enumeration.
std::uint64_t row_offset(std::uint64_t i, std::uint64_t n) { return i * (2 * n - i - 1) / 2; }

std::pair<Index, Index> pair_from_index(std::uint64_t index, std::uint64_t n) {
  std::uint64_t lo = 0;
  std::uint64_t hi = n - 2;
  while (lo < hi) {
    const std::uint64_t mid = (lo + hi + 1) / 2;
    if (row_offset(mid, n) <= index) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const std::uint64_t j = lo + 1 + (index - row_offset(lo, n));
  return {static_cast<Index>(lo), static_cast<Index>(j)};
}

// Floyd's algorithm: k distinct values from [0, n), returned sorted.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint64_t j = n - k; j < n; ++j) {
    const std::uint64_t t = rng.uniform_index(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SamplingPolicy parse_policy(std::string_view name) {
  if (name == "equal") return SamplingPolicy::kEqual;
  if (name == "weight") return SamplingPolicy::kWeight;
  if (name == "ws" || name == "optimal") return SamplingPolicy::kOptimal;
  throw UsageError("unknown sampling policy '" + std::string(name) + "' (expected equal, weight or ws)");
}

std::string_view policy_name(SamplingPolicy policy) {
  switch (policy) {
    case SamplingPolicy::kEqual:
      return "equal";
    case SamplingPolicy::kWeight:
      return "weight";
    case SamplingPolicy::kOptimal:
      return "ws";
  }
  return "unknown";
}

double round_half_even(double value) { return std::nearbyint(value); }

std::uint64_t subset_size(std::uint64_t pairs, double rate, std::optional<std::uint64_t> max_pairs) {
  const std::uint64_t pool = max_pairs ? std::min(pairs, *max_pairs) : pairs;
  const double rounded = round_half_even(rate * static_cast<double>(pool));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(rounded));
}

PairwiseSubset pairwise_subset(const Eigen::Ref<const MatrixXd>& X, double rate, Rng& rng,
                               std::optional<std::uint64_t> max_pairs) {
  if (!(rate > 0.0 && rate <= 1.0)) throw UsageError("pairwise_subset: rate must lie in (0, 1]");
  const auto n = static_cast<std::uint64_t>(X.rows());
  if (n < 2) throw InsufficientData("pairwise_subset: at least two inputs are required");
  const std::uint64_t pairs = n * (n - 1) / 2;
  const std::uint64_t count = subset_size(pairs, rate, max_pairs);

  PairwiseSubset subset;
  subset.rate = rate;
  subset.source_size = pairs;
  subset.taus.resize(static_cast<Index>(count), X.cols());
  if (count == pairs) {
    Index row = 0;
    for (Index i = 0; i < X.rows(); ++i) {
      for (Index j = i + 1; j < X.rows(); ++j) subset.taus.row(row++) = X.row(i) - X.row(j);
    }
    return subset;
  }
  const auto picks = sample_without_replacement(pairs, count, rng);
  for (std::size_t r = 0; r < picks.size(); ++r) {
    const auto [i, j] = pair_from_index(picks[r], n);
    subset.taus.row(static_cast<Index>(r)) = X.row(i) - X.row(j);
  }
  return subset;
}

VectorXd equal_ratios(Index components) {
  if (components < 1) throw ShapeError("equal_ratios: at least one component is required");
  return VectorXd::Constant(components, 1.0 / static_cast<double>(components));
}

VectorXd weight_ratios(const SMParams& params) { return params.weights / params.weights.sum(); }

VectorXd optimal_ratios(const SMParams& params, const PairwiseSubset& subset) {
  if (subset.taus.rows() == 0) throw InsufficientData("optimal_ratios: empty pairwise subset");
  if (subset.taus.cols() != params.dims()) throw ShapeError("optimal_ratios: tau dimension mismatch");
  const Index components = params.components();
  VectorXd raw(components);
  const Index rows = subset.taus.rows();
  for (Index q = 0; q < components; ++q) {
    // k(2 tau) reuses the factors of k(tau): exp(-4a) = exp(-a)^4 and
    // cos(2b) = 2 cos(b)^2 - 1.
    const VectorXd scales_sq = params.scales.row(q).transpose().array().square();
    const VectorXd envelope = subset.taus.array().square().matrix() * scales_sq;
    const VectorXd phase = subset.taus * params.means.row(q).transpose();
    double g_sum = 0.0;
    for (Index r = 0; r < rows; ++r) {
      const double decay = std::exp(-kTwoPiSq * envelope(r));
      const double c = std::cos(kTwoPi * phase(r));
      const double k1 = decay * c;
      const double decay_sq = decay * decay;
      const double k2 = decay_sq * decay_sq * (2.0 * c * c - 1.0);
      g_sum += 1.0 + k2 + k1 * k1;
    }
    if (!(g_sum > 0.0)) throw Error("optimal_ratios: degenerate variance sum for component " + std::to_string(q));
    raw(q) = params.weights(q) * std::sqrt(g_sum);
  }
  return raw / raw.sum();
}

Allocation allocate(const Eigen::Ref<const VectorXd>& ratios, int total) {
  const Index components = ratios.size();
  if (components < 1) throw ShapeError("allocate: empty ratio vector");
  if (total < components) {
    throw BudgetTooSmall("allocate: " + std::to_string(total) + " spectral points cannot cover " +
                         std::to_string(components) + " components");
  }
  if (!ratios.allFinite() || (ratios.array() <= 0.0).any()) {
    throw UsageError("allocate: ratios must be positive and finite");
  }
  Allocation alloc;
  alloc.ratios = ratios / ratios.sum();
  alloc.total = total;
  alloc.counts.resize(static_cast<std::size_t>(components));
  const VectorXd target = static_cast<double>(total) * alloc.ratios;
  int sum = 0;
  for (Index q = 0; q < components; ++q) {
    alloc.counts[q] = std::max(1, static_cast<int>(round_half_even(target(q))));
    sum += alloc.counts[q];
  }
  while (sum != total) {
    Index pick = -1;
    double best = 0.0;
    for (Index q = 0; q < components; ++q) {
      const double remainder = target(q) - alloc.counts[q];
      if (sum < total) {
        if (pick < 0 || remainder > best) {
          pick = q;
          best = remainder;
        }
      } else if (alloc.counts[q] > 1 && (pick < 0 || remainder < best)) {
        pick = q;
        best = remainder;
      }
    }
    alloc.counts[pick] += sum < total ? 1 : -1;
    sum += sum < total ? 1 : -1;
  }
  return alloc;
}

SpectralSample sample_from_noise(const SMParams& params, const Allocation& alloc, MatrixXd noise) {
  if (alloc.components() != params.components()) throw InvalidSample("allocation/parameter component mismatch");
  if (noise.rows() != alloc.total || noise.cols() != params.dims()) {
    throw ShapeError("sample_from_noise: noise must be M x D");
  }
  SpectralSample sample;
  sample.allocation = alloc;
  sample.noise = std::move(noise);
  sample.points.resize(alloc.total, params.dims());
  sample.component_of.resize(static_cast<std::size_t>(alloc.total));
  Index row = 0;
  for (Index q = 0; q < alloc.components(); ++q) {
    for (int i = 0; i < alloc.counts[q]; ++i, ++row) {
      sample.component_of[row] = static_cast<int>(q);
      sample.points.row(row) =
          params.means.row(q).array() + params.scales.row(q).array() * sample.noise.row(row).array();
    }
  }
  return sample;
}

SpectralSample draw_sample(const SMParams& params, const Allocation& alloc, Rng& rng) {
  MatrixXd noise(alloc.total, params.dims());
  for (Index i = 0; i < noise.rows(); ++i) {
    for (Index d = 0; d < noise.cols(); ++d) noise(i, d) = rng.normal();
  }
  return sample_from_noise(params, alloc, std::move(noise));
}

bool sample_matches(const SMParams& params, const SpectralSample& sample) {
  if (sample.allocation.components() != params.components() || sample.points.cols() != params.dims()) {
    return false;
  }
  for (Index i = 0; i < sample.points.rows(); ++i) {
    const int q = sample.component_of[i];
    for (Index d = 0; d < params.dims(); ++d) {
      if (sample.points(i, d) != params.means(q, d) + params.scales(q, d) * sample.noise(i, d)) return false;
    }
  }
  return true;
}

}  // namespace svss
