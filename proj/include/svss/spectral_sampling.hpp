#ifndef SVSS_SPECTRAL_SAMPLING_HPP
#define SVSS_SPECTRAL_SAMPLING_HPP

#include <cstdint>
#include <optional>
#include <string_view>

#include "svss/rng.hpp"
#include "svss/types.hpp"

namespace svss {

inline constexpr std::uint64_t kDefaultMaxPairs = 1'000'000;

/// Random subset of pairwise input differences x_i - x_j (i < j).
struct PairwiseSubset {
  MatrixXd taus;                 // P_r x D
  double rate = 1.0;
  std::uint64_t source_size = 0;  // N (N - 1) / 2
};

enum class SamplingPolicy { kEqual, kWeight, kOptimal };

SamplingPolicy parse_policy(std::string_view name);
std::string_view policy_name(SamplingPolicy policy);

/// Round half to even, matching the rounding used for subset sizes and counts.
double round_half_even(double value);

/// Number of rows pairwise_subset returns for a pool of `pairs` differences.
std::uint64_t subset_size(std::uint64_t pairs, double rate, std::optional<std::uint64_t> max_pairs);

/// Uniform subset of unordered pairs without replacement, sorted in (i, j)
/// lexicographic order. With rate = 1 and no binding cap every pair is
/// returned and the rng is not used. `max_pairs` caps the pool before the
/// rate is applied.
PairwiseSubset pairwise_subset(const Eigen::Ref<const MatrixXd>& X, double rate, Rng& rng,
                               std::optional<std::uint64_t> max_pairs = std::nullopt);

VectorXd equal_ratios(Index components);
VectorXd weight_ratios(const SMParams& params);

/// Variance-optimal ratios p_q proportional to w_q sqrt(sum_p g_q(tau_p)) with
/// g_q(tau) = 1 + k_q(2 tau) + k_q(tau)^2.
VectorXd optimal_ratios(const SMParams& params, const PairwiseSubset& subset);

/// Integer split of `total` points: max(1, round(total p_q)), then repaired
/// one point at a time by largest / smallest remainder until the counts sum
/// to `total`.
Allocation allocate(const Eigen::Ref<const VectorXd>& ratios, int total);

/// Reparameterized draw s = mu_q + sigma_q * eps, grouped by component.
SpectralSample draw_sample(const SMParams& params, const Allocation& alloc, Rng& rng);

/// Rebuilds a sample from stored standard-normal noise (M x D).
SpectralSample sample_from_noise(const SMParams& params, const Allocation& alloc, MatrixXd noise);

/// True when every point equals mean + scale * noise bit-exactly under `params`.
bool sample_matches(const SMParams& params, const SpectralSample& sample);

}  // namespace svss

#endif  // SVSS_SPECTRAL_SAMPLING_HPP
