#ifndef SVSS_INFERENCE_HPP
#define SVSS_INFERENCE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "svss/rng.hpp"
#include "svss/spectral_sampling.hpp"
#include "svss/types.hpp"

namespace svss {

/// Largest supported feature-matrix width 2M for the low-rank likelihood.
inline constexpr Index kMaxFeatureColumns = 16384;

/// Per-point Gaussian prior over spectral points, rows grouped by component
/// in the same order as the allocation it was built for.
struct PriorSpec {
  MatrixXd means;   // M x D
  MatrixXd scales;  // M x D, positive
};

/// Component-level prior replicated across the points of each component.
/// Training keeps the prior in this form because the allocation may change
/// between iterations.
struct ComponentPrior {
  MatrixXd means;   // Q x D
  MatrixXd scales;  // Q x D

  PriorSpec expand(const Allocation& alloc) const;
};

/// Flat log-domain parameter vector:
/// [log w (Q) | log mu (Q x D, row-major) | log sigma (Q x D) | log sigma_eps].
struct ParamLayout {
  Index components = 0;
  Index dims = 0;

  Index size() const { return components + 2 * components * dims + 1; }
  Index weight(Index q) const { return q; }
  Index mean(Index q, Index d) const { return components + q * dims + d; }
  Index scale(Index q, Index d) const { return components + components * dims + q * dims + d; }
  Index noise() const { return components + 2 * components * dims; }
};

VectorXd to_log_params(const SMParams& params);
SMParams from_log_params(const VectorXd& log_params, const ParamLayout& layout);

/// log N(Y; 0, Phi Phi^T + noise_var I), evaluated through the 2M x 2M system.
double log_marginal(const SMParams& params, const FeatureMatrix& phi, const Eigen::Ref<const VectorXd>& y);

/// Closed-form sum over points of KL(N(mu_q, sigma_q^2) || N(prior_i, prior_scale_i^2)).
double kl_term(const SMParams& params, const PriorSpec& prior, const Allocation& alloc);

enum class Mode { kSS, kSSRP, kSVSS };

/// How initial means and scales are chosen. kSpectrum draws means from the
/// per-dimension periodogram of the targets; kUniform draws them uniformly
/// below half the sampling rate.
enum class InitMethod { kSpectrum, kUniform };

InitMethod parse_init(std::string_view name);
std::string_view init_name(InitMethod method);

Mode parse_mode(std::string_view name);
std::string_view mode_name(Mode mode);

struct TrainConfig {
  Mode mode = Mode::kSVSS;
  bool use_ws = false;
  bool use_ng = false;
  int mc_samples = 1;
  double pair_rate = 1.0;
  std::optional<std::uint64_t> max_pairs = kDefaultMaxPairs;
  int iterations = 1000;
  double step_size = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int total_points = 20;  // M
  int components = 4;     // Q
  /// Prior scales are this multiple of the initial variational scales.
  double prior_scale_factor = 10.0;
  InitMethod init = InitMethod::kSpectrum;

  void validate() const;
};

/// Spectral-point allocation for the next objective evaluation: variance
/// optimal on a fresh pairwise subset when Ws is enabled, equal otherwise.
Allocation choose_allocation(const SMParams& params, const Eigen::Ref<const MatrixXd>& X,
                             const TrainConfig& config, Rng& rng);

struct ElboResult {
  double value = 0.0;
  double log_likelihood = 0.0;  // average over the drawn samples
  double kl = 0.0;
  std::vector<SpectralSample> samples;
};

/// Regularized lower-bound estimator: the average of log_marginal over
/// `mc_samples` fresh draws minus kl_term.
ElboResult elbo(const SMParams& params, const PriorSpec& prior, const Eigen::Ref<const MatrixXd>& X,
                const Eigen::Ref<const VectorXd>& y, const Allocation& alloc, int mc_samples, Rng& rng);

/// Same estimator with the allocation chosen by `config` and the prior
/// expanded to it.
ElboResult elbo(const SMParams& params, const ComponentPrior& prior, const Eigen::Ref<const MatrixXd>& X,
                const Eigen::Ref<const VectorXd>& y, const TrainConfig& config, Rng& rng);

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double log_likelihood = 0.0;
  double kl = 0.0;
  double wall_ms = 0.0;
};

struct TrainState {
  ParamLayout layout;
  VectorXd log_params;
  VectorXd first_moment;
  VectorXd second_moment;
  int iteration = 0;
  std::uint64_t seed = 0;
  Allocation allocation;
  ComponentPrior prior;
  std::optional<MatrixXd> fixed_noise;  // SS mode only
  std::vector<TraceRow> trace;

  SMParams params() const { return from_log_params(log_params, layout); }
};

/// Sparse-spectrum objective without the KL term: log_marginal under the
/// state's fixed noise (SS) or a fresh draw from `rng` (SS with
/// reparameterization).
ElboResult ss_objective(const SMParams& params, const Eigen::Ref<const MatrixXd>& X,
                        const Eigen::Ref<const VectorXd>& y, const TrainState& state, Rng& rng);

struct ObjectiveGradient {
  double value = 0.0;
  double log_likelihood = 0.0;
  double kl = 0.0;
  VectorXd gradient;  // log-domain, see ParamLayout
};

/// Value and exact gradient of the Monte-Carlo objective
/// mean_l log_marginal(Phi(samples[l])) - kl_term, with respect to the
/// log-domain parameters, holding the standard-normal noise of each sample
/// fixed. Pass prior = nullptr to drop the KL term. Throws StaleSample if a
/// sample was not drawn at `params`.
ObjectiveGradient evaluate_objective(const SMParams& params, const PriorSpec* prior,
                                     const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                                     const std::vector<SpectralSample>& samples);

VectorXd gradients(const SMParams& params, const PriorSpec* prior, const Eigen::Ref<const MatrixXd>& X,
                   const Eigen::Ref<const VectorXd>& y, const std::vector<SpectralSample>& samples);

/// Log-domain approximate natural gradient.
///
/// The log-sigma block of each component is halved and the log-mu block is
/// scaled elementwise by (sigma_next / mu)^2, where `sigma_next` are the
/// scales after this iteration's sigma update and mu is read from
/// `log_params`. Every adjusted per-component block whose 2-norm exceeds one
/// is divided by its norm. Weight and noise entries pass through unchanged.
VectorXd natural_gradient(const ParamLayout& layout, const VectorXd& log_params, const MatrixXd& sigma_next,
                          const VectorXd& grads);

/// Bias-corrected adaptive-moment ascent step on the entries in [begin, end).
void adam_update(TrainState& state, const TrainConfig& config, const VectorXd& grads, Index begin, Index end);

struct IterationInfo {
  int iteration = 0;
  const SMParams& params;
  const std::vector<SpectralSample>& samples;
  const ObjectiveGradient& objective;
};

using IterationCallback = std::function<void(const IterationInfo&)>;

struct TrainResult {
  TrainState state;
  SMParams params;
  std::optional<std::string> failure;  // set when a numerical failure aborted training
};

/// Data-driven initial parameters. nu is the reciprocal of the median
/// nearest-neighbour distance between inputs; weights start at 1/Q and the
/// noise variance at 0.1 Var(y).
///
/// kUniform: means uniform on (0, nu/2], scales nu / (8Q).
/// kSpectrum: means drawn per dimension from the periodogram of y on
/// (0, nu / (2 sqrt(D))] (at most 2000 points, 1000 frequency bins), scales
/// 1 / (range sqrt(D)).
SMParams initial_params(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                        int components, Rng& rng, InitMethod method = InitMethod::kSpectrum);

TrainState initial_state(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                         const TrainConfig& config);

/// Runs `config.iterations` optimizer steps starting from `state`.
TrainResult train(TrainState state, const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                  const TrainConfig& config, const IterationCallback& callback = {});

TrainResult train(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                  const TrainConfig& config, const IterationCallback& callback = {});

}  // namespace svss

#endif  // SVSS_INFERENCE_HPP
