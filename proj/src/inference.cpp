#include "svss/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>

#include "svss/errors.hpp"
#include "svss/low_rank.hpp"
#include "svss/sm_kernel.hpp"

namespace svss {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

void check_data(const FeatureMatrix& phi, const Eigen::Ref<const VectorXd>& y) {
  if (phi.values.rows() != y.size()) throw ShapeError("log_marginal: Phi rows and Y length differ");
  if (y.size() < 1) throw InsufficientData("log_marginal: empty target vector");
  if (phi.values.cols() > kMaxFeatureColumns) throw TooLarge("log_marginal: feature matrix too wide");
  if (!y.allFinite()) throw DataError("log_marginal: non-finite target");
}

// Log-marginal of one sample and its gradient with respect to Phi and the
// noise variance.
struct LikelihoodTerms {
  double value;
  MatrixXd d_phi;
  double d_noise_var;
};

LikelihoodTerms likelihood_terms(const MatrixXd& phi, double noise_var, const Eigen::Ref<const VectorXd>& y) {
  const Index n = phi.rows();
  const Index rank = phi.cols();
  const FeatureSystem system(phi, noise_var);
  const VectorXd b = phi.transpose() * y;
  const VectorXd c = system.solve(b);
  const double quad = (y.squaredNorm() - b.dot(c)) / noise_var;
  const double value = -0.5 * (quad + system.log_det_covariance(n) + static_cast<double>(n) * kLogTwoPi);

  // alpha = Sigma^{-1} y and Sigma^{-1} Phi = Phi A^{-1}.
  const VectorXd alpha = (y - phi * c) / noise_var;
  const MatrixXd a_inv = system.solve(MatrixXd(MatrixXd::Identity(rank, rank)));
  MatrixXd d_phi = alpha * (alpha.transpose() * phi) - phi * a_inv;
  const double trace_sigma_inv = (static_cast<double>(n - rank) + noise_var * a_inv.trace()) / noise_var;
  const double d_noise_var = 0.5 * (alpha.squaredNorm() - trace_sigma_inv);
  return {value, std::move(d_phi), d_noise_var};
}

void check_prior(const PriorSpec& prior, const Allocation& alloc, Index dims) {
  if (prior.means.rows() != alloc.total || prior.scales.rows() != alloc.total || prior.means.cols() != dims ||
      prior.scales.cols() != dims) {
    throw ShapeError("prior shape does not match the allocation in force");
  }
  if ((prior.scales.array() <= 0.0).any()) throw InvalidParams("prior scales must be positive");
}

}  // namespace

PriorSpec ComponentPrior::expand(const Allocation& alloc) const {
  if (means.rows() != alloc.components()) throw ShapeError("ComponentPrior: component count mismatch");
  PriorSpec spec{MatrixXd(alloc.total, means.cols()), MatrixXd(alloc.total, means.cols())};
  Index row = 0;
  for (Index q = 0; q < alloc.components(); ++q) {
    for (int i = 0; i < alloc.counts[q]; ++i, ++row) {
      spec.means.row(row) = means.row(q);
      spec.scales.row(row) = scales.row(q);
    }
  }
  return spec;
}

VectorXd to_log_params(const SMParams& params) {
  const ParamLayout layout{params.components(), params.dims()};
  VectorXd out(layout.size());
  for (Index q = 0; q < layout.components; ++q) {
    out(layout.weight(q)) = std::log(params.weights(q));
    for (Index d = 0; d < layout.dims; ++d) {
      out(layout.mean(q, d)) = std::log(params.means(q, d));
      out(layout.scale(q, d)) = std::log(params.scales(q, d));
    }
  }
  out(layout.noise()) = 0.5 * std::log(params.noise_var);
  return out;
}

SMParams from_log_params(const VectorXd& log_params, const ParamLayout& layout) {
  if (log_params.size() != layout.size()) throw ShapeError("from_log_params: vector length mismatch");
  SMParams params{VectorXd(layout.components), MatrixXd(layout.components, layout.dims),
                  MatrixXd(layout.components, layout.dims), 0.0};
  for (Index q = 0; q < layout.components; ++q) {
    params.weights(q) = std::exp(log_params(layout.weight(q)));
    for (Index d = 0; d < layout.dims; ++d) {
      params.means(q, d) = std::exp(log_params(layout.mean(q, d)));
      params.scales(q, d) = std::exp(log_params(layout.scale(q, d)));
    }
  }
  params.noise_var = std::exp(2.0 * log_params(layout.noise()));
  return params;
}

double log_marginal(const SMParams& params, const FeatureMatrix& phi, const Eigen::Ref<const VectorXd>& y) {
  check_data(phi, y);
  const MatrixXd& features = phi.values;
  const Index n = features.rows();
  const FeatureSystem system(features, params.noise_var);
  const VectorXd b = features.transpose() * y;
  const double quad = (y.squaredNorm() - b.dot(system.solve(b))) / params.noise_var;
  return -0.5 * (quad + system.log_det_covariance(n) + static_cast<double>(n) * kLogTwoPi);
}

double kl_term(const SMParams& params, const PriorSpec& prior, const Allocation& alloc) {
  check_prior(prior, alloc, params.dims());
  double total = 0.0;
  Index row = 0;
  for (Index q = 0; q < alloc.components(); ++q) {
    for (int i = 0; i < alloc.counts[q]; ++i, ++row) {
      for (Index d = 0; d < params.dims(); ++d) {
        const double s = params.scales(q, d);
        const double ps = prior.scales(row, d);
        const double diff = params.means(q, d) - prior.means(row, d);
        total += std::log(ps / s) + (s * s + diff * diff) / (2.0 * ps * ps) - 0.5;
      }
    }
  }
  return std::max(total, 0.0);
}

Mode parse_mode(std::string_view name) {
  if (name == "ss") return Mode::kSS;
  if (name == "ss-rp" || name == "ss_rp") return Mode::kSSRP;
  if (name == "svss") return Mode::kSVSS;
  throw UsageError("unknown mode '" + std::string(name) + "' (expected ss, ss-rp or svss)");
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kSS:
      return "ss";
    case Mode::kSSRP:
      return "ss-rp";
    case Mode::kSVSS:
      return "svss";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (mc_samples < 1) throw UsageError("mc-samples must be at least 1");
  if (mode != Mode::kSVSS && (use_ws || use_ng)) throw UsageError("--ws and --ng require --mode svss");
  if (mode != Mode::kSVSS && mc_samples != 1) throw UsageError("--mc-samples requires --mode svss");
  if (!(pair_rate > 0.0 && pair_rate <= 1.0)) throw UsageError("pair-rate must lie in (0, 1]");
  if (iterations < 0) throw UsageError("iterations must be non-negative");
  if (!(step_size > 0.0)) throw UsageError("step size must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw UsageError("betas must lie in [0, 1)");
  if (components < 1) throw UsageError("Q must be at least 1");
  if (total_points < components) throw BudgetTooSmall("M must be at least Q");
  if (2 * static_cast<Index>(total_points) > kMaxFeatureColumns) throw TooLarge("M exceeds the feature limit");
  if (!(prior_scale_factor > 0.0)) throw UsageError("prior scale factor must be positive");
}

Allocation choose_allocation(const SMParams& params, const Eigen::Ref<const MatrixXd>& X,
                             const TrainConfig& config, Rng& rng) {
  if (config.use_ws) {
    const PairwiseSubset subset = pairwise_subset(X, config.pair_rate, rng, config.max_pairs);
    return allocate(optimal_ratios(params, subset), config.total_points);
  }
  return allocate(equal_ratios(params.components()), config.total_points);
}

ElboResult elbo(const SMParams& params, const PriorSpec& prior, const Eigen::Ref<const MatrixXd>& X,
                const Eigen::Ref<const VectorXd>& y, const Allocation& alloc, int mc_samples, Rng& rng) {
  if (mc_samples < 1) throw UsageError("elbo: at least one Monte-Carlo sample is required");
  ElboResult result;
  result.kl = kl_term(params, prior, alloc);
  double total = 0.0;
  for (int l = 0; l < mc_samples; ++l) {
    result.samples.push_back(draw_sample(params, alloc, rng));
    total += log_marginal(params, feature_map(params, result.samples.back(), X), y);
  }
  result.log_likelihood = total / mc_samples;
  result.value = result.log_likelihood - result.kl;
  return result;
}

ElboResult elbo(const SMParams& params, const ComponentPrior& prior, const Eigen::Ref<const MatrixXd>& X,
                const Eigen::Ref<const VectorXd>& y, const TrainConfig& config, Rng& rng) {
  if (config.mode != Mode::kSVSS) throw UsageError("elbo: SS modes use ss_objective");
  Rng alloc_rng = rng.split(0);
  const Allocation alloc = choose_allocation(params, X, config, alloc_rng);
  return elbo(params, prior.expand(alloc), X, y, alloc, config.mc_samples, rng);
}

ElboResult ss_objective(const SMParams& params, const Eigen::Ref<const MatrixXd>& X,
                        const Eigen::Ref<const VectorXd>& y, const TrainState& state, Rng& rng) {
  ElboResult result;
  if (state.fixed_noise) {
    result.samples.push_back(sample_from_noise(params, state.allocation, *state.fixed_noise));
  } else {
    result.samples.push_back(draw_sample(params, state.allocation, rng));
  }
  result.log_likelihood = log_marginal(params, feature_map(params, result.samples.back(), X), y);
  result.value = result.log_likelihood;
  return result;
}

ObjectiveGradient evaluate_objective(const SMParams& params, const PriorSpec* prior,
                                     const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                                     const std::vector<SpectralSample>& samples) {
  if (samples.empty()) throw InvalidSample("evaluate_objective: no samples");
  const ParamLayout layout{params.components(), params.dims()};
  const Index dims = params.dims();
  ObjectiveGradient out;
  out.gradient = VectorXd::Zero(layout.size());

  for (const SpectralSample& sample : samples) {
    if (!sample_matches(params, sample)) {
      throw StaleSample("evaluate_objective: sample was not drawn at the supplied parameters");
    }
    const FeatureMatrix phi = feature_map(params, sample, X);
    if (phi.values.rows() != y.size()) throw ShapeError("evaluate_objective: X and Y lengths differ");
    const LikelihoodTerms terms = likelihood_terms(phi.values, params.noise_var, y);
    out.log_likelihood += terms.value;

    const MatrixXd& features = phi.values;
    const MatrixXd& g = terms.d_phi;
    const Index m = sample.size();
    // d/ds_i through cos/sin features: 2 pi X^T h_i.
    MatrixXd h(features.rows(), m);
    for (Index i = 0; i < m; ++i) {
      h.col(i) = g.col(2 * i + 1).cwiseProduct(features.col(2 * i)) -
                 g.col(2 * i).cwiseProduct(features.col(2 * i + 1));
    }
    const MatrixXd d_points = kTwoPi * (h.transpose() * X);  // M x D
    const VectorXd d_amplitude = (g.cwiseProduct(features)).colwise().sum().transpose();

    for (Index i = 0; i < m; ++i) {
      const int q = sample.component_of[i];
      out.gradient(layout.weight(q)) += 0.5 * (d_amplitude(2 * i) + d_amplitude(2 * i + 1));
      for (Index d = 0; d < dims; ++d) {
        out.gradient(layout.mean(q, d)) += d_points(i, d) * params.means(q, d);
        out.gradient(layout.scale(q, d)) += d_points(i, d) * sample.noise(i, d) * params.scales(q, d);
      }
    }
    out.gradient(layout.noise()) += 2.0 * params.noise_var * terms.d_noise_var;
  }
  const double count = static_cast<double>(samples.size());
  out.log_likelihood /= count;
  out.gradient /= count;

  if (prior != nullptr) {
    const Allocation& alloc = samples.front().allocation;
    out.kl = kl_term(params, *prior, alloc);
    Index row = 0;
    for (Index q = 0; q < alloc.components(); ++q) {
      for (int i = 0; i < alloc.counts[q]; ++i, ++row) {
        for (Index d = 0; d < dims; ++d) {
          const double mu = params.means(q, d);
          const double s = params.scales(q, d);
          const double pv = prior->scales(row, d) * prior->scales(row, d);
          out.gradient(layout.mean(q, d)) -= mu * (mu - prior->means(row, d)) / pv;
          out.gradient(layout.scale(q, d)) -= s * s / pv - 1.0;
        }
      }
    }
  }
  out.value = out.log_likelihood - out.kl;
  return out;
}

VectorXd gradients(const SMParams& params, const PriorSpec* prior, const Eigen::Ref<const MatrixXd>& X,
                   const Eigen::Ref<const VectorXd>& y, const std::vector<SpectralSample>& samples) {
  return evaluate_objective(params, prior, X, y, samples).gradient;
}

VectorXd natural_gradient(const ParamLayout& layout, const VectorXd& log_params, const MatrixXd& sigma_next,
                          const VectorXd& grads) {
  if (grads.size() != layout.size() || log_params.size() != layout.size()) {
    throw ShapeError("natural_gradient: vector length mismatch");
  }
  if (sigma_next.rows() != layout.components || sigma_next.cols() != layout.dims) {
    throw ShapeError("natural_gradient: sigma must be Q x D");
  }
  VectorXd out = grads;
  VectorXd block(layout.dims);
  for (Index q = 0; q < layout.components; ++q) {
    for (Index d = 0; d < layout.dims; ++d) block(d) = 0.5 * grads(layout.scale(q, d));
    if (const double norm = block.norm(); norm > 1.0) block /= norm;
    for (Index d = 0; d < layout.dims; ++d) out(layout.scale(q, d)) = block(d);

    for (Index d = 0; d < layout.dims; ++d) {
      const double ratio = sigma_next(q, d) / std::exp(log_params(layout.mean(q, d)));
      block(d) = ratio * ratio * grads(layout.mean(q, d));
    }
    if (const double norm = block.norm(); norm > 1.0) block /= norm;
    for (Index d = 0; d < layout.dims; ++d) out(layout.mean(q, d)) = block(d);
  }
  return out;
}

void adam_update(TrainState& state, const TrainConfig& config, const VectorXd& grads, Index begin, Index end) {
  const double t = static_cast<double>(state.iteration + 1);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (Index k = begin; k < end; ++k) {
    state.first_moment(k) = config.beta1 * state.first_moment(k) + (1.0 - config.beta1) * grads(k);
    state.second_moment(k) = config.beta2 * state.second_moment(k) + (1.0 - config.beta2) * grads(k) * grads(k);
    const double m_hat = state.first_moment(k) / correction1;
    const double v_hat = state.second_moment(k) / correction2;
    state.log_params(k) += config.step_size * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
  }
}

namespace {

constexpr Index kSpacingPoints = 4000;

// Median Euclidean distance from an input to its nearest distinct neighbour.
// Large inputs use a subsample whose spacing is rescaled by (k / n)^(1 / D),
// the rate at which nearest-neighbour distances shrink with density.
double median_spacing(const Eigen::Ref<const MatrixXd>& X, Rng& rng) {
  const Index n = X.rows();
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  double correction = 1.0;
  if (n > kSpacingPoints) {
    rng.shuffle(std::span<Index>(rows));
    rows.resize(static_cast<std::size_t>(kSpacingPoints));
    correction = std::pow(static_cast<double>(kSpacingPoints) / static_cast<double>(n),
                          1.0 / static_cast<double>(X.cols()));
  }
  std::vector<double> nearest;
  for (Index a : rows) {
    double best = std::numeric_limits<double>::infinity();
    for (Index b : rows) {
      const double dist = (X.row(a) - X.row(b)).squaredNorm();
      if (dist > 0.0) best = std::min(best, dist);
    }
    if (std::isfinite(best)) nearest.push_back(std::sqrt(best));
  }
  if (nearest.empty()) return 1.0;
  const auto mid = nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2);
  std::nth_element(nearest.begin(), mid, nearest.end());
  return *mid * correction;
}

constexpr Index kPeriodogramPoints = 2000;
constexpr int kPeriodogramBins = 1000;

// Cumulative periodogram power of y along one input column, bin centres
// spread evenly over (0, max_freq].
std::vector<double> cumulative_power(const VectorXd& x, const VectorXd& y, double max_freq) {
  std::vector<double> cdf(kPeriodogramBins);
  double total = 0.0;
  const double width = max_freq / kPeriodogramBins;
  for (int k = 0; k < kPeriodogramBins; ++k) {
    const double omega = 2.0 * std::numbers::pi * (k + 0.5) * width;
    const Eigen::ArrayXd phase = omega * x.array();
    const double re = (y.array() * phase.cos()).sum();
    const double im = (y.array() * phase.sin()).sum();
    total += re * re + im * im;
    cdf[static_cast<std::size_t>(k)] = total;
  }
  return cdf;
}

}  // namespace

InitMethod parse_init(std::string_view name) {
  if (name == "spectrum") return InitMethod::kSpectrum;
  if (name == "uniform") return InitMethod::kUniform;
  throw UsageError("unknown init '" + std::string(name) + "' (expected spectrum or uniform)");
}

std::string_view init_name(InitMethod method) {
  return method == InitMethod::kSpectrum ? "spectrum" : "uniform";
}

SMParams initial_params(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                        int components, Rng& rng, InitMethod method) {
  if (X.rows() < 1 || X.rows() != y.size()) throw ShapeError("initial_params: X and Y lengths differ");
  if (components < 1) throw UsageError("initial_params: Q must be at least 1");
  const Index n = X.rows();
  const Index dims = X.cols();
  const double q = static_cast<double>(components);
  SMParams params{VectorXd::Constant(components, 1.0 / q), MatrixXd(components, dims),
                  MatrixXd(components, dims), 0.0};

  // Periodogram on a subsample so initialization stays cheap on large inputs.
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  if (method == InitMethod::kSpectrum && n > kPeriodogramPoints) {
    rng.shuffle(std::span<Index>(rows));
    rows.resize(static_cast<std::size_t>(kPeriodogramPoints));
  }
  VectorXd centred(static_cast<Index>(rows.size()));
  const double y_mean = y.mean();
  for (std::size_t i = 0; i < rows.size(); ++i) centred(static_cast<Index>(i)) = y(rows[i]) - y_mean;

  const double nyquist = 1.0 / median_spacing(X, rng);
  for (Index d = 0; d < dims; ++d) {
    if (method == InitMethod::kUniform) {
      for (Index c = 0; c < components; ++c) {
        params.means(c, d) = (1.0 - rng.uniform()) * 0.5 * nyquist;
        params.scales(c, d) = nyquist / (8.0 * q);
      }
      continue;
    }
    VectorXd x(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) x(static_cast<Index>(i)) = X(rows[i], d);
    const double range = X.col(d).maxCoeff() - X.col(d).minCoeff();
    // The Nyquist proxy bounds the norm of a frequency vector, so each
    // coordinate gets a 1 / sqrt(D) share.
    const double max_freq = 0.5 * nyquist / std::sqrt(static_cast<double>(dims));
    const double bin = max_freq / kPeriodogramBins;
    const std::vector<double> cdf = cumulative_power(x, centred, max_freq);
    for (Index c = 0; c < components; ++c) {
      std::size_t k = 0;
      if (cdf.back() > 0.0) {
        const double u = rng.uniform() * cdf.back();
        k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        k = std::min(k, cdf.size() - 1);
      } else {
        k = static_cast<std::size_t>(rng.uniform_index(cdf.size()));
      }
      params.means(c, d) = (static_cast<double>(k) + 1.0 - rng.uniform()) * bin;
      // The envelope multiplies over dimensions; sqrt(D) keeps its decay at
      // typical separations independent of D.
      params.scales(c, d) = range > 0.0 ? 1.0 / (range * std::sqrt(static_cast<double>(dims))) : nyquist / (8.0 * q);
    }
  }
  const double var = (y.array() - y_mean).square().mean();
  params.noise_var = 0.1 * (var > 0.0 ? var : 1.0);
  return params;
}

TrainState initial_state(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                         const TrainConfig& config) {
  config.validate();
  const Rng root(config.seed);
  Rng init_rng = root.split(0);
  const SMParams params = initial_params(X, y, config.components, init_rng, config.init);
  TrainState state;
  state.layout = ParamLayout{params.components(), params.dims()};
  state.log_params = to_log_params(params);
  state.first_moment = VectorXd::Zero(state.layout.size());
  state.second_moment = VectorXd::Zero(state.layout.size());
  state.seed = config.seed;
  state.allocation = allocate(equal_ratios(params.components()), config.total_points);
  state.prior = ComponentPrior{params.means, config.prior_scale_factor * params.scales};
  if (config.mode == Mode::kSS) {
    Rng noise_rng = root.split(1);
    state.fixed_noise = draw_sample(params, state.allocation, noise_rng).noise;
  }
  return state;
}

TrainResult train(TrainState state, const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                  const TrainConfig& config, const IterationCallback& callback) {
  config.validate();
  if (X.rows() != y.size()) throw ShapeError("train: X and Y lengths differ");
  if (state.layout.dims != X.cols()) throw ShapeError("train: state dimension does not match X");
  if (config.mode == Mode::kSS && !state.fixed_noise) throw UsageError("train: SS mode needs fixed noise");
  const Rng root(state.seed);
  const ParamLayout& layout = state.layout;
  const Index sigma_begin = layout.scale(0, 0);
  const Index mu_begin = layout.mean(0, 0);

  // With every pair in play the subset never changes, so build it once.
  std::optional<PairwiseSubset> full_subset;
  if (config.use_ws && X.rows() >= 2) {
    const auto n = static_cast<std::uint64_t>(X.rows());
    const std::uint64_t pairs = n * (n - 1) / 2;
    if (subset_size(pairs, config.pair_rate, config.max_pairs) == pairs) {
      Rng unused(0);
      full_subset = pairwise_subset(X, config.pair_rate, unused, config.max_pairs);
    }
  }

  TrainResult result;
  const int last = state.iteration + config.iterations;
  while (state.iteration < last) {
    const auto start = std::chrono::steady_clock::now();
    Rng step_rng = root.split(static_cast<std::uint64_t>(state.iteration) + 2);
    const SMParams params = state.params();
    ObjectiveGradient objective;
    std::vector<SpectralSample> samples;
    try {
      Rng alloc_rng = step_rng.split(0);
      Rng sample_rng = step_rng.split(1);
      if (config.mode == Mode::kSVSS) {
        state.allocation = full_subset ? allocate(optimal_ratios(params, *full_subset), config.total_points)
                                       : choose_allocation(params, X, config, alloc_rng);
        for (int l = 0; l < config.mc_samples; ++l) {
          samples.push_back(draw_sample(params, state.allocation, sample_rng));
        }
        const PriorSpec prior = state.prior.expand(state.allocation);
        objective = evaluate_objective(params, &prior, X, y, samples);
      } else {
        samples = ss_objective(params, X, y, state, sample_rng).samples;
        objective = evaluate_objective(params, nullptr, X, y, samples);
      }
      if (!std::isfinite(objective.value) || !objective.gradient.allFinite()) {
        throw NumericalFailure("non-finite objective or gradient at iteration " + std::to_string(state.iteration),
                               {});
      }
    } catch (const NumericalFailure& failure) {
      result.failure = failure.what();
      break;
    }

    if (config.use_ng) {
      const VectorXd sigma_step = natural_gradient(layout, state.log_params, params.scales, objective.gradient);
      adam_update(state, config, sigma_step, 0, mu_begin);
      adam_update(state, config, sigma_step, sigma_begin, layout.size());
      const SMParams updated = from_log_params(state.log_params, layout);
      const VectorXd mu_step = natural_gradient(layout, state.log_params, updated.scales, objective.gradient);
      adam_update(state, config, mu_step, mu_begin, sigma_begin);
    } else {
      adam_update(state, config, objective.gradient, 0, layout.size());
    }

    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    state.trace.push_back({state.iteration, objective.value, objective.log_likelihood, objective.kl, elapsed});
    if (callback) callback(IterationInfo{state.iteration, params, samples, objective});
    ++state.iteration;
  }
  result.params = state.params();
  result.state = std::move(state);
  return result;
}

TrainResult train(const Eigen::Ref<const MatrixXd>& X, const Eigen::Ref<const VectorXd>& y,
                  const TrainConfig& config, const IterationCallback& callback) {
  return train(initial_state(X, y, config), X, y, config, callback);
}

}  // namespace svss
