#ifndef SVSS_REGRESSION_HPP
#define SVSS_REGRESSION_HPP

#include <optional>
#include <vector>

#include "svss/rng.hpp"
#include "svss/types.hpp"

namespace svss {

/// Default training-set size cap for dense exact-kernel prediction.
inline constexpr Index kDefaultExactCap = 20000;

/// Gaussian predictive distribution; variance includes the observation noise.
struct Predictive {
  VectorXd mean;
  VectorXd variance;
  std::optional<VectorXd> log_density;  // per point, once targets are attached

  Index size() const { return mean.size(); }
  void attach_targets(const Eigen::Ref<const VectorXd>& targets);
};

/// Sparse-spectrum predictive distribution from one spectral sample:
/// mean = phi_* A^{-1} Phi^T y, variance = noise_var (1 + phi_* A^{-1} phi_*^T)
/// with A = Phi^T Phi + noise_var I.
Predictive ssgp_predict(const SMParams& params, const SpectralSample& sample,
                        const Eigen::Ref<const MatrixXd>& x_train, const Eigen::Ref<const VectorXd>& y_train,
                        const Eigen::Ref<const MatrixXd>& x_test);

/// Moment-matched mixture of the single-sample predictives.
Predictive ssgp_predict(const SMParams& params, const std::vector<SpectralSample>& samples,
                        const Eigen::Ref<const MatrixXd>& x_train, const Eigen::Ref<const VectorXd>& y_train,
                        const Eigen::Ref<const MatrixXd>& x_test);

/// Dense GP regression with the exact spectral mixture kernel. Throws
/// TooLarge when the training set exceeds `cap`.
Predictive exact_predict(const SMParams& params, const Eigen::Ref<const MatrixXd>& x_train,
                         const Eigen::Ref<const VectorXd>& y_train, const Eigen::Ref<const MatrixXd>& x_test,
                         Index cap = kDefaultExactCap);

struct Metrics {
  double rmse = 0.0;
  double mnll = 0.0;
};

VectorXd gaussian_log_density(const Eigen::Ref<const VectorXd>& mean, const Eigen::Ref<const VectorXd>& variance,
                              const Eigen::Ref<const VectorXd>& targets);

Metrics metrics(const Predictive& pred, const Eigen::Ref<const VectorXd>& targets);

}  // namespace svss

#endif  // SVSS_REGRESSION_HPP
