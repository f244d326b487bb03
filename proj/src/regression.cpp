#include "svss/regression.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "svss/errors.hpp"
#include "svss/low_rank.hpp"
#include "svss/sm_kernel.hpp"

namespace svss {
namespace {

void check_training(const Eigen::Ref<const MatrixXd>& x_train, const Eigen::Ref<const VectorXd>& y_train,
                    const Eigen::Ref<const MatrixXd>& x_test) {
  if (x_train.rows() != y_train.size()) throw ShapeError("prediction: training X and Y lengths differ");
  if (x_train.rows() < 1) throw InsufficientData("prediction: empty training set");
  if (x_test.cols() != x_train.cols()) throw ShapeError("prediction: test inputs have the wrong dimension");
}

}  // namespace

void Predictive::attach_targets(const Eigen::Ref<const VectorXd>& targets) {
  log_density = gaussian_log_density(mean, variance, targets);
}

VectorXd gaussian_log_density(const Eigen::Ref<const VectorXd>& mean, const Eigen::Ref<const VectorXd>& variance,
                              const Eigen::Ref<const VectorXd>& targets) {
  if (mean.size() != targets.size() || variance.size() != targets.size()) {
    throw ShapeError("log density: prediction and target lengths differ");
  }
  const Eigen::ArrayXd resid = targets - mean;
  return (-0.5 * ((2.0 * std::numbers::pi * variance.array()).log() + resid.square() / variance.array()))
      .matrix();
}

Predictive ssgp_predict(const SMParams& params, const SpectralSample& sample,
                        const Eigen::Ref<const MatrixXd>& x_train, const Eigen::Ref<const VectorXd>& y_train,
                        const Eigen::Ref<const MatrixXd>& x_test) {
  check_training(x_train, y_train, x_test);
  const MatrixXd phi = feature_map(params, sample, x_train).values;
  const MatrixXd phi_test = feature_map(params, sample, x_test).values;
  if (phi.cols() > phi.rows()) {
    // More features than points: the same posterior through the N x N system.
    MatrixXd cov = phi * phi.transpose();
    cov.diagonal().array() += params.noise_var;
    const JitteredCholesky factor(cov);
    const MatrixXd cross = phi_test * phi.transpose();
    const MatrixXd projected = factor.llt.matrixL().solve(cross.transpose());
    Predictive pred;
    pred.mean = cross * factor.llt.solve(y_train);
    pred.variance = (phi_test.rowwise().squaredNorm() - projected.colwise().squaredNorm().transpose()).array() +
                    params.noise_var;
    return pred;
  }
  const FeatureSystem system(phi, params.noise_var);
  const VectorXd weights = system.solve(VectorXd(phi.transpose() * y_train));
  const MatrixXd projected = system.factor().llt.matrixL().solve(phi_test.transpose());  // L^{-1} phi_*^T

  Predictive pred;
  pred.mean = phi_test * weights;
  pred.variance = params.noise_var * (1.0 + projected.colwise().squaredNorm().transpose().array());
  return pred;
}

Predictive ssgp_predict(const SMParams& params, const std::vector<SpectralSample>& samples,
                        const Eigen::Ref<const MatrixXd>& x_train, const Eigen::Ref<const VectorXd>& y_train,
                        const Eigen::Ref<const MatrixXd>& x_test) {
  if (samples.empty()) throw InvalidSample("ssgp_predict: no samples");
  if (samples.size() == 1) return ssgp_predict(params, samples.front(), x_train, y_train, x_test);
  VectorXd mean = VectorXd::Zero(x_test.rows());
  VectorXd second = VectorXd::Zero(x_test.rows());
  for (const SpectralSample& sample : samples) {
    const Predictive one = ssgp_predict(params, sample, x_train, y_train, x_test);
    mean += one.mean;
    second += (one.variance.array() + one.mean.array().square()).matrix();
  }
  const double count = static_cast<double>(samples.size());
  Predictive pred;
  pred.mean = mean / count;
  pred.variance = (second / count).array() - pred.mean.array().square();
  pred.variance = pred.variance.cwiseMax(params.noise_var);
  return pred;
}

Predictive exact_predict(const SMParams& params, const Eigen::Ref<const MatrixXd>& x_train,
                         const Eigen::Ref<const VectorXd>& y_train, const Eigen::Ref<const MatrixXd>& x_test,
                         Index cap) {
  check_training(x_train, y_train, x_test);
  if (x_train.rows() > cap) {
    throw TooLarge("exact_predict: " + std::to_string(x_train.rows()) + " training points exceed the dense cap of " +
                   std::to_string(cap) + "; use the ssgp engine instead");
  }
  MatrixXd gram = sm_gram(params, x_train);
  gram.diagonal().array() += params.noise_var;
  const JitteredCholesky chol(gram);
  const VectorXd alpha = chol.llt.solve(y_train);
  const MatrixXd cross = sm_cross_gram(params, x_train, x_test);  // N x N*
  const MatrixXd projected = chol.llt.matrixL().solve(cross);

  Predictive pred;
  pred.mean = cross.transpose() * alpha;
  const Eigen::ArrayXd latent =
      (params.total_weight() - projected.colwise().squaredNorm().transpose().array()).cwiseMax(0.0);
  pred.variance = (latent + params.noise_var).matrix();
  return pred;
}

Metrics metrics(const Predictive& pred, const Eigen::Ref<const VectorXd>& targets) {
  if (targets.size() != pred.size()) throw ShapeError("metrics: prediction and target lengths differ");
  if (targets.size() == 0) throw InsufficientData("metrics: no test points");
  Metrics out;
  out.rmse = std::sqrt((targets - pred.mean).squaredNorm() / static_cast<double>(targets.size()));
  out.mnll = -gaussian_log_density(pred.mean, pred.variance, targets).mean();
  return out;
}

}  // namespace svss
