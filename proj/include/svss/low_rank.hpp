#ifndef SVSS_LOW_RANK_HPP
#define SVSS_LOW_RANK_HPP

#include <Eigen/Cholesky>
#include <vector>

#include "svss/types.hpp"

namespace svss {

/// Cholesky factor of a symmetric positive-definite matrix with jitter
/// escalation: on failure a diagonal jitter of 1e-10 * trace / n is added and
/// multiplied by ten up to three times before NumericalFailure is thrown.
struct JitteredCholesky {
  Eigen::LLT<MatrixXd> llt;
  double jitter = 0.0;

  explicit JitteredCholesky(const MatrixXd& matrix);

  double log_det() const;
};

/// The 2M x 2M system A = Phi^T Phi + noise_var I behind every low-rank
/// likelihood and prediction.
class FeatureSystem {
 public:
  FeatureSystem(const MatrixXd& phi, double noise_var);

  const JitteredCholesky& factor() const { return factor_; }
  double noise_var() const { return noise_var_; }
  Index rank() const { return rank_; }

  MatrixXd solve(const MatrixXd& rhs) const { return factor_.llt.solve(rhs); }
  VectorXd solve(const VectorXd& rhs) const { return factor_.llt.solve(rhs); }

  /// log det(Phi Phi^T + noise_var I_N) via the determinant lemma.
  double log_det_covariance(Index n) const;

 private:
  double noise_var_;
  Index rank_;
  JitteredCholesky factor_;
};

}  // namespace svss

#endif  // SVSS_LOW_RANK_HPP
