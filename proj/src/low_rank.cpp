#include "svss/low_rank.hpp"

#include <cmath>
#include <sstream>

#include "svss/errors.hpp"

namespace svss {
namespace {

Eigen::LLT<MatrixXd> factorize(const MatrixXd& matrix, double& jitter_out) {
  Eigen::LLT<MatrixXd> llt(matrix);
  if (llt.info() == Eigen::Success) {
    jitter_out = 0.0;
    return llt;
  }
  const double n = static_cast<double>(matrix.rows());
  double jitter = 1e-10 * matrix.trace() / n;
  std::vector<double> attempted;
  for (int attempt = 0; attempt < 3; ++attempt, jitter *= 10.0) {
    attempted.push_back(jitter);
    MatrixXd shifted = matrix;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) {
      jitter_out = jitter;
      return llt;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky factorization failed after jitters";
  for (double j : attempted) msg << ' ' << j;
  throw NumericalFailure(msg.str(), attempted);
}

}  // namespace

JitteredCholesky::JitteredCholesky(const MatrixXd& matrix) : llt(factorize(matrix, jitter)) {}

double JitteredCholesky::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

FeatureSystem::FeatureSystem(const MatrixXd& phi, double noise_var)
    : noise_var_(noise_var),
      rank_(phi.cols()),
      factor_([&] {
        MatrixXd a = MatrixXd::Zero(phi.cols(), phi.cols());
        a.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
        a = a.selfadjointView<Eigen::Lower>();
        a.diagonal().array() += noise_var;
        return a;
      }()) {}

double FeatureSystem::log_det_covariance(Index n) const {
  return factor_.log_det() + static_cast<double>(n - rank_) * std::log(noise_var_);
}

}  // namespace svss
