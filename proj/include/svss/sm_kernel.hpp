#ifndef SVSS_SM_KERNEL_HPP
#define SVSS_SM_KERNEL_HPP

#include "svss/types.hpp"

namespace svss {

// The squared envelope term is evaluated in separable form,
// sum_d (sigma_{q,d} tau_d)^2, which is the Fourier transform of a Gaussian
// with diagonal covariance. For D = 1 it coincides with (sigma_q^T tau)^2.

/// Normalized single-component kernel
/// k_q(tau) = exp(-2 pi^2 sum_d (sigma_qd tau_d)^2) cos(2 pi mu_q^T tau).
double component_kernel(const SMParams& params, Index q, const Eigen::Ref<const VectorXd>& tau);

/// Spectral mixture kernel sum_q w_q k_q(tau).
double sm_kernel(const SMParams& params, const Eigen::Ref<const VectorXd>& tau);

/// Dense N x N gram matrix of the spectral mixture kernel over the rows of X.
MatrixXd sm_gram(const SMParams& params, const Eigen::Ref<const MatrixXd>& X);

/// Dense cross-covariance between the rows of A and the rows of B.
MatrixXd sm_cross_gram(const SMParams& params, const Eigen::Ref<const MatrixXd>& A,
                       const Eigen::Ref<const MatrixXd>& B);

/// Random feature matrix of the spectral mixture kernel.
///
/// Row n concatenates, component by component, sqrt(w_q / m_q) times
/// [cos(2 pi s^T x_n), sin(2 pi s^T x_n)] over the m_q points s of component
/// q, so every diagonal entry of Phi Phi^T equals sum_q w_q and
/// E[Phi Phi^T] = sm_gram(params, X).
FeatureMatrix feature_map(const SMParams& params, const SpectralSample& sample,
                          const Eigen::Ref<const MatrixXd>& X);

/// Upper bound on Pr(||Phi Phi^T - K||_2 >= eps), clamped to 1.
///
/// m0 is the smallest per-component point count and k_norm the spectral norm
/// of the exact gram matrix.
double concentration_bound(const SMParams& params, Index n, int m0, double k_norm, double eps);

}  // namespace svss

#endif  // SVSS_SM_KERNEL_HPP
