#ifndef SVSS_TYPES_HPP
#define SVSS_TYPES_HPP

#include <Eigen/Dense>
#include <vector>

namespace svss {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Trainable quantities of a spectral mixture kernel with Gaussian noise.
///
/// Spectral means and scales are in cycles per input unit. They double as the
/// variational parameters of the spectral-point distribution: component q
/// draws its points from N(means.row(q), diag(scales.row(q))^2).
struct SMParams {
  VectorXd weights;  // Q
  MatrixXd means;    // Q x D, non-negative
  MatrixXd scales;   // Q x D, strictly positive
  double noise_var = 1.0;

  Index components() const { return weights.size(); }
  Index dims() const { return means.cols(); }
  double total_weight() const { return weights.sum(); }

  /// Throws ShapeError / InvalidParams when an invariant is violated.
  void validate() const;
};

/// Split of the spectral-point budget across mixture components.
struct Allocation {
  std::vector<int> counts;  // m_q >= 1
  VectorXd ratios;          // p_q, sums to one
  int total = 0;            // M = sum of counts

  Index components() const { return static_cast<Index>(counts.size()); }
  /// Row offset of the first point of component q in a grouped sample.
  int offset(Index q) const;
  void validate() const;
};

/// One reparameterized draw of M spectral points, grouped by component.
struct SpectralSample {
  MatrixXd points;                // M x D
  std::vector<int> component_of;  // 0-based component index per row
  MatrixXd noise;                 // M x D standard-normal draws
  Allocation allocation;

  Index size() const { return points.rows(); }
};

/// N x 2M random feature matrix; columns 2i and 2i+1 hold the cosine and sine
/// features of spectral point i.
struct FeatureMatrix {
  MatrixXd values;
  SpectralSample sample;
};

}  // namespace svss

#endif  // SVSS_TYPES_HPP
