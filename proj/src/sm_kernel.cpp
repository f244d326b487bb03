#include "svss/sm_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svss/errors.hpp"

namespace svss {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoPiSq = 2.0 * std::numbers::pi * std::numbers::pi;
constexpr Index kRowBlock = 64;

void check_tau(const SMParams& params, Index size) {
  if (size != params.dims()) {
    throw ShapeError("tau has " + std::to_string(size) + " entries, kernel expects D = " +
                     std::to_string(params.dims()));
  }
}

// Kernel on a difference vector without shape checks.
double kernel_unchecked(const SMParams& params, const double* tau) {
  const Index dims = params.dims();
  double total = 0.0;
  for (Index q = 0; q < params.components(); ++q) {
    double envelope = 0.0;
    double phase = 0.0;
    for (Index d = 0; d < dims; ++d) {
      const double scaled = params.scales(q, d) * tau[d];
      envelope += scaled * scaled;
      phase += params.means(q, d) * tau[d];
    }
    total += params.weights(q) * std::exp(-kTwoPiSq * envelope) * std::cos(kTwoPi * phase);
  }
  return total;
}

}  // namespace

double component_kernel(const SMParams& params, Index q, const Eigen::Ref<const VectorXd>& tau) {
  check_tau(params, tau.size());
  const double envelope = (params.scales.row(q).transpose().array() * tau.array()).square().sum();
  const double phase = params.means.row(q).dot(tau);
  return std::exp(-kTwoPiSq * envelope) * std::cos(kTwoPi * phase);
}

double sm_kernel(const SMParams& params, const Eigen::Ref<const VectorXd>& tau) {
  check_tau(params, tau.size());
  const VectorXd contiguous = tau;
  return kernel_unchecked(params, contiguous.data());
}

MatrixXd sm_cross_gram(const SMParams& params, const Eigen::Ref<const MatrixXd>& A,
                       const Eigen::Ref<const MatrixXd>& B) {
  if (A.cols() != params.dims() || B.cols() != params.dims()) {
    throw ShapeError("sm_cross_gram: input dimension does not match the kernel");
  }
  const Index rows = A.rows();
  const Index cols = B.rows();
  const Index dims = params.dims();
  MatrixXd gram(rows, cols);
#pragma omp parallel for schedule(static)
  for (Index block = 0; block < rows; block += kRowBlock) {
    VectorXd tau(dims);
    const Index end = std::min(rows, block + kRowBlock);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = block; i < end; ++i) {
        for (Index d = 0; d < dims; ++d) tau(d) = A(i, d) - B(j, d);
        gram(i, j) = kernel_unchecked(params, tau.data());
      }
    }
  }
  return gram;
}

MatrixXd sm_gram(const SMParams& params, const Eigen::Ref<const MatrixXd>& X) {
  if (X.cols() != params.dims()) throw ShapeError("sm_gram: input dimension does not match the kernel");
  const Index n = X.rows();
  const Index dims = params.dims();
  MatrixXd gram(n, n);
  const double diag = params.total_weight();
#pragma omp parallel for schedule(dynamic)
  for (Index block = 0; block < n; block += kRowBlock) {
    VectorXd tau(dims);
    const Index end = std::min(n, block + kRowBlock);
    for (Index i = block; i < end; ++i) {
      gram(i, i) = diag;
      for (Index j = 0; j < i; ++j) {
        for (Index d = 0; d < dims; ++d) tau(d) = X(i, d) - X(j, d);
        gram(i, j) = kernel_unchecked(params, tau.data());
      }
    }
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose().triangularView<Eigen::StrictlyUpper>();
  return gram;
}

FeatureMatrix feature_map(const SMParams& params, const SpectralSample& sample,
                          const Eigen::Ref<const MatrixXd>& X) {
  const Allocation& alloc = sample.allocation;
  if (alloc.components() != params.components()) {
    throw InvalidSample("feature_map: sample has " + std::to_string(alloc.components()) +
                        " components, parameters have " + std::to_string(params.components()));
  }
  for (Index q = 0; q < alloc.components(); ++q) {
    if (alloc.counts[q] < 1) {
      throw InvalidSample("feature_map: component " + std::to_string(q) + " has no spectral points");
    }
  }
  if (sample.points.rows() != alloc.total || sample.points.cols() != params.dims() ||
      static_cast<Index>(sample.component_of.size()) != alloc.total) {
    throw InvalidSample("feature_map: sample shape does not match its allocation");
  }
  if (X.cols() != params.dims()) throw ShapeError("feature_map: input dimension does not match the kernel");

  const Index n = X.rows();
  const Index m = sample.points.rows();
  VectorXd amplitude(m);
  for (Index i = 0; i < m; ++i) {
    const int q = sample.component_of[i];
    amplitude(i) = std::sqrt(params.weights(q) / alloc.counts[q]);
  }

  FeatureMatrix out{MatrixXd(n, 2 * m), sample};
  MatrixXd& phi = out.values;
#pragma omp parallel for schedule(static)
  for (Index block = 0; block < n; block += kRowBlock) {
    const Index rows = std::min(kRowBlock, n - block);
    const MatrixXd phase = kTwoPi * (X.middleRows(block, rows) * sample.points.transpose());
    for (Index i = 0; i < m; ++i) {
      for (Index r = 0; r < rows; ++r) {
        phi(block + r, 2 * i) = amplitude(i) * std::cos(phase(r, i));
        phi(block + r, 2 * i + 1) = amplitude(i) * std::sin(phase(r, i));
      }
    }
  }
  return out;
}

double concentration_bound(const SMParams& params, Index n, int m0, double k_norm, double eps) {
  const double w0 = params.weights.norm();
  const double nd = static_cast<double>(n);
  const double exponent = -3.0 * eps * eps * m0 / (w0 * nd * (6.0 * k_norm + 4.0 * eps));
  return std::min(1.0, nd * std::exp(exponent));
}

}  // namespace svss
