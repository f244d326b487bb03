#ifndef SVSS_TESTS_HELPERS_HPP
#define SVSS_TESTS_HELPERS_HPP

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include "svss/svss.hpp"

namespace svss::testing {

inline SMParams random_params(Rng& rng, Index q, Index d, double mean_hi = 2.0, double scale_hi = 0.5) {
  SMParams p{VectorXd(q), MatrixXd(q, d), MatrixXd(q, d), 0.0};
  for (Index c = 0; c < q; ++c) {
    p.weights(c) = 0.2 + 2.0 * rng.uniform();
    for (Index k = 0; k < d; ++k) {
      p.means(c, k) = 0.05 + mean_hi * rng.uniform();
      p.scales(c, k) = 0.05 + scale_hi * rng.uniform();
    }
  }
  p.noise_var = 0.05 + 0.5 * rng.uniform();
  return p;
}

inline MatrixXd random_inputs(Rng& rng, Index n, Index d, double lo = 0.0, double hi = 3.0) {
  MatrixXd X(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) X(i, k) = lo + (hi - lo) * rng.uniform();
  }
  return X;
}

inline VectorXd random_normal(Rng& rng, Index n) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// log N(y; 0, C) through a dense Cholesky of C.
inline double dense_log_density(const MatrixXd& cov, const VectorXd& y) {
  Eigen::LLT<MatrixXd> llt(cov);
  const VectorXd alpha = llt.solve(y);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (y.dot(alpha) + log_det + static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Per-test scratch directory, cleaned at construction.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("SVSS_TEST_TMP");
  std::filesystem::path dir = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "svss_tests";
  dir /= name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace svss::testing

#endif  // SVSS_TESTS_HELPERS_HPP
