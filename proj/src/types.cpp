#include "svss/types.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "svss/errors.hpp"

namespace svss {

void SMParams::validate() const {
  const Index q = weights.size();
  if (q < 1) throw ShapeError("SMParams: at least one mixture component is required");
  if (means.rows() != q || scales.rows() != q) {
    throw ShapeError("SMParams: means/scales must have one row per weight (Q = " +
                     std::to_string(q) + ")");
  }
  if (means.cols() < 1 || scales.cols() != means.cols()) {
    throw ShapeError("SMParams: means and scales must be Q x D with D >= 1");
  }
  if (!weights.allFinite() || !means.allFinite() || !scales.allFinite() || !std::isfinite(noise_var)) {
    throw InvalidParams("SMParams: non-finite parameter");
  }
  if ((weights.array() <= 0.0).any()) throw InvalidParams("SMParams: weights must be positive");
  if ((scales.array() <= 0.0).any()) throw InvalidParams("SMParams: scales must be positive");
  if ((means.array() < 0.0).any()) throw InvalidParams("SMParams: means must be non-negative");
  if (noise_var <= 0.0) throw InvalidParams("SMParams: noise variance must be positive");
}

int Allocation::offset(Index q) const {
  return std::accumulate(counts.begin(), counts.begin() + q, 0);
}

void Allocation::validate() const {
  if (counts.empty()) throw ShapeError("Allocation: no components");
  if (ratios.size() != components()) throw ShapeError("Allocation: ratios/counts length mismatch");
  int sum = 0;
  for (int c : counts) {
    if (c < 1) throw InvalidSample("Allocation: every component needs at least one point");
    sum += c;
  }
  if (sum != total) throw InvalidSample("Allocation: counts do not sum to the total");
  if (std::abs(ratios.sum() - 1.0) > 1e-12) throw InvalidSample("Allocation: ratios do not sum to one");
}

}  // namespace svss
