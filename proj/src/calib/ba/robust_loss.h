#pragma once

#include <cmath>

namespace calib {

// Huber loss on the squared residual norm, with parameter 1 on the norm:
// rho(s) = s for s <= 1, else 2 sqrt(s) - 1 (continuous with matching
// derivative at s = 1).
inline double HuberCost(double squared_norm) {
  return squared_norm <= 1.0 ? squared_norm : 2.0 * std::sqrt(squared_norm) - 1.0;
}

// IRLS weight rho'(s).
inline double HuberWeight(double squared_norm) {
  return squared_norm <= 1.0 ? 1.0 : 1.0 / std::sqrt(squared_norm);
}

}  // namespace calib
