#include "varflow/solver.hpp"

#include <cmath>
#include <string>

namespace varflow {

void SolverConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) fail(ErrorCode::NonPositiveDelta, "Huber delta must be positive");
  if (iters == 0) fail(ErrorCode::IterBudgetZero, "iteration count must be at least 1");
}

std::vector<double> fista_t_sequence(std::size_t iters) {
  std::vector<double> t(iters + 1);
  t[0] = 1.0;
  for (std::size_t k = 0; k < iters; ++k) t[k + 1] = (1.0 + std::sqrt(1.0 + 4.0 * t[k] * t[k])) / 2.0;
  return t;
}

std::vector<double> fista_momentum(std::size_t iters) {
  const auto t = fista_t_sequence(iters);
  std::vector<double> gamma(iters);
  for (std::size_t k = 0; k < iters; ++k) gamma[k] = (t[k] - 1.0) / t[k + 1];
  return gamma;
}

std::vector<std::size_t> checkpoint_indices(std::size_t iters, CheckpointMode mode) {
  std::vector<std::size_t> out;
  if (iters == 0) return out;
  if (mode == CheckpointMode::full) {
    out.resize(iters);
    for (std::size_t k = 0; k < iters; ++k) out[k] = k;
    return out;
  }
  const double root = std::sqrt(static_cast<double>(iters));
  auto segments = static_cast<std::size_t>(root);
  while ((segments + 1) * (segments + 1) <= iters) ++segments;
  while (segments * segments > iters) --segments;
  for (std::size_t j = 0; j <= segments; ++j) {
    const auto idx = static_cast<std::size_t>(std::ceil(static_cast<double>(j) * root));
    if (idx >= iters) break;
    if (out.empty() || idx > out.back()) out.push_back(idx);
  }
  return out;
}

Field prox_data(const Field& u_half, const Field& uhat, const Field& c) {
  require_same_shape(u_half, uhat, "prox inputs");
  require_same_shape(u_half, c, "prox inputs");
  Field out(u_half.width(), u_half.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (prox_branch(u_half[i], uhat[i], c[i])) {
      case ProxBranch::shrink_down: out[i] = u_half[i] - c[i]; break;
      case ProxBranch::shrink_up: out[i] = u_half[i] + c[i]; break;
      case ProxBranch::clamp: out[i] = uhat[i]; break;
    }
  }
  return out;
}

}  // namespace varflow
