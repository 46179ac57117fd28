#pragma once

#include <cstddef>
#include <vector>

#include "varflow/defaults.hpp"
#include "varflow/grid.hpp"

namespace varflow {

enum class CheckpointMode { sqrt, full };

/// `mixed` runs the iterates in float and accumulates parameter gradients in
/// double; `f64` runs everything in double.
enum class Precision { mixed, f64 };

struct SolverConfig {
  double delta = defaults::huber_delta;
  std::size_t iters = 1000;
  CheckpointMode checkpoint = CheckpointMode::sqrt;
  Precision precision = Precision::f64;

  void validate() const;
};

/// t^0 .. t^iters of the FISTA step-size sequence, t^0 = 1 and
/// t^{k+1} = (1 + sqrt(1 + 4 (t^k)^2)) / 2.
std::vector<double> fista_t_sequence(std::size_t iters);

/// Extrapolation weight (t^k - 1) / t^{k+1} for every step k < iters.
std::vector<double> fista_momentum(std::size_t iters);

/// Iteration indices at which solver states are stored: ceil(j sqrt(K)) for
/// j = 0 .. floor(sqrt(K)), restricted to indices below K. Full mode stores all.
std::vector<std::size_t> checkpoint_indices(std::size_t iters, CheckpointMode mode);

template <typename State>
struct CheckpointStore {
  std::size_t iters = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  CheckpointMode mode = CheckpointMode::sqrt;
  Precision precision = Precision::f64;
  std::size_t segment_len = 0;
  std::vector<State> states;  // ordered by State::k
};

/// Memory accounting for a backward pass.
struct ReplayStats {
  std::size_t stored_states = 0;
  std::size_t peak_replay_states = 0;
  std::size_t replayed_steps = 0;
};

/// Which case of the data-term proximal map fired at a pixel.
enum class ProxBranch { shrink_down, shrink_up, clamp };

template <typename Real>
constexpr ProxBranch prox_branch(Real u_half, Real uhat, Real c) noexcept {
  if (u_half - c > uhat) return ProxBranch::shrink_down;
  if (u_half + c < uhat) return ProxBranch::shrink_up;
  return ProxBranch::clamp;
}

/// Soft shrinkage of u_half toward uhat with per-pixel radius c.
Field prox_data(const Field& u_half, const Field& uhat, const Field& c);

}  // namespace varflow
