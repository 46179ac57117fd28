#pragma once

// Generic unrolled-FISTA driver with checkpointed reverse pass. An Engine
// supplies one forward step over kVars primal fields and its adjoint; the
// driver owns the momentum schedule, checkpoints and segment replay.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "varflow/error.hpp"
#include "varflow/solver.hpp"

namespace varflow::detail {

template <typename Real, std::size_t N>
using Vars = std::array<std::vector<Real>, N>;

template <typename Real, std::size_t N>
struct Snapshot {
  std::size_t k = 0;
  Vars<Real, N> prim;    // u^k (and w^k)
  Vars<Real, N> extrap;  // v^k (and q^k)
};

template <typename Real, std::size_t N>
void require_finite(const Vars<Real, N>& vars, const char* stage, std::size_t k) {
  for (const auto& v : vars) {
    for (Real x : v) {
      if (!std::isfinite(x)) {
        fail(ErrorCode::NonFinite, std::string(stage) + " produced a non-finite value at iteration " +
                                       std::to_string(k));
      }
    }
  }
}

/// Runs `iters` steps from prim = extrap = init. Calls `keep` with every state
/// whose index is listed in `checkpoints` (ascending) before stepping from it.
template <typename Engine, typename Keep, typename Real = typename Engine::Real, std::size_t N = Engine::kVars>
Vars<Real, N> unrolled_forward(Engine& engine, const Vars<Real, N>& init, std::size_t iters,
                               const std::vector<double>& momentum,
                               const std::vector<std::size_t>& checkpoints, Keep&& keep) {
  Snapshot<Real, N> cur{0, init, init};
  Vars<Real, N> next_prim = init;
  Vars<Real, N> next_extrap = init;
  std::size_t next_cp = 0;
  for (std::size_t k = 0; k < iters; ++k) {
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == k) {
      require_finite(cur.prim, "forward pass", k);
      require_finite(cur.extrap, "forward pass", k);
      keep(cur);
      ++next_cp;
    }
    engine.step(cur.prim, cur.extrap, static_cast<Real>(momentum[k]), next_prim, next_extrap);
    std::swap(cur.prim, next_prim);
    std::swap(cur.extrap, next_extrap);
    cur.k = k + 1;
  }
  require_finite(cur.prim, "forward pass", iters);
  return cur.prim;
}

/// Reverse pass. `snapshots` are the stored states (ascending k, first k = 0);
/// `d_final` is df/d(prim^K). Returns df/d(prim^0), the initial iterate.
template <typename Engine, typename Real = typename Engine::Real, std::size_t N = Engine::kVars>
Vars<Real, N> unrolled_backward(Engine& engine, const std::vector<Snapshot<Real, N>>& snapshots,
                                std::size_t iters, const std::vector<double>& momentum,
                                const Vars<Real, N>& d_final, typename Engine::Accum& acc,
                                ReplayStats* stats) {
  const std::size_t n = d_final[0].size();
  Vars<Real, N> d_prim = d_final;  // adjoint of prim^{k+1}, complete
  Vars<Real, N> carry;             // partial adjoint of prim^k from extrap^{k+1}
  Vars<Real, N> d_extrap;
  for (auto& c : carry) c.assign(n, Real(0));
  for (auto& d : d_extrap) d.assign(n, Real(0));
  Vars<Real, N> d_init;

  std::vector<Vars<Real, N>> replay;
  Vars<Real, N> next_prim = snapshots.front().prim;
  Vars<Real, N> next_extrap = snapshots.front().extrap;

  for (std::size_t seg = snapshots.size(); seg-- > 0;) {
    const auto& snap = snapshots[seg];
    const std::size_t begin = snap.k;
    const std::size_t end = seg + 1 < snapshots.size() ? snapshots[seg + 1].k : iters;

    // Recompute extrap^k for k in [begin, end).
    replay.resize(end - begin);
    replay[0] = snap.extrap;
    Vars<Real, N> prim = snap.prim;
    for (std::size_t k = begin; k + 1 < end; ++k) {
      engine.step(prim, replay[k - begin], static_cast<Real>(momentum[k]), next_prim, next_extrap);
      std::swap(prim, next_prim);
      replay[k - begin + 1] = next_extrap;
    }
    if (stats) {
      stats->peak_replay_states = std::max(stats->peak_replay_states, end - begin);
      stats->replayed_steps += end - begin - 1;
    }

    for (std::size_t k = end; k-- > begin;) {
      engine.step_backward(replay[k - begin], d_prim, d_extrap, acc);
      if (k > 0) {
        const Real gamma = static_cast<Real>(momentum[k - 1]);
        const Real keep = Real(1) + gamma;
        for (std::size_t v = 0; v < N; ++v) {
          auto& dp = d_prim[v];
          auto& cy = carry[v];
          const auto& de = d_extrap[v];
          for (std::size_t i = 0; i < n; ++i) {
            dp[i] = cy[i] + keep * de[i];
            cy[i] = -gamma * de[i];
          }
        }
      } else {
        for (std::size_t v = 0; v < N; ++v) {
          d_init[v].resize(n);
          for (std::size_t i = 0; i < n; ++i) d_init[v][i] = carry[v][i] + d_extrap[v][i];
        }
      }
    }
    require_finite(d_prim, "reverse pass", begin);
  }
  if (stats) stats->stored_states = snapshots.size();
  return d_init;
}

}  // namespace varflow::detail
