#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varflow/grid.hpp"
#include "varflow/solver.hpp"
#include "varflow/tv.hpp"

namespace varflow {

/// L = max(12, 8 beta).
double tgv_lipschitz(double beta);

/// Lipschitz-folded weights of the TGV step: V_beta = diag(W, beta I) / L and
/// V = diag(W, I) / L.
struct VWeights {
  double beta = 1.0;
  double lipschitz = 12.0;
  Field w0;                  // W0 / L
  Field w1;                  // W1 / L
  double beta_scaled = 0.0;  // beta / L
  double unit_scaled = 0.0;  // 1 / L

  static VWeights fold(const DiffusionTensor& tensor, double beta);
};

struct TgvState {
  Field u;
  Field w0, w1;
  Field v;
  Field q0, q1;
  std::size_t k = 0;
  double t_prev = 1.0;
  double t_cur = 1.0;
};

struct TgvResult {
  Field u;
  Field w0, w1;
  CheckpointStore<TgvState> store;
};

struct TgvGradients {
  Field d_uhat;
  Field d_c;
  TensorGrad d_W;
  double d_beta = 0.0;
  Field d_u0;
  Field d_w0_0;
  Field d_w1_0;
};

TgvState tgv_step(const TgvState& state, const Field& uhat, const Field& c,
                  const VWeights& weights, double delta);

/// K FISTA steps on (u, w) from u^0 = v^0 = u0 and w^0 = q^0 = w_init.
/// `branch_trace` as for tv_forward, with bits 3 and 4 for the two Dw groups.
TgvResult tgv_forward(const Field& uhat, const Field& c, const DiffusionTensor& tensor,
                      double beta, const Field& u0, const Field& w0_init,
                      const Field& w1_init, const SolverConfig& config,
                      std::vector<std::uint8_t>* branch_trace = nullptr);

/// sum_px huber(sqrt(W)(Du - w)) + beta (huber(Dw0) + huber(Dw1)) + c |u - uhat|.
double tgv_energy(const Field& u, const Field& w0, const Field& w1, const Field& uhat,
                  const Field& c, const DiffusionTensor& tensor, double beta, double delta);

/// The objective tgv_forward minimizes:
/// sum_px huber(sqrt(W/L)(Du - w)) + beta (huber(Dw0/sqrt L) + huber(Dw1/sqrt L)) + c |u - uhat|.
double tgv_objective(const Field& u, const Field& w0, const Field& w1, const Field& uhat,
                     const Field& c, const DiffusionTensor& tensor, double beta, double delta);

TgvGradients tgv_backward(const Field& d_uK, const Field& d_w0K, const Field& d_w1K,
                          const CheckpointStore<TgvState>& store, const Field& uhat,
                          const Field& c, const DiffusionTensor& tensor, double beta,
                          const SolverConfig& config, ReplayStats* stats = nullptr);

}  // namespace varflow
