#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varflow/grid.hpp"
#include "varflow/solver.hpp"

namespace varflow {

/// Iterate of the TV solver at step k: u^k, the extrapolated v^k, t^{k-1}, t^k.
struct TvState {
  Field u;
  Field v;
  std::size_t k = 0;
  double t_prev = 1.0;
  double t_cur = 1.0;
};

struct TensorGrad {
  Field d_w0;
  Field d_w1;
};

struct TvResult {
  Field u;
  CheckpointStore<TvState> store;
};

struct TvGradients {
  Field d_uhat;
  Field d_c;
  TensorGrad d_W;
  Field d_u0;
};

/// W / 8, the tensor the TV iteration actually runs with.
DiffusionTensor fold_tv_lipschitz(const DiffusionTensor& tensor);

/// One FISTA step on a single flow component. `scaled` must already carry the
/// 1/L factor (see fold_tv_lipschitz).
TvState tv_step(const TvState& state, const Field& uhat, const Field& c,
                const DiffusionTensor& scaled, double delta);

/// K FISTA steps from u^0 = v^0 = u0. The tensor is divided by L = 8 internally.
/// When `branch_trace` is given it receives one code per pixel and step: the
/// prox case in the low bits, bit 2 set when the Huber term is linear.
TvResult tv_forward(const Field& uhat, const Field& c, const DiffusionTensor& tensor,
                    const Field& u0, const SolverConfig& config,
                    std::vector<std::uint8_t>* branch_trace = nullptr);

/// sum_px huber(sqrt(W) Du, delta) + c |u - uhat|.
double tv_energy(const Field& u, const Field& uhat, const Field& c,
                 const DiffusionTensor& tensor, double delta);

/// The objective tv_forward minimizes: tv_energy with the folded tensor W / 8.
double tv_objective(const Field& u, const Field& uhat, const Field& c,
                    const DiffusionTensor& tensor, double delta);

/// Reverse pass of tv_forward for the loss gradient d_uK = df/du^K. Replays the
/// forward between checkpoints and returns df/duhat, df/dc, df/dW and df/du^0.
TvGradients tv_backward(const Field& d_uK, const CheckpointStore<TvState>& store,
                        const Field& uhat, const Field& c, const DiffusionTensor& tensor,
                        const SolverConfig& config, ReplayStats* stats = nullptr);

}  // namespace varflow
