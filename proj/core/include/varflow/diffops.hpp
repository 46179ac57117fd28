#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "varflow/grid.hpp"

namespace varflow {

/// Forward differences of a scalar field. gx vanishes on the last column and
/// gy on the last row.
struct GradField {
  Field gx;
  Field gy;
};

/// B(u, w) for second-order TGV: (Du - w) followed by Dw0 and Dw1.
struct TgvStack {
  Field ax, ay;    // Du - w
  Field b0x, b0y;  // Dw0
  Field b1x, b1y;  // Dw1
};

struct TgvPrimal {
  Field u;
  Field w0;
  Field w1;
};

GradField grad(const Field& u);
Field grad_adj(const GradField& p);

TgvStack apply_B(const Field& u, const Field& w0, const Field& w1);
TgvPrimal apply_B_adj(const TgvStack& s);

/// Huber norm of a 2-vector with the additive floor:
/// |x|^2/2 + delta^2/2 if |x| <= delta, delta |x| otherwise.
double huber(double x0, double x1, double delta);

/// A linear map A given by its action and the action of its adjoint.
struct LinearMap {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;
  std::function<void(std::span<const double>, std::span<double>)> apply_adjoint;
};

/// Largest eigenvalue of A^T A by power iteration from a fixed pseudo-random
/// start vector. Returns the Rayleigh quotient after `iters` iterations, which is
/// nondecreasing in `iters` and never exceeds the true value.
double spectral_norm(const LinearMap& op, std::size_t iters);

/// sqrt(W) D on a width x height grid.
LinearMap weighted_grad_map(const DiffusionTensor& tensor);

/// sqrt(V_beta) B with V_beta = diag(W, beta I).
LinearMap weighted_tgv_map(const DiffusionTensor& tensor, double beta);

}  // namespace varflow
