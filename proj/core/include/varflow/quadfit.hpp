#pragma once

#include <array>
#include <cstddef>

#include "varflow/grid.hpp"

namespace varflow {

/// Five-point cost stencil around a match: center, +x, -x, +y, -y.
struct Stencil {
  double center = 0.0;
  double plus_x = 0.0;
  double minus_x = 0.0;
  double plus_y = 0.0;
  double minus_y = 0.0;
};

/// Separable quadratic a0 v0^2 + b0 v0 + a1 v1^2 + b1 v1 + c through a stencil.
struct StencilFit {
  double a0 = 0.0, b0 = 0.0;
  double a1 = 0.0, b1 = 0.0;
  double c = 0.0;
  double v0 = 0.0, v1 = 0.0;
  double cost = 0.0;
  bool failed = false;
};

StencilFit fit_stencil(const Stencil& q);

/// d(w0 v0 + w1 v1 + wc f)/dq for a successful fit; zero when the fit failed.
Stencil fit_stencil_backward(const Stencil& q, double d_v0, double d_v1, double d_cost);

struct QuadFitResult {
  FlowField flow;   // full-resolution refined flow
  ScalarMap cost;   // fitted cost, 1 channel
  Mask failed;
  Grid<Stencil> stencil;            // saved costs for the reverse pass
  Grid<std::array<int, 2>> anchor;  // integer match (v0bar, v1bar)
};

/// Refines a half-resolution integer flow against full-resolution features.
QuadFitResult quadfit_refine(const FeatureMap& psi0, const FeatureMap& psi1, const FlowField& ubar);

/// Gradient of sum(d_flow . flow + d_cost * cost) w.r.t. the saved stencil costs.
Grid<Stencil> quadfit_backward(const FlowField& d_flow, const ScalarMap& d_cost,
                               const QuadFitResult& saved);

struct FeatureGrads {
  FeatureMap d_psi0;
  FeatureMap d_psi1;
};

/// Transposes the stencil correlations: maps d_q onto the feature maps.
FeatureGrads stencil_feature_backward(const Grid<Stencil>& d_q, const FeatureMap& psi0,
                                      const FeatureMap& psi1, const QuadFitResult& saved);

}  // namespace varflow
