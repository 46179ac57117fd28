#pragma once

#include "varflow/defaults.hpp"
#include "varflow/grid.hpp"

namespace varflow {

struct ConfidenceFeatures {
  ScalarMap prob;      // pseudo-likelihoods at the argmin, 2 channels
  ScalarMap fb_dist;   // forward-backward distance
  ScalarMap boundary;  // distance of the warped pixel to the image border
  ScalarMap fit_cost;  // cost after the quadratic fit
};

/// |ubar(x, y) - ubar_bw(x + ubar0, y + ubar1)| with bilinear lookup;
/// defaults::oob_distance when the warp leaves the grid.
ScalarMap fwd_bwd_distance(const FlowField& ubar, const FlowField& ubar_bw);

/// max(0, min(x + u0, y + u1, N - x - u0, M - y - u1)).
ScalarMap boundary_distance(const FlowField& uhat);

/// Keeps only the largest entry of every aligned 2x2 block (first in row-major
/// order on ties). Partial blocks at odd borders are treated as zero-padded.
ScalarMap nonmin_suppress(const ScalarMap& conf);

/// Edge-stopping tensor w_i = exp(-gamma |d_i I|) from forward differences.
DiffusionTensor edge_tensor(const ScalarMap& image, double gamma);

/// Probability of the argmin displacement per axis: p_i(x, y, ubar_i), nearest
/// upsampled by `factor` when the volumes live at a coarser grid.
ScalarMap prob_at_flow(const ScalarMap& prob0, const ScalarMap& prob1, const FlowField& ubar,
                       std::size_t factor);

/// Stand-in scorer: nonmin_suppress(exp(-fb_dist) * p0 * p1).
ConfidenceMap baseline_confidence(const ConfidenceFeatures& features);

/// Matching loss: sum over valid pixels of -log p0(u*_0) - log p1(u*_1)
/// + alpha min(1, |uhat - u*|_eps). Lookups round u* to the nearest slot.
double loss_cor(const ScalarMap& prob0, const ScalarMap& prob1, const FlowField& uhat,
                const FlowField& ustar, const Mask& valid, double alpha = defaults::loss_alpha,
                double eps = defaults::loss_epsilon);

}  // namespace varflow
