#pragma once

#include <array>
#include <cstddef>

// Every tunable default used by the library and the command-line tool.
namespace varflow::defaults {

inline constexpr double huber_delta = 0.1;
inline constexpr double tgv_beta = 1.0;
inline constexpr std::size_t displacement_range = 96;
inline constexpr std::size_t pyramid_levels = 3;
inline constexpr std::array<std::size_t, 3> level_iterations{2000, 2000, 4000};
inline constexpr double loss_alpha = 0.1;
inline constexpr double loss_epsilon = 0.01;
inline constexpr double edge_gamma = 5.0;

inline constexpr double tv_lipschitz = 8.0;
inline constexpr double tgv_lipschitz_floor = 12.0;
inline constexpr double tgv_lipschitz_beta_slope = 8.0;

// Out-of-grid correlation score and forward-backward distance.
inline constexpr double oob_cost = 1e30;
inline constexpr double oob_distance = 1e6;

// Minimum accepted curvature of a quadratic stencil fit.
inline constexpr double quadfit_min_curvature = 1e-12;

// Gradient-check harness.
inline constexpr std::size_t gradcheck_grid = 8;
inline constexpr std::size_t gradcheck_iters = 50;
inline constexpr double gradcheck_step = 1e-5;
inline constexpr double gradcheck_tol = 1e-4;

}  // namespace varflow::defaults
