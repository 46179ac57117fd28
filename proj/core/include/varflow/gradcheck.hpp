#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "varflow/defaults.hpp"
#include "varflow/grid.hpp"
#include "varflow/pyramid.hpp"

namespace varflow {

/// Random solver inputs on a small grid, for gradient checks and tests.
struct SolverInstance {
  Field uhat;
  Field c;
  DiffusionTensor tensor;
  Field u0;
  Field w0;  // TGV auxiliary initialisation
  Field w1;
  double beta = defaults::tgv_beta;
};

SolverInstance random_instance(std::size_t width, std::size_t height, std::uint64_t seed);

struct GradcheckOptions {
  Model model = Model::tv;
  std::size_t width = defaults::gradcheck_grid;
  std::size_t height = defaults::gradcheck_grid;
  std::size_t iters = defaults::gradcheck_iters;
  double fd_step = defaults::gradcheck_step;
  double tol = defaults::gradcheck_tol;
  std::uint64_t seed = 0;
  double beta = defaults::tgv_beta;
};

/// Coordinates whose +-step solves take a different prox or Huber branch than
/// the unperturbed solve are kinks: the central difference there is not a
/// derivative, so they are tallied apart from max_rel_err.
struct FamilyReport {
  std::string name;
  std::size_t count = 0;
  double max_rel_err = 0.0;  // over branch-stable coordinates
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t kinks = 0;
  double kink_max_rel_err = 0.0;
};

struct GradcheckReport {
  std::vector<FamilyReport> families;
  double tol = 0.0;

  /// Every branch-stable coordinate agrees within tol.
  bool passed() const;
  /// No finite-difference probe crossed a branch of the solver.
  bool smooth() const;
};

/// |a - n| / max(1, |a|, |n|).
double gradient_error(double analytic, double numeric);

/// Compares the analytic reverse pass of f = 1/2 |u_K|^2 (+ 1/2 |w_K|^2 for TGV)
/// against central differences of the forward pass, in double precision.
GradcheckReport run_gradcheck(const SolverInstance& instance, const GradcheckOptions& options);
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace varflow
