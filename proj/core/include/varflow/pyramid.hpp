#pragma once

#include <cstddef>
#include <vector>

#include "varflow/grid.hpp"
#include "varflow/solver.hpp"

namespace varflow {

enum class Model { tv, tgv };

struct PyramidConfig {
  std::vector<std::size_t> iters_per_level{defaults::level_iterations.begin(),
                                           defaults::level_iterations.end()};  // coarse to fine
  Model model = Model::tv;
  SolverConfig solver;  // iters is ignored, taken from iters_per_level
  double beta = defaults::tgv_beta;

  std::size_t levels() const noexcept { return iters_per_level.size(); }
  void validate() const;
};

struct LevelInputs {
  FlowField uhat;
  ConfidenceMap conf;
  DiffusionTensor tensor;
};

/// Half-resolution inputs: c by 2x2 max, W by 2x2 min, uhat taken at the most
/// confident pixel of each block and halved. Odd trailing rows/columns fold
/// into the last block.
LevelInputs downsample_inputs(const FlowField& uhat, const ConfidenceMap& conf,
                              const DiffusionTensor& tensor);

/// Bilinear upsampling to width x height with flow values doubled.
FlowField upsample_flow(const FlowField& coarse, std::size_t width, std::size_t height);

/// Solves one flow field (both components) at a single resolution.
FlowField solve_level(const FlowField& uhat, const ConfidenceMap& conf,
                      const DiffusionTensor& tensor, const FlowField& u0, Model model,
                      double beta, const SolverConfig& solver);

/// Coarse-to-fine solve; the coarsest level starts from its own uhat, every
/// finer level from the upsampled coarser solution.
FlowField solve_pyramid(const FlowField& uhat, const ConfidenceMap& conf,
                        const DiffusionTensor& tensor, const PyramidConfig& config);

}  // namespace varflow
