#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "varflow/grid.hpp"

namespace varflow {

/// Directional cost volume over displacements H = {-d, ..., d-1}; slot s holds
/// displacement s - d.
class CostVolume {
 public:
  CostVolume() = default;
  CostVolume(std::size_t width, std::size_t height, std::size_t range);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t range() const noexcept { return range_; }
  std::size_t slots() const noexcept { return 2 * range_; }

  std::span<double> scores(std::size_t x, std::size_t y) {
    return {scores_.data() + (y * width_ + x) * slots(), slots()};
  }
  std::span<const double> scores(std::size_t x, std::size_t y) const {
    return {scores_.data() + (y * width_ + x) * slots(), slots()};
  }

  friend bool operator==(const CostVolume&, const CostVolume&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t range_ = 0;
  std::vector<double> scores_;
};

/// cor[j][i]: reference frame j (0 forward, 1 backward), motion axis i.
struct CostVolumes {
  std::array<std::array<CostVolume, 2>, 2> cor;
};

/// Negative feature correlation, min-projected onto each motion axis.
/// Targets outside the grid score defaults::oob_cost.
CostVolumes correlate(const FeatureMap& f0, const FeatureMap& f1, std::size_t range);

/// Per-pixel argmin displacement of each directional volume; ties go to the
/// smallest displacement.
FlowField argmin_flow(const CostVolume& cor0, const CostVolume& cor1);

/// Softmax of the negated scores per pixel, 2d channels.
ScalarMap softmax_prob(const CostVolume& cor);

}  // namespace varflow
