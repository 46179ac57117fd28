#include "varflow/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels.hpp"
#include "varflow/defaults.hpp"

namespace varflow {
namespace {

void check_features(const FeatureMap& f0, const FeatureMap& f1) {
  if (f0.width() == 0 || f0.height() == 0 || f0.channels() == 0) {
    fail(ErrorCode::NonPositiveDims, "feature map has a zero dimension");
  }
  if (f0.width() != f1.width() || f0.height() != f1.height() || f0.channels() != f1.channels()) {
    fail(ErrorCode::DimMismatch, "feature maps differ in shape");
  }
  validate(f0);
  validate(f1);
}

/// Fills the two directional volumes with `ref` as the reference frame.
void correlate_directional(const FeatureMap& ref, const FeatureMap& tgt, std::size_t range, CostVolume& out0,
                           CostVolume& out1) {
  const std::size_t w = ref.width(), h = ref.height(), ch = ref.channels(), slots = 2 * range;
  const auto d = static_cast<std::ptrdiff_t>(range);
  const auto rows = static_cast<std::ptrdiff_t>(h);
#pragma omp parallel for schedule(static) if (static_cast<std::ptrdiff_t>(w) * rows * 64 >= detail::kParallelPixels)
  for (std::ptrdiff_t y = 0; y < rows; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      auto s0 = out0.scores(x, static_cast<std::size_t>(y));
      auto s1 = out1.scores(x, static_cast<std::size_t>(y));
      std::fill(s0.begin(), s0.end(), std::numeric_limits<double>::infinity());
      std::fill(s1.begin(), s1.end(), std::numeric_limits<double>::infinity());
      const auto a = ref.pixel(x, static_cast<std::size_t>(y));
      for (std::size_t j1 = 0; j1 < slots; ++j1) {
        const std::ptrdiff_t ty = y + static_cast<std::ptrdiff_t>(j1) - d;
        for (std::size_t j0 = 0; j0 < slots; ++j0) {
          const std::ptrdiff_t tx = static_cast<std::ptrdiff_t>(x) + static_cast<std::ptrdiff_t>(j0) - d;
          double score = defaults::oob_cost;
          if (tx >= 0 && ty >= 0 && tx < static_cast<std::ptrdiff_t>(w) && ty < rows) {
            const auto b = tgt.pixel(static_cast<std::size_t>(tx), static_cast<std::size_t>(ty));
            double dot = 0.0;
            for (std::size_t c = 0; c < ch; ++c) dot += a[c] * b[c];
            score = -dot;
          }
          s0[j0] = std::min(s0[j0], score);
          s1[j1] = std::min(s1[j1], score);
        }
      }
    }
  }
}

void check_volume(const CostVolume& v) {
  if (v.width() == 0 || v.height() == 0 || v.range() == 0) fail(ErrorCode::NonPositiveDims, "empty cost volume");
}

}  // namespace

CostVolume::CostVolume(std::size_t width, std::size_t height, std::size_t range)
    : width_(width), height_(height), range_(range), scores_(width * height * 2 * range, 0.0) {}

CostVolumes correlate(const FeatureMap& f0, const FeatureMap& f1, std::size_t range) {
  if (range == 0) fail(ErrorCode::NonPositiveRange, "displacement range must be at least 1");
  check_features(f0, f1);
  CostVolumes out;
  for (auto& pair : out.cor) {
    for (auto& v : pair) v = CostVolume(f0.width(), f0.height(), range);
  }
  correlate_directional(f0, f1, range, out.cor[0][0], out.cor[0][1]);
  correlate_directional(f1, f0, range, out.cor[1][0], out.cor[1][1]);
  return out;
}

FlowField argmin_flow(const CostVolume& cor0, const CostVolume& cor1) {
  check_volume(cor0);
  if (cor0.width() != cor1.width() || cor0.height() != cor1.height() || cor0.range() != cor1.range()) {
    fail(ErrorCode::DimMismatch, "directional volumes differ in shape");
  }
  FlowField flow(cor0.width(), cor0.height());
  const double d = static_cast<double>(cor0.range());
  for (std::size_t y = 0; y < cor0.height(); ++y) {
    for (std::size_t x = 0; x < cor0.width(); ++x) {
      for (int i = 0; i < 2; ++i) {
        const auto s = (i == 0 ? cor0 : cor1).scores(x, y);
        const auto best = std::min_element(s.begin(), s.end());
        flow.channel(i)(x, y) = static_cast<double>(best - s.begin()) - d;
      }
    }
  }
  return flow;
}

ScalarMap softmax_prob(const CostVolume& cor) {
  check_volume(cor);
  ScalarMap prob(cor.width(), cor.height(), cor.slots());
  for (std::size_t y = 0; y < cor.height(); ++y) {
    for (std::size_t x = 0; x < cor.width(); ++x) {
      const auto s = cor.scores(x, y);
      for (double v : s) {
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "cost volume holds a non-finite score");
      }
      const double lo = *std::min_element(s.begin(), s.end());
      auto p = prob.pixel(x, y);
      double sum = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) {
        p[k] = std::exp(-(s[k] - lo));
        sum += p[k];
      }
      for (double& v : p) v /= sum;
    }
  }
  return prob;
}

}  // namespace varflow
