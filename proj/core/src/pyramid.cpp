#include "varflow/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "varflow/tgv.hpp"
#include "varflow/tv.hpp"

namespace varflow {
namespace {

/// Fine index range [begin, end) covered by coarse cell i of n coarse cells.
std::pair<std::size_t, std::size_t> block(std::size_t i, std::size_t coarse, std::size_t fine) {
  return {2 * i, i + 1 == coarse ? fine : 2 * i + 2};
}

void check_shapes(const FlowField& uhat, const ConfidenceMap& conf, const DiffusionTensor& tensor) {
  validate(uhat);
  validate(conf);
  validate(tensor);
  require_same_shape(uhat.u0, conf.c, "uhat and c");
  require_same_shape(uhat.u0, tensor.w0, "uhat and W");
}

}  // namespace

void PyramidConfig::validate() const {
  if (iters_per_level.empty()) fail(ErrorCode::EmptyLevel, "pyramid needs at least one level");
  for (std::size_t k : iters_per_level) {
    if (k == 0) fail(ErrorCode::IterBudgetZero, "every level needs at least one iteration");
  }
  if (model == Model::tgv && !(beta > 0.0)) fail(ErrorCode::NonPositiveValue, "beta must be positive");
  SolverConfig probe = solver;
  probe.iters = 1;
  probe.validate();
}

LevelInputs downsample_inputs(const FlowField& uhat, const ConfidenceMap& conf, const DiffusionTensor& tensor) {
  check_shapes(uhat, conf, tensor);
  const std::size_t w = uhat.width(), h = uhat.height();
  if (w < 2 || h < 2) fail(ErrorCode::DimTooSmall, "cannot halve a grid smaller than 2x2");
  const std::size_t cw = w / 2, ch = h / 2;
  LevelInputs out{FlowField(cw, ch), ConfidenceMap(Field(cw, ch)), DiffusionTensor(Field(cw, ch), Field(cw, ch))};
  for (std::size_t cy = 0; cy < ch; ++cy) {
    const auto [y0, y1] = block(cy, ch, h);
    for (std::size_t cx = 0; cx < cw; ++cx) {
      const auto [x0, x1] = block(cx, cw, w);
      std::size_t bx = x0, by = y0;
      double cmax = conf.c(x0, y0);
      double wmin0 = tensor.w0(x0, y0), wmin1 = tensor.w1(x0, y0);
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) {
          if (conf.c(x, y) > cmax) {
            cmax = conf.c(x, y);
            bx = x;
            by = y;
          }
          wmin0 = std::min(wmin0, tensor.w0(x, y));
          wmin1 = std::min(wmin1, tensor.w1(x, y));
        }
      }
      out.conf.c(cx, cy) = cmax;
      out.tensor.w0(cx, cy) = wmin0;
      out.tensor.w1(cx, cy) = wmin1;
      out.uhat.u0(cx, cy) = 0.5 * uhat.u0(bx, by);
      out.uhat.u1(cx, cy) = 0.5 * uhat.u1(bx, by);
    }
  }
  return out;
}

FlowField upsample_flow(const FlowField& coarse, std::size_t width, std::size_t height) {
  validate(coarse);
  if (coarse.width() == 0 || coarse.height() == 0 || width == 0 || height == 0) {
    fail(ErrorCode::EmptyLevel, "cannot resample an empty level");
  }
  const std::size_t cw = coarse.width(), ch = coarse.height();
  FlowField out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = std::clamp((static_cast<double>(y) + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(ch - 1));
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, ch - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx =
          std::clamp((static_cast<double>(x) + 0.5) / 2.0 - 0.5, 0.0, static_cast<double>(cw - 1));
      const auto x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, cw - 1);
      const double fx = sx - static_cast<double>(x0);
      for (int i = 0; i < 2; ++i) {
        const Field& f = coarse.channel(i);
        const double top = (1.0 - fx) * f(x0, y0) + fx * f(x1, y0);
        const double bottom = (1.0 - fx) * f(x0, y1) + fx * f(x1, y1);
        out.channel(i)(x, y) = 2.0 * ((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

FlowField solve_level(const FlowField& uhat, const ConfidenceMap& conf, const DiffusionTensor& tensor,
                      const FlowField& u0, Model model, double beta, const SolverConfig& solver) {
  FlowField out;
  for (int i = 0; i < 2; ++i) {
    if (model == Model::tv) {
      out.channel(i) = tv_forward(uhat.channel(i), conf.c, tensor, u0.channel(i), solver).u;
    } else {
      const Field zero(uhat.width(), uhat.height());
      out.channel(i) = tgv_forward(uhat.channel(i), conf.c, tensor, beta, u0.channel(i), zero, zero, solver).u;
    }
  }
  return out;
}

FlowField solve_pyramid(const FlowField& uhat, const ConfidenceMap& conf, const DiffusionTensor& tensor,
                        const PyramidConfig& config) {
  config.validate();
  check_shapes(uhat, conf, tensor);
  if (uhat.width() == 0 || uhat.height() == 0) fail(ErrorCode::EmptyLevel, "input level is empty");
  std::vector<LevelInputs> levels{LevelInputs{uhat, conf, tensor}};
  for (std::size_t l = 1; l < config.levels(); ++l) {
    const auto& fine = levels.back();
    levels.push_back(downsample_inputs(fine.uhat, fine.conf, fine.tensor));
  }
  FlowField u = levels.back().uhat;
  for (std::size_t l = 0; l < config.levels(); ++l) {
    const LevelInputs& in = levels[config.levels() - 1 - l];
    if (l > 0) u = upsample_flow(u, in.uhat.width(), in.uhat.height());
    SolverConfig solver = config.solver;
    solver.iters = config.iters_per_level[l];
    u = solve_level(in.uhat, in.conf, in.tensor, u, config.model, config.beta, solver);
  }
  return u;
}

}  // namespace varflow
