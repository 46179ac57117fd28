#include "varflow/quadfit.hpp"

#include <cmath>
#include <limits>

#include "varflow/defaults.hpp"

namespace varflow {
namespace {

constexpr std::array<std::array<int, 2>, 5> kStencilOffsets{{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

double& stencil_entry(Stencil& s, std::size_t k) {
  switch (k) {
    case 0: return s.center;
    case 1: return s.plus_x;
    case 2: return s.minus_x;
    case 3: return s.plus_y;
    default: return s.minus_y;
  }
}

bool inside(long x, long y, std::size_t w, std::size_t h) {
  return x >= 0 && y >= 0 && x < static_cast<long>(w) && y < static_cast<long>(h);
}

double neg_corr(const FeatureMap& psi0, const FeatureMap& psi1, std::size_t x, std::size_t y, long tx, long ty) {
  const auto a = psi0.pixel(x, y);
  const auto b = psi1.pixel(static_cast<std::size_t>(tx), static_cast<std::size_t>(ty));
  double dot = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) dot += a[c] * b[c];
  return -dot;
}

void check_saved(const QuadFitResult& saved, std::size_t w, std::size_t h) {
  if (saved.stencil.width() != w || saved.stencil.height() != h || saved.failed.width() != w ||
      saved.failed.height() != h || saved.anchor.width() != w || saved.anchor.height() != h) {
    fail(ErrorCode::StoreMismatch, "saved quad-fit state does not match the gradient shape");
  }
}

}  // namespace

StencilFit fit_stencil(const Stencil& q) {
  StencilFit f;
  f.a0 = (q.plus_x + q.minus_x - 2.0 * q.center) / 2.0;
  f.b0 = (q.plus_x - q.minus_x) / 2.0;
  f.a1 = (q.plus_y + q.minus_y - 2.0 * q.center) / 2.0;
  f.b1 = (q.plus_y - q.minus_y) / 2.0;
  f.c = q.center;
  if (f.a0 <= defaults::quadfit_min_curvature || f.a1 <= defaults::quadfit_min_curvature) {
    f.failed = true;
    f.cost = q.center;
    return f;
  }
  f.v0 = -f.b0 / (2.0 * f.a0);
  f.v1 = -f.b1 / (2.0 * f.a1);
  if (std::abs(f.v0) > 1.0 || std::abs(f.v1) > 1.0) {
    f.failed = true;
    f.v0 = f.v1 = 0.0;
    f.cost = q.center;
    return f;
  }
  f.cost = f.a0 * f.v0 * f.v0 + f.b0 * f.v0 + f.c + f.a1 * f.v1 * f.v1 + f.b1 * f.v1;
  return f;
}

Stencil fit_stencil_backward(const Stencil& q, double d_v0, double d_v1, double d_cost) {
  const StencilFit f = fit_stencil(q);
  Stencil g;
  if (f.failed) return g;
  const double d_a0 = d_cost * f.v0 * f.v0 + d_v0 * f.b0 / (2.0 * f.a0 * f.a0);
  const double d_b0 = d_cost * f.v0 - d_v0 / (2.0 * f.a0);
  const double d_a1 = d_cost * f.v1 * f.v1 + d_v1 * f.b1 / (2.0 * f.a1 * f.a1);
  const double d_b1 = d_cost * f.v1 - d_v1 / (2.0 * f.a1);
  g.plus_x = 0.5 * d_a0 + 0.5 * d_b0;
  g.minus_x = 0.5 * d_a0 - 0.5 * d_b0;
  g.plus_y = 0.5 * d_a1 + 0.5 * d_b1;
  g.minus_y = 0.5 * d_a1 - 0.5 * d_b1;
  g.center = d_cost - d_a0 - d_a1;
  return g;
}

QuadFitResult quadfit_refine(const FeatureMap& psi0, const FeatureMap& psi1, const FlowField& ubar) {
  if (psi0.width() != psi1.width() || psi0.height() != psi1.height() || psi0.channels() != psi1.channels()) {
    fail(ErrorCode::DimMismatch, "feature maps differ in shape");
  }
  if (psi0.width() == 0 || psi0.height() == 0 || psi0.channels() == 0) {
    fail(ErrorCode::NonPositiveDims, "feature map has a zero dimension");
  }
  validate(psi0);
  validate(psi1);
  validate(ubar);
  const std::size_t w = psi0.width(), h = psi0.height();
  if (ubar.width() != w / 2 || ubar.height() != h / 2 || ubar.width() == 0 || ubar.height() == 0) {
    fail(ErrorCode::DimMismatch, "features must be at twice the resolution of the integer flow");
  }
  for (int i = 0; i < 2; ++i) {
    for (double v : ubar.channel(i).values()) {
      if (v != std::round(v)) fail(ErrorCode::OutOfRange, "integer flow holds a fractional value");
    }
  }

  QuadFitResult r;
  r.flow = FlowField(w, h);
  r.cost = ScalarMap(w, h, 1);
  r.failed = Mask(w, h, 0);
  r.stencil = Grid<Stencil>(w, h);
  r.anchor = Grid<std::array<int, 2>>(w, h, {0, 0});

  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t cy = std::min(y / 2, ubar.height() - 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t cx = std::min(x / 2, ubar.width() - 1);
      const long base0 = 2 * static_cast<long>(ubar.u0(cx, cy));
      const long base1 = 2 * static_cast<long>(ubar.u1(cx, cy));
      long best0 = base0, best1 = base1;
      double best = std::numeric_limits<double>::infinity();
      for (long o1 = 0; o1 < 2; ++o1) {
        for (long o0 = 0; o0 < 2; ++o0) {
          const long tx = static_cast<long>(x) + base0 + o0, ty = static_cast<long>(y) + base1 + o1;
          if (!inside(tx, ty, w, h)) continue;
          const double q = neg_corr(psi0, psi1, x, y, tx, ty);
          if (q < best) {
            best = q;
            best0 = base0 + o0;
            best1 = base1 + o1;
          }
        }
      }
      r.anchor(x, y) = {static_cast<int>(best0), static_cast<int>(best1)};
      r.flow.u0(x, y) = static_cast<double>(best0);
      r.flow.u1(x, y) = static_cast<double>(best1);
      if (!std::isfinite(best)) {
        r.failed(x, y) = 1;
        r.cost.at(x, y, 0) = defaults::oob_cost;
        continue;
      }
      Stencil s;
      bool complete = true;
      for (std::size_t k = 0; k < kStencilOffsets.size(); ++k) {
        const long tx = static_cast<long>(x) + best0 + kStencilOffsets[k][0];
        const long ty = static_cast<long>(y) + best1 + kStencilOffsets[k][1];
        if (!inside(tx, ty, w, h)) {
          complete = false;
          break;
        }
        stencil_entry(s, k) = neg_corr(psi0, psi1, x, y, tx, ty);
      }
      if (!complete) {
        s = Stencil{};
        s.center = best;
        r.stencil(x, y) = s;
        r.failed(x, y) = 1;
        r.cost.at(x, y, 0) = best;
        continue;
      }
      r.stencil(x, y) = s;
      const StencilFit fit = fit_stencil(s);
      r.cost.at(x, y, 0) = fit.cost;
      if (fit.failed) {
        r.failed(x, y) = 1;
        continue;
      }
      r.flow.u0(x, y) += fit.v0;
      r.flow.u1(x, y) += fit.v1;
    }
  }
  return r;
}

Grid<Stencil> quadfit_backward(const FlowField& d_flow, const ScalarMap& d_cost, const QuadFitResult& saved) {
  const std::size_t w = d_flow.width(), h = d_flow.height();
  check_saved(saved, w, h);
  if (d_cost.width() != w || d_cost.height() != h || d_cost.channels() != 1 || d_flow.u1.width() != w ||
      d_flow.u1.height() != h) {
    fail(ErrorCode::StoreMismatch, "gradient shapes do not match");
  }
  Grid<Stencil> d_q(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (saved.failed(x, y)) continue;
      d_q(x, y) = fit_stencil_backward(saved.stencil(x, y), d_flow.u0(x, y), d_flow.u1(x, y), d_cost.at(x, y, 0));
    }
  }
  return d_q;
}

FeatureGrads stencil_feature_backward(const Grid<Stencil>& d_q, const FeatureMap& psi0, const FeatureMap& psi1,
                                      const QuadFitResult& saved) {
  const std::size_t w = psi0.width(), h = psi0.height(), ch = psi0.channels();
  check_saved(saved, w, h);
  if (d_q.width() != w || d_q.height() != h || psi1.width() != w || psi1.height() != h || psi1.channels() != ch) {
    fail(ErrorCode::DimMismatch, "stencil gradients and feature maps differ in shape");
  }
  FeatureGrads g{FeatureMap(w, h, ch), FeatureMap(w, h, ch)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (saved.failed(x, y)) continue;
      Stencil dq = d_q(x, y);
      const auto anchor = saved.anchor(x, y);
      const auto a = psi0.pixel(x, y);
      auto da = g.d_psi0.pixel(x, y);
      for (std::size_t k = 0; k < kStencilOffsets.size(); ++k) {
        const double gk = stencil_entry(dq, k);
        if (gk == 0.0) continue;
        const auto tx = static_cast<std::size_t>(static_cast<long>(x) + anchor[0] + kStencilOffsets[k][0]);
        const auto ty = static_cast<std::size_t>(static_cast<long>(y) + anchor[1] + kStencilOffsets[k][1]);
        const auto b = psi1.pixel(tx, ty);
        auto db = g.d_psi1.pixel(tx, ty);
        for (std::size_t c = 0; c < ch; ++c) {
          da[c] -= gk * b[c];
          db[c] -= gk * a[c];
        }
      }
    }
  }
  return g;
}

}  // namespace varflow
