#include "varflow/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varflow {
namespace {

void require_same_map_shape(const ScalarMap& a, const ScalarMap& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    fail(ErrorCode::DimMismatch, std::string(what) + " differ in shape");
  }
}

void require_flow_shape(const FlowField& f, std::size_t w, std::size_t h, const char* what) {
  if (f.u0.width() != w || f.u0.height() != h || f.u1.width() != w || f.u1.height() != h) {
    fail(ErrorCode::DimMismatch, std::string(what) + " differs in shape");
  }
}

double bilinear(const Field& f, double x, double y) {
  const std::size_t w = f.width(), h = f.height();
  const auto x0 = static_cast<std::size_t>(std::floor(x));
  const auto y0 = static_cast<std::size_t>(std::floor(y));
  const std::size_t x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
  const double top = (1.0 - fx) * f(x0, y0) + fx * f(x1, y0);
  const double bottom = (1.0 - fx) * f(x0, y1) + fx * f(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

}  // namespace

ScalarMap fwd_bwd_distance(const FlowField& ubar, const FlowField& ubar_bw) {
  validate(ubar);
  validate(ubar_bw);
  const std::size_t w = ubar.width(), h = ubar.height();
  require_flow_shape(ubar_bw, w, h, "backward flow");
  ScalarMap out(w, h, 1);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double tx = static_cast<double>(x) + ubar.u0(x, y);
      const double ty = static_cast<double>(y) + ubar.u1(x, y);
      if (tx < 0.0 || ty < 0.0 || tx > static_cast<double>(w - 1) || ty > static_cast<double>(h - 1)) {
        out.at(x, y, 0) = defaults::oob_distance;
        continue;
      }
      const double e0 = ubar.u0(x, y) - bilinear(ubar_bw.u0, tx, ty);
      const double e1 = ubar.u1(x, y) - bilinear(ubar_bw.u1, tx, ty);
      out.at(x, y, 0) = std::hypot(e0, e1);
    }
  }
  return out;
}

ScalarMap boundary_distance(const FlowField& uhat) {
  validate(uhat);
  const std::size_t w = uhat.width(), h = uhat.height();
  const double n = static_cast<double>(w), m = static_cast<double>(h);
  ScalarMap out(w, h, 1);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double px = static_cast<double>(x) + uhat.u0(x, y);
      const double py = static_cast<double>(y) + uhat.u1(x, y);
      out.at(x, y, 0) = std::max(0.0, std::min({px, py, n - px, m - py}));
    }
  }
  return out;
}

ScalarMap nonmin_suppress(const ScalarMap& conf) {
  validate(conf);
  const std::size_t w = conf.width(), h = conf.height(), ch = conf.channels();
  ScalarMap out(w, h, ch);
  for (std::size_t by = 0; by < h; by += 2) {
    for (std::size_t bx = 0; bx < w; bx += 2) {
      for (std::size_t c = 0; c < ch; ++c) {
        std::size_t kx = bx, ky = by;
        double best = conf.at(bx, by, c);
        for (std::size_t y = by; y < std::min(by + 2, h); ++y) {
          for (std::size_t x = bx; x < std::min(bx + 2, w); ++x) {
            if (conf.at(x, y, c) > best) {
              best = conf.at(x, y, c);
              kx = x;
              ky = y;
            }
          }
        }
        out.at(kx, ky, c) = best;
      }
    }
  }
  return out;
}

DiffusionTensor edge_tensor(const ScalarMap& image, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorCode::NonPositiveGamma, "gamma must be positive");
  validate(image);
  if (image.channels() != 1) fail(ErrorCode::DimMismatch, "edge tensor expects a single-channel image");
  const std::size_t w = image.width(), h = image.height();
  DiffusionTensor t = DiffusionTensor::uniform(w, h, 1.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (x + 1 < w) t.w0(x, y) = std::exp(-gamma * std::abs(image.at(x + 1, y, 0) - image.at(x, y, 0)));
      if (y + 1 < h) t.w1(x, y) = std::exp(-gamma * std::abs(image.at(x, y + 1, 0) - image.at(x, y, 0)));
    }
  }
  return t;
}

ScalarMap prob_at_flow(const ScalarMap& prob0, const ScalarMap& prob1, const FlowField& ubar, std::size_t factor) {
  if (factor == 0) fail(ErrorCode::NonPositiveValue, "upsampling factor must be positive");
  require_same_map_shape(prob0, prob1, "probability maps");
  if (prob0.channels() != prob1.channels() || prob0.channels() == 0 || prob0.channels() % 2 != 0) {
    fail(ErrorCode::DimMismatch, "probability maps need 2d channels");
  }
  const std::size_t cw = prob0.width(), ch = prob0.height();
  require_flow_shape(ubar, cw, ch, "integer flow");
  const long d = static_cast<long>(prob0.channels() / 2);
  const std::size_t w = cw * factor, h = ch * factor;
  ScalarMap out(w, h, 2);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t cx = x / factor, cy = y / factor;
      for (int i = 0; i < 2; ++i) {
        const long slot = std::lround(ubar.channel(i)(cx, cy)) + d;
        const ScalarMap& p = i == 0 ? prob0 : prob1;
        out.at(x, y, static_cast<std::size_t>(i)) =
            slot >= 0 && slot < 2 * d ? p.at(cx, cy, static_cast<std::size_t>(slot)) : 0.0;
      }
    }
  }
  return out;
}

ConfidenceMap baseline_confidence(const ConfidenceFeatures& features) {
  const auto& prob = features.prob;
  const auto& fb = features.fb_dist;
  require_same_map_shape(prob, fb, "probability and distance maps");
  if (prob.channels() != 2 || fb.channels() != 1) fail(ErrorCode::DimMismatch, "unexpected feature channels");
  ScalarMap raw(prob.width(), prob.height(), 1);
  for (std::size_t y = 0; y < prob.height(); ++y) {
    for (std::size_t x = 0; x < prob.width(); ++x) {
      raw.at(x, y, 0) = std::exp(-fb.at(x, y, 0)) * prob.at(x, y, 0) * prob.at(x, y, 1);
    }
  }
  return ConfidenceMap(nonmin_suppress(raw).channel_field(0));
}

double loss_cor(const ScalarMap& prob0, const ScalarMap& prob1, const FlowField& uhat, const FlowField& ustar,
                const Mask& valid, double alpha, double eps) {
  require_same_map_shape(prob0, prob1, "probability maps");
  if (prob0.channels() != prob1.channels() || prob0.channels() == 0 || prob0.channels() % 2 != 0) {
    fail(ErrorCode::DimMismatch, "probability maps need 2d channels");
  }
  const std::size_t w = prob0.width(), h = prob0.height();
  require_flow_shape(uhat, w, h, "estimated flow");
  require_flow_shape(ustar, w, h, "ground-truth flow");
  if (valid.width() != w || valid.height() != h) fail(ErrorCode::DimMismatch, "valid mask differs in shape");
  if (!(eps > 0.0)) fail(ErrorCode::NonPositiveDelta, "epsilon must be positive");
  validate(uhat);
  validate(ustar);
  for (const ScalarMap* p : {&prob0, &prob1}) {
    for (double v : p->values()) {
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::ProbOutOfRange, "probability outside [0, 1]");
    }
  }
  const long d = static_cast<long>(prob0.channels() / 2);
  const double floor = 0.5 * eps * eps;
  double loss = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!valid(x, y)) continue;
      for (int i = 0; i < 2; ++i) {
        const long slot = std::lround(ustar.channel(i)(x, y)) + d;
        if (slot < 0 || slot >= 2 * d) continue;
        const double p = (i == 0 ? prob0 : prob1).at(x, y, static_cast<std::size_t>(slot));
        loss -= std::log(std::max(p, std::numeric_limits<double>::min()));
      }
      const double e0 = uhat.u0(x, y) - ustar.u0(x, y), e1 = uhat.u1(x, y) - ustar.u1(x, y);
      const double norm = std::hypot(e0, e1);
      const double hub = norm <= eps ? 0.5 * norm * norm + floor : eps * norm;
      loss += alpha * std::min(1.0, hub - floor);
    }
  }
  return loss;
}

}  // namespace varflow
