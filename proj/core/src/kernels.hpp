#pragma once

// Per-pixel stencil kernels shared by the solvers. Every loop writes only its
// own pixel, so the result does not depend on how rows are split across threads.

#include <cmath>
#include <cstddef>
#include <vector>

namespace varflow::detail {

inline constexpr std::ptrdiff_t kParallelPixels = 16384;

/// gx = u(x+1, y) - u(x, y) for x < w-1, gy likewise; zero on the far border.
template <typename Real>
void forward_diff(const Real* u, std::size_t w, std::size_t h, Real* gx, Real* gy) {
  const auto rows = static_cast<std::ptrdiff_t>(h);
#pragma omp parallel for schedule(static) if (static_cast<std::ptrdiff_t>(w) * rows >= kParallelPixels)
  for (std::ptrdiff_t y = 0; y < rows; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    const bool last_row = static_cast<std::size_t>(y) + 1 == h;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      gx[i] = x + 1 < w ? u[i + 1] - u[i] : Real(0);
      gy[i] = last_row ? Real(0) : u[i + w] - u[i];
    }
  }
}

/// out = D^T (px, py), the exact adjoint of forward_diff for arbitrary (px, py).
template <typename Real>
void forward_diff_adj(const Real* px, const Real* py, std::size_t w, std::size_t h, Real* out) {
  const auto rows = static_cast<std::ptrdiff_t>(h);
#pragma omp parallel for schedule(static) if (static_cast<std::ptrdiff_t>(w) * rows >= kParallelPixels)
  for (std::ptrdiff_t y = 0; y < rows; ++y) {
    const std::size_t yy = static_cast<std::size_t>(y);
    const std::size_t row = yy * w;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      Real acc = 0;
      if (x > 0) acc += px[i - 1];
      if (x + 1 < w) acc -= px[i];
      if (yy > 0) acc += py[i - w];
      if (yy + 1 < h) acc -= py[i];
      out[i] = acc;
    }
  }
}

/// Gradient of h_delta(sqrt(diag(a0, a1)) g) w.r.t. g for one pixel, i.e.
/// diag(a) g / max(1, |sqrt(a) g| / delta), along with the branch taken.
template <typename Real>
struct HuberPixel {
  Real norm;     // |sqrt(a) g|
  bool linear;   // norm / delta > 1
  Real p0, p1;
};

template <typename Real>
inline HuberPixel<Real> huber_grad(Real g0, Real g1, Real a0, Real a1, Real delta) {
  HuberPixel<Real> hp;
  hp.norm = std::sqrt(a0 * g0 * g0 + a1 * g1 * g1);
  const Real ratio = hp.norm / delta;
  hp.linear = ratio > Real(1);
  const Real scale = hp.linear ? ratio : Real(1);
  hp.p0 = a0 * g0 / scale;
  hp.p1 = a1 * g1 / scale;
  return hp;
}

/// Reverse of huber_grad for upstream dp: returns J^T dp in (r0, r1) and
/// adds dp . dP/da to (da0, da1).
template <typename Real>
inline void huber_grad_backward(const HuberPixel<Real>& hp, Real g0, Real g1, Real a0, Real a1,
                                Real delta, Real dp0, Real dp1, Real& r0, Real& r1, double& da0,
                                double& da1) {
  if (!hp.linear) {
    r0 = a0 * dp0;
    r1 = a1 * dp1;
    da0 += static_cast<double>(dp0) * g0;
    da1 += static_cast<double>(dp1) * g1;
    return;
  }
  const Real n = hp.norm;
  const Real kappa = delta / n;
  const Real n2 = n * n;
  const Real m = dp0 * a0 * g0 + dp1 * a1 * g1;
  r0 = kappa * (a0 * dp0 - a0 * g0 * m / n2);
  r1 = kappa * (a1 * dp1 - a1 * g1 * m / n2);
  const double kd = static_cast<double>(kappa);
  const double md = static_cast<double>(m) / (2.0 * static_cast<double>(n2));
  da0 += kd * (static_cast<double>(dp0) * g0 - md * g0 * g0);
  da1 += kd * (static_cast<double>(dp1) * g1 - md * g1 * g1);
}

template <typename Real>
std::vector<Real> to_real(const std::vector<double>& v) {
  return std::vector<Real>(v.begin(), v.end());
}

}  // namespace varflow::detail
