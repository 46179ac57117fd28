#include "varflow/diffops.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "kernels.hpp"

namespace varflow {

GradField grad(const Field& u) {
  GradField g{Field(u.width(), u.height()), Field(u.width(), u.height())};
  detail::forward_diff(u.data(), u.width(), u.height(), g.gx.data(), g.gy.data());
  return g;
}

Field grad_adj(const GradField& p) {
  require_same_shape(p.gx, p.gy, "gradient components");
  Field out(p.gx.width(), p.gx.height());
  detail::forward_diff_adj(p.gx.data(), p.gy.data(), out.width(), out.height(), out.data());
  return out;
}

TgvStack apply_B(const Field& u, const Field& w0, const Field& w1) {
  require_same_shape(u, w0, "u and w0");
  require_same_shape(u, w1, "u and w1");
  auto du = grad(u);
  auto dw0 = grad(w0);
  auto dw1 = grad(w1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    du.gx[i] -= w0[i];
    du.gy[i] -= w1[i];
  }
  return {std::move(du.gx), std::move(du.gy), std::move(dw0.gx), std::move(dw0.gy),
          std::move(dw1.gx), std::move(dw1.gy)};
}

TgvPrimal apply_B_adj(const TgvStack& s) {
  for (const Field* f : {&s.ay, &s.b0x, &s.b0y, &s.b1x, &s.b1y}) require_same_shape(s.ax, *f, "stack channels");
  TgvPrimal out{grad_adj({s.ax, s.ay}), grad_adj({s.b0x, s.b0y}), grad_adj({s.b1x, s.b1y})};
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.w0[i] -= s.ax[i];
    out.w1[i] -= s.ay[i];
  }
  return out;
}

double huber(double x0, double x1, double delta) {
  if (!(delta > 0.0)) fail(ErrorCode::NonPositiveDelta, "Huber delta must be positive");
  const double norm = std::hypot(x0, x1);
  if (norm <= delta) return 0.5 * norm * norm + 0.5 * delta * delta;
  return delta * norm;
}

double spectral_norm(const LinearMap& op, std::size_t iters) {
  if (iters == 0) fail(ErrorCode::IterBudgetZero, "power iteration needs at least one iteration");
  if (op.in_dim == 0) return 0.0;
  std::vector<double> x(op.in_dim), y(op.out_dim), z(op.in_dim);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : x) v = dist(rng);

  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    s = std::sqrt(s);
    if (s == 0.0) return false;
    for (double& e : v) e /= s;
    return true;
  };
  normalize(x);
  double estimate = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    op.apply(x, y);
    double rayleigh = 0.0;  // <x, A^T A x> = |A x|^2 for unit x
    for (double e : y) rayleigh += e * e;
    estimate = rayleigh;
    op.apply_adjoint(y, z);
    x.swap(z);
    if (!normalize(x)) return 0.0;
  }
  return estimate;
}

LinearMap weighted_grad_map(const DiffusionTensor& tensor) {
  const std::size_t w = tensor.width(), h = tensor.height(), n = w * h;
  std::vector<double> s0(n), s1(n);
  for (std::size_t i = 0; i < n; ++i) {
    s0[i] = std::sqrt(tensor.w0[i]);
    s1[i] = std::sqrt(tensor.w1[i]);
  }
  LinearMap m;
  m.in_dim = n;
  m.out_dim = 2 * n;
  m.apply = [=](std::span<const double> in, std::span<double> out) {
    detail::forward_diff(in.data(), w, h, out.data(), out.data() + n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] *= s0[i];
      out[n + i] *= s1[i];
    }
  };
  m.apply_adjoint = [=](std::span<const double> in, std::span<double> out) {
    std::vector<double> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = s0[i] * in[i];
      py[i] = s1[i] * in[n + i];
    }
    detail::forward_diff_adj(px.data(), py.data(), w, h, out.data());
  };
  return m;
}

LinearMap weighted_tgv_map(const DiffusionTensor& tensor, double beta) {
  const std::size_t w = tensor.width(), h = tensor.height(), n = w * h;
  std::vector<double> s0(n), s1(n);
  for (std::size_t i = 0; i < n; ++i) {
    s0[i] = std::sqrt(tensor.w0[i]);
    s1[i] = std::sqrt(tensor.w1[i]);
  }
  const double sb = std::sqrt(beta);
  LinearMap m;
  m.in_dim = 3 * n;
  m.out_dim = 6 * n;
  m.apply = [=](std::span<const double> in, std::span<double> out) {
    const double* u = in.data();
    const double* w0 = u + n;
    const double* w1 = w0 + n;
    detail::forward_diff(u, w, h, out.data(), out.data() + n);
    detail::forward_diff(w0, w, h, out.data() + 2 * n, out.data() + 3 * n);
    detail::forward_diff(w1, w, h, out.data() + 4 * n, out.data() + 5 * n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = s0[i] * (out[i] - w0[i]);
      out[n + i] = s1[i] * (out[n + i] - w1[i]);
    }
    for (std::size_t i = 2 * n; i < 6 * n; ++i) out[i] *= sb;
  };
  m.apply_adjoint = [=](std::span<const double> in, std::span<double> out) {
    std::vector<double> ax(n), ay(n), b(4 * n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] = s0[i] * in[i];
      ay[i] = s1[i] * in[n + i];
    }
    for (std::size_t i = 0; i < 4 * n; ++i) b[i] = sb * in[2 * n + i];
    detail::forward_diff_adj(ax.data(), ay.data(), w, h, out.data());
    detail::forward_diff_adj(b.data(), b.data() + n, w, h, out.data() + n);
    detail::forward_diff_adj(b.data() + 2 * n, b.data() + 3 * n, w, h, out.data() + 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      out[n + i] -= ax[i];
      out[2 * n + i] -= ay[i];
    }
  };
  return m;
}

}  // namespace varflow
