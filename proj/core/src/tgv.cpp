#include "varflow/tgv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "convert.hpp"
#include "kernels.hpp"
#include "unrolled.hpp"
#include "varflow/diffops.hpp"

namespace varflow {
namespace {

using detail::kParallelPixels;

/// Isotropic Huber group: weight * b / max(1, sqrt(ell) |b| / delta).
template <typename Real>
struct IsoPixel {
  Real norm;
  bool linear;
  Real p0, p1;
};

template <typename Real>
inline IsoPixel<Real> iso_grad(Real b0, Real b1, Real weight, Real sqrt_ell, Real delta) {
  IsoPixel<Real> ip;
  ip.norm = sqrt_ell * std::sqrt(b0 * b0 + b1 * b1);
  const Real ratio = ip.norm / delta;
  ip.linear = ratio > Real(1);
  const Real scale = ip.linear ? ratio : Real(1);
  ip.p0 = weight * b0 / scale;
  ip.p1 = weight * b1 / scale;
  return ip;
}

template <typename Real>
inline void iso_grad_backward(const IsoPixel<Real>& ip, Real b0, Real b1, Real weight, Real ell, Real delta,
                              Real dp0, Real dp1, Real& r0, Real& r1, double& d_weight, double& d_ell) {
  const Real m = dp0 * b0 + dp1 * b1;
  if (!ip.linear) {
    r0 = weight * dp0;
    r1 = weight * dp1;
    d_weight += static_cast<double>(m);
    return;
  }
  const Real kappa = delta / ip.norm;
  const Real bb = b0 * b0 + b1 * b1;
  r0 = weight * kappa * (dp0 - b0 * m / bb);
  r1 = weight * kappa * (dp1 - b1 * m / bb);
  d_weight += static_cast<double>(kappa) * m;
  d_ell += -0.5 * static_cast<double>(weight) * kappa * m / static_cast<double>(ell);
}

template <typename RealT>
class TgvEngine {
 public:
  using Real = RealT;
  static constexpr std::size_t kVars = 3;
  using V = detail::Vars<Real, kVars>;

  struct Accum {
    std::vector<double> d_uhat, d_c, d_w0, d_w1, d_beta, d_ell;
  };

  TgvEngine(const Field& uhat, const Field& c, const VWeights& vw, double delta)
      : w_(uhat.width()),
        h_(uhat.height()),
        uhat_(detail::to_vec<Real>(uhat)),
        c_(detail::to_vec<Real>(c)),
        a0_(detail::to_vec<Real>(vw.w0)),
        a1_(detail::to_vec<Real>(vw.w1)),
        beta_(static_cast<Real>(vw.beta_scaled)),
        ell_(static_cast<Real>(vw.unit_scaled)),
        sqrt_ell_(std::sqrt(static_cast<Real>(vw.unit_scaled))),
        delta_(static_cast<Real>(delta)) {
    const std::size_t n = w_ * h_;
    for (auto* buf : {&ax_, &ay_, &b0x_, &b0y_, &b1x_, &b1y_, &pax_, &pay_, &p0x_, &p0y_, &p1x_, &p1y_,
                      &du_, &d0_, &d1_, &uhalf_, &wn0_, &wn1_, &duh_, &ex_, &ey_, &e0x_, &e0y_, &e1x_, &e1y_}) {
      buf->assign(n, Real(0));
    }
    regime_.assign(n, 0);
  }

  void set_trace(std::vector<std::uint8_t>* trace) { trace_ = trace; }

  Accum make_accum() const {
    const std::size_t n = w_ * h_;
    return {std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
            std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  }

  void step(const V& prim, const V& extrap, Real gamma, V& prim_next, V& extrap_next) {
    smooth(extrap);
    for (std::size_t v = 0; v < kVars; ++v) {
      prim_next[v].resize(size());
      extrap_next[v].resize(size());
    }
    const auto n = static_cast<std::ptrdiff_t>(size());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Real uh = uhalf_[i];
      Real next;
      switch (prox_branch(uh, uhat_[i], c_[i])) {
        case ProxBranch::shrink_down: next = uh - c_[i]; break;
        case ProxBranch::shrink_up: next = uh + c_[i]; break;
        default: next = uhat_[i]; break;
      }
      prim_next[0][i] = next;
      prim_next[1][i] = wn0_[i];
      prim_next[2][i] = wn1_[i];
      extrap_next[0][i] = next + gamma * (next - prim[0][i]);
      extrap_next[1][i] = wn0_[i] + gamma * (wn0_[i] - prim[1][i]);
      extrap_next[2][i] = wn1_[i] + gamma * (wn1_[i] - prim[2][i]);
    }
    if (trace_) {
      for (std::size_t i = 0; i < size(); ++i) {
        trace_->push_back(
            static_cast<std::uint8_t>(regime_[i] | static_cast<std::uint8_t>(prox_branch(uhalf_[i], uhat_[i], c_[i]))));
      }
    }
  }

  void step_backward(const V& extrap, const V& d_next, V& d_extrap, Accum& acc) {
    smooth(extrap);
    const Real* du = d_next[0].data();
    const Real* dw0 = d_next[1].data();
    const Real* dw1 = d_next[2].data();
    const auto n = static_cast<std::ptrdiff_t>(size());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      switch (prox_branch(uhalf_[i], uhat_[i], c_[i])) {
        case ProxBranch::shrink_down:
          duh_[i] = du[i];
          acc.d_c[i] -= du[i];
          break;
        case ProxBranch::shrink_up:
          duh_[i] = du[i];
          acc.d_c[i] += du[i];
          break;
        default:
          duh_[i] = Real(0);
          acc.d_uhat[i] += du[i];
          break;
      }
    }
    // dP = -B dY with dY = (du_half, dw0, dw1).
    detail::forward_diff(duh_.data(), w_, h_, ex_.data(), ey_.data());
    detail::forward_diff(dw0, w_, h_, e0x_.data(), e0y_.data());
    detail::forward_diff(dw1, w_, h_, e1x_.data(), e1y_.data());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto ga = detail::huber_grad(ax_[i], ay_[i], a0_[i], a1_[i], delta_);
      Real r0, r1;
      detail::huber_grad_backward(ga, ax_[i], ay_[i], a0_[i], a1_[i], delta_, dw0[i] - ex_[i], dw1[i] - ey_[i], r0,
                                  r1, acc.d_w0[i], acc.d_w1[i]);
      pax_[i] = r0;
      pay_[i] = r1;
      const auto g0 = iso_grad(b0x_[i], b0y_[i], beta_, sqrt_ell_, delta_);
      iso_grad_backward(g0, b0x_[i], b0y_[i], beta_, ell_, delta_, -e0x_[i], -e0y_[i], r0, r1, acc.d_beta[i],
                        acc.d_ell[i]);
      p0x_[i] = r0;
      p0y_[i] = r1;
      const auto g1 = iso_grad(b1x_[i], b1y_[i], beta_, sqrt_ell_, delta_);
      iso_grad_backward(g1, b1x_[i], b1y_[i], beta_, ell_, delta_, -e1x_[i], -e1y_[i], r0, r1, acc.d_beta[i],
                        acc.d_ell[i]);
      p1x_[i] = r0;
      p1y_[i] = r1;
    }
    // dZ = dY + B^T r.
    detail::forward_diff_adj(pax_.data(), pay_.data(), w_, h_, du_.data());
    detail::forward_diff_adj(p0x_.data(), p0y_.data(), w_, h_, d0_.data());
    detail::forward_diff_adj(p1x_.data(), p1y_.data(), w_, h_, d1_.data());
    for (auto& d : d_extrap) d.resize(size());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      d_extrap[0][i] = duh_[i] + du_[i];
      d_extrap[1][i] = dw0[i] - pax_[i] + d0_[i];
      d_extrap[2][i] = dw1[i] - pay_[i] + d1_[i];
    }
  }

 private:
  std::size_t size() const { return w_ * h_; }

  /// (u_half, w^{k+1}) = (v, q) - B^T P(B (v, q)); keeps B (v, q) in the a/b buffers.
  void smooth(const V& extrap) {
    const Real* v = extrap[0].data();
    const Real* q0 = extrap[1].data();
    const Real* q1 = extrap[2].data();
    detail::forward_diff(v, w_, h_, ax_.data(), ay_.data());
    detail::forward_diff(q0, w_, h_, b0x_.data(), b0y_.data());
    detail::forward_diff(q1, w_, h_, b1x_.data(), b1y_.data());
    const auto n = static_cast<std::ptrdiff_t>(size());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      ax_[i] -= q0[i];
      ay_[i] -= q1[i];
      const auto ga = detail::huber_grad(ax_[i], ay_[i], a0_[i], a1_[i], delta_);
      pax_[i] = ga.p0;
      pay_[i] = ga.p1;
      const auto g0 = iso_grad(b0x_[i], b0y_[i], beta_, sqrt_ell_, delta_);
      p0x_[i] = g0.p0;
      p0y_[i] = g0.p1;
      const auto g1 = iso_grad(b1x_[i], b1y_[i], beta_, sqrt_ell_, delta_);
      p1x_[i] = g1.p0;
      p1y_[i] = g1.p1;
      regime_[i] = static_cast<std::uint8_t>((ga.linear ? 4 : 0) | (g0.linear ? 8 : 0) | (g1.linear ? 16 : 0));
    }
    detail::forward_diff_adj(pax_.data(), pay_.data(), w_, h_, du_.data());
    detail::forward_diff_adj(p0x_.data(), p0y_.data(), w_, h_, d0_.data());
    detail::forward_diff_adj(p1x_.data(), p1y_.data(), w_, h_, d1_.data());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      uhalf_[i] = v[i] - du_[i];
      wn0_[i] = q0[i] + pax_[i] - d0_[i];
      wn1_[i] = q1[i] + pay_[i] - d1_[i];
    }
  }

  std::size_t w_, h_;
  std::vector<Real> uhat_, c_, a0_, a1_;
  Real beta_, ell_, sqrt_ell_, delta_;
  std::vector<Real> ax_, ay_, b0x_, b0y_, b1x_, b1y_, pax_, pay_, p0x_, p0y_, p1x_, p1y_, du_, d0_, d1_;
  std::vector<Real> uhalf_, wn0_, wn1_, duh_, ex_, ey_, e0x_, e0y_, e1x_, e1y_;
  std::vector<std::uint8_t> regime_;
  std::vector<std::uint8_t>* trace_ = nullptr;
};

void check_inputs(const Field& uhat, const Field& c, const DiffusionTensor& tensor, double beta) {
  if (uhat.empty()) fail(ErrorCode::NonPositiveDims, "solver input has a zero dimension");
  require_same_shape(uhat, c, "uhat and c");
  require_same_shape(uhat, tensor.w0, "uhat and W");
  require_same_shape(uhat, tensor.w1, "uhat and W");
  require_finite(uhat, "uhat");
  require_finite(c, "c");
  require_finite(tensor.w0, "W");
  require_finite(tensor.w1, "W");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] < 0.0 || tensor.w0[i] < 0.0 || tensor.w1[i] < 0.0) {
      fail(ErrorCode::OutOfRange, "c and W must be nonnegative");
    }
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorCode::NonPositiveValue, "beta must be positive");
}

TgvState make_state(const detail::Snapshot<double, 3>& s, std::size_t w, std::size_t h,
                    const std::vector<double>& t) {
  return TgvState{detail::to_field(s.prim[0], w, h),   detail::to_field(s.prim[1], w, h),
                  detail::to_field(s.prim[2], w, h),   detail::to_field(s.extrap[0], w, h),
                  detail::to_field(s.extrap[1], w, h), detail::to_field(s.extrap[2], w, h),
                  s.k,
                  s.k == 0 ? 1.0 : t[s.k - 1],
                  t[s.k]};
}

template <typename Real>
TgvResult forward_impl(const Field& uhat, const Field& c, const DiffusionTensor& tensor, double beta,
                       const Field& u0, const Field& w0, const Field& w1, const SolverConfig& config,
                       std::vector<std::uint8_t>* trace) {
  const std::size_t w = uhat.width(), h = uhat.height();
  TgvEngine<Real> engine(uhat, c, VWeights::fold(tensor, beta), config.delta);
  engine.set_trace(trace);
  const auto t = fista_t_sequence(config.iters);
  const auto indices = checkpoint_indices(config.iters, config.checkpoint);

  TgvResult result;
  auto& store = result.store;
  store.iters = config.iters;
  store.width = w;
  store.height = h;
  store.mode = config.checkpoint;
  store.precision = config.precision;
  store.segment_len = config.checkpoint == CheckpointMode::full
                          ? 1
                          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(config.iters))));
  store.states.reserve(indices.size());

  detail::Vars<Real, 3> init{detail::to_vec<Real>(u0), detail::to_vec<Real>(w0), detail::to_vec<Real>(w1)};
  const auto fin = detail::unrolled_forward(
      engine, init, config.iters, fista_momentum(config.iters), indices, [&](const detail::Snapshot<Real, 3>& s) {
        detail::Snapshot<double, 3> d{s.k, {}, {}};
        for (std::size_t v = 0; v < 3; ++v) {
          d.prim[v].assign(s.prim[v].begin(), s.prim[v].end());
          d.extrap[v].assign(s.extrap[v].begin(), s.extrap[v].end());
        }
        store.states.push_back(make_state(d, w, h, t));
      });
  result.u = detail::to_field(fin[0], w, h);
  result.w0 = detail::to_field(fin[1], w, h);
  result.w1 = detail::to_field(fin[2], w, h);
  return result;
}

template <typename Real>
TgvGradients backward_impl(const Field& d_uK, const Field& d_w0K, const Field& d_w1K,
                           const CheckpointStore<TgvState>& store, const Field& uhat, const Field& c,
                           const DiffusionTensor& tensor, double beta, const SolverConfig& config,
                           ReplayStats* stats) {
  const std::size_t w = uhat.width(), h = uhat.height(), n = w * h;
  const auto vw = VWeights::fold(tensor, beta);
  TgvEngine<Real> engine(uhat, c, vw, config.delta);
  auto acc = engine.make_accum();
  std::vector<detail::Snapshot<Real, 3>> snaps;
  snaps.reserve(store.states.size());
  for (const auto& s : store.states) {
    snaps.push_back({s.k,
                     {detail::to_vec<Real>(s.u), detail::to_vec<Real>(s.w0), detail::to_vec<Real>(s.w1)},
                     {detail::to_vec<Real>(s.v), detail::to_vec<Real>(s.q0), detail::to_vec<Real>(s.q1)}});
  }
  detail::Vars<Real, 3> d_final{detail::to_vec<Real>(d_uK), detail::to_vec<Real>(d_w0K),
                                detail::to_vec<Real>(d_w1K)};
  const auto d_init =
      detail::unrolled_backward(engine, snaps, store.iters, fista_momentum(store.iters), d_final, acc, stats);

  // Undo the folding W' = W / L, beta' = beta / L, ell = 1 / L, where L may
  // itself depend on beta.
  const double lip = vw.lipschitz;
  double sum_beta = 0.0, sum_ell = 0.0, sum_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_beta += acc.d_beta[i];
    sum_ell += acc.d_ell[i];
    sum_w += acc.d_w0[i] * tensor.w0[i] + acc.d_w1[i] * tensor.w1[i];
  }
  const double d_lip = -(sum_w + sum_beta * beta + sum_ell) / (lip * lip);
  const double dlip_dbeta = defaults::tgv_lipschitz_beta_slope * beta > defaults::tgv_lipschitz_floor
                                ? defaults::tgv_lipschitz_beta_slope
                                : 0.0;

  TgvGradients g;
  g.d_uhat = detail::to_field(acc.d_uhat, w, h, 1.0);
  g.d_c = detail::to_field(acc.d_c, w, h, 1.0);
  g.d_W = {detail::to_field(acc.d_w0, w, h, 1.0 / lip), detail::to_field(acc.d_w1, w, h, 1.0 / lip)};
  g.d_beta = sum_beta / lip + d_lip * dlip_dbeta;
  g.d_u0 = detail::to_field(d_init[0], w, h);
  g.d_w0_0 = detail::to_field(d_init[1], w, h);
  g.d_w1_0 = detail::to_field(d_init[2], w, h);
  return g;
}

void check_store(const CheckpointStore<TgvState>& store, const Field& uhat, const SolverConfig& config) {
  if (store.states.empty() || store.iters == 0) fail(ErrorCode::StoreMismatch, "checkpoint store is empty");
  if (store.iters != config.iters || store.precision != config.precision) {
    fail(ErrorCode::StoreMismatch, "checkpoint store was produced with a different configuration");
  }
  if (store.width != uhat.width() || store.height != uhat.height()) {
    fail(ErrorCode::StoreMismatch, "checkpoint store shape differs from the inputs");
  }
  if (store.states.front().k != 0) fail(ErrorCode::StoreMismatch, "first checkpoint must be iteration 0");
  for (std::size_t i = 0; i < store.states.size(); ++i) {
    const auto& s = store.states[i];
    for (const Field* f : {&s.u, &s.w0, &s.w1, &s.v, &s.q0, &s.q1}) {
      if (!f->same_shape(uhat)) fail(ErrorCode::StoreMismatch, "checkpoint field shape");
    }
    if (s.k >= store.iters || (i > 0 && s.k <= store.states[i - 1].k)) {
      fail(ErrorCode::StoreMismatch, "checkpoint indices must increase and stay below K");
    }
  }
}

double tgv_terms(const Field& u, const Field& w0, const Field& w1, const Field& uhat, const Field& c,
                 const DiffusionTensor& tensor, double beta, double delta, double lip) {
  require_same_shape(u, w0, "u and w0");
  require_same_shape(u, w1, "u and w1");
  require_same_shape(u, uhat, "u and uhat");
  require_same_shape(u, c, "u and c");
  require_same_shape(u, tensor.w0, "u and W");
  require_same_shape(u, tensor.w1, "u and W");
  const auto s = apply_B(u, w0, w1);
  const double inv_sqrt_l = 1.0 / std::sqrt(lip);
  double energy = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    energy += huber(std::sqrt(tensor.w0[i] / lip) * s.ax[i], std::sqrt(tensor.w1[i] / lip) * s.ay[i], delta);
    energy += beta * (huber(inv_sqrt_l * s.b0x[i], inv_sqrt_l * s.b0y[i], delta) +
                      huber(inv_sqrt_l * s.b1x[i], inv_sqrt_l * s.b1y[i], delta));
    energy += c[i] * std::abs(u[i] - uhat[i]);
  }
  return energy;
}

}  // namespace

double tgv_lipschitz(double beta) {
  return std::max(defaults::tgv_lipschitz_floor, defaults::tgv_lipschitz_beta_slope * beta);
}

VWeights VWeights::fold(const DiffusionTensor& tensor, double beta) {
  if (!(beta > 0.0)) fail(ErrorCode::NonPositiveValue, "beta must be positive");
  VWeights vw;
  vw.beta = beta;
  vw.lipschitz = tgv_lipschitz(beta);
  vw.w0 = tensor.w0;
  vw.w1 = tensor.w1;
  for (double& v : vw.w0.values()) v /= vw.lipschitz;
  for (double& v : vw.w1.values()) v /= vw.lipschitz;
  vw.beta_scaled = beta / vw.lipschitz;
  vw.unit_scaled = 1.0 / vw.lipschitz;
  return vw;
}

TgvState tgv_step(const TgvState& state, const Field& uhat, const Field& c, const VWeights& weights,
                  double delta) {
  check_inputs(uhat, c, DiffusionTensor(weights.w0, weights.w1), weights.beta);
  for (const Field* f : {&state.u, &state.w0, &state.w1, &state.v, &state.q0, &state.q1}) {
    require_same_shape(*f, uhat, "state and uhat");
  }
  if (!(delta > 0.0)) fail(ErrorCode::NonPositiveDelta, "Huber delta must be positive");
  TgvEngine<double> engine(uhat, c, weights, delta);
  const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * state.t_cur * state.t_cur)) / 2.0;
  const double gamma = (state.t_cur - 1.0) / t_next;
  detail::Vars<double, 3> prim{detail::to_vec<double>(state.u), detail::to_vec<double>(state.w0),
                               detail::to_vec<double>(state.w1)};
  detail::Vars<double, 3> extrap{detail::to_vec<double>(state.v), detail::to_vec<double>(state.q0),
                                 detail::to_vec<double>(state.q1)};
  detail::Vars<double, 3> prim_next, extrap_next;
  engine.step(prim, extrap, gamma, prim_next, extrap_next);
  detail::require_finite(prim_next, "tgv_step", state.k);
  detail::require_finite(extrap_next, "tgv_step", state.k);
  const std::size_t w = uhat.width(), h = uhat.height();
  TgvState out;
  out.u = detail::to_field(prim_next[0], w, h);
  out.w0 = detail::to_field(prim_next[1], w, h);
  out.w1 = detail::to_field(prim_next[2], w, h);
  out.v = detail::to_field(extrap_next[0], w, h);
  out.q0 = detail::to_field(extrap_next[1], w, h);
  out.q1 = detail::to_field(extrap_next[2], w, h);
  out.k = state.k + 1;
  out.t_prev = state.t_cur;
  out.t_cur = t_next;
  return out;
}

TgvResult tgv_forward(const Field& uhat, const Field& c, const DiffusionTensor& tensor, double beta,
                      const Field& u0, const Field& w0_init, const Field& w1_init, const SolverConfig& config,
                      std::vector<std::uint8_t>* branch_trace) {
  config.validate();
  check_inputs(uhat, c, tensor, beta);
  for (const Field* f : {&u0, &w0_init, &w1_init}) {
    require_same_shape(uhat, *f, "initial iterate");
    require_finite(*f, "initial iterate");
  }
  if (branch_trace) branch_trace->clear();
  return config.precision == Precision::f64
             ? forward_impl<double>(uhat, c, tensor, beta, u0, w0_init, w1_init, config, branch_trace)
             : forward_impl<float>(uhat, c, tensor, beta, u0, w0_init, w1_init, config, branch_trace);
}

TgvGradients tgv_backward(const Field& d_uK, const Field& d_w0K, const Field& d_w1K,
                          const CheckpointStore<TgvState>& store, const Field& uhat, const Field& c,
                          const DiffusionTensor& tensor, double beta, const SolverConfig& config,
                          ReplayStats* stats) {
  config.validate();
  check_inputs(uhat, c, tensor, beta);
  for (const Field* f : {&d_uK, &d_w0K, &d_w1K}) {
    require_same_shape(uhat, *f, "output gradient");
    require_finite(*f, "output gradient");
  }
  check_store(store, uhat, config);
  return store.precision == Precision::f64
             ? backward_impl<double>(d_uK, d_w0K, d_w1K, store, uhat, c, tensor, beta, config, stats)
             : backward_impl<float>(d_uK, d_w0K, d_w1K, store, uhat, c, tensor, beta, config, stats);
}

double tgv_energy(const Field& u, const Field& w0, const Field& w1, const Field& uhat, const Field& c,
                  const DiffusionTensor& tensor, double beta, double delta) {
  return tgv_terms(u, w0, w1, uhat, c, tensor, beta, delta, 1.0);
}

double tgv_objective(const Field& u, const Field& w0, const Field& w1, const Field& uhat, const Field& c,
                     const DiffusionTensor& tensor, double beta, double delta) {
  return tgv_terms(u, w0, w1, uhat, c, tensor, beta, delta, tgv_lipschitz(beta));
}

}  // namespace varflow
