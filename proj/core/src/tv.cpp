#include "varflow/tv.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "convert.hpp"
#include "kernels.hpp"
#include "unrolled.hpp"
#include "varflow/diffops.hpp"

namespace varflow {
namespace {

using detail::kParallelPixels;

template <typename RealT>
class TvEngine {
 public:
  using Real = RealT;
  static constexpr std::size_t kVars = 1;
  using V = detail::Vars<Real, kVars>;

  struct Accum {
    std::vector<double> d_uhat, d_c, d_w0, d_w1;
  };

  TvEngine(const Field& uhat, const Field& c, const DiffusionTensor& scaled, double delta)
      : w_(uhat.width()),
        h_(uhat.height()),
        uhat_(detail::to_vec<Real>(uhat)),
        c_(detail::to_vec<Real>(c)),
        a0_(detail::to_vec<Real>(scaled.w0)),
        a1_(detail::to_vec<Real>(scaled.w1)),
        delta_(static_cast<Real>(delta)) {
    const std::size_t n = w_ * h_;
    for (auto* buf : {&gx_, &gy_, &px_, &py_, &div_, &uhalf_, &duh_, &ex_, &ey_}) buf->assign(n, Real(0));
    regime_.assign(n, 0);
  }

  void set_trace(std::vector<std::uint8_t>* trace) { trace_ = trace; }

  Accum make_accum() const {
    const std::size_t n = w_ * h_;
    return {std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  }

  void step(const V& prim, const V& extrap, Real gamma, V& prim_next, V& extrap_next) {
    const Real* u = prim[0].data();
    const Real* v = extrap[0].data();
    smooth(v);
    prim_next[0].resize(u_size());
    extrap_next[0].resize(u_size());
    Real* un = prim_next[0].data();
    Real* vn = extrap_next[0].data();
    const auto n = static_cast<std::ptrdiff_t>(u_size());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Real uh = uhalf_[i];
      Real next;
      switch (prox_branch(uh, uhat_[i], c_[i])) {
        case ProxBranch::shrink_down: next = uh - c_[i]; break;
        case ProxBranch::shrink_up: next = uh + c_[i]; break;
        default: next = uhat_[i]; break;
      }
      un[i] = next;
      vn[i] = next + gamma * (next - u[i]);
    }
    if (trace_) record(u_size());
  }

  void step_backward(const V& extrap, const V& d_prim_next, V& d_extrap, Accum& acc) {
    smooth(extrap[0].data());
    const Real* du = d_prim_next[0].data();
    const auto n = static_cast<std::ptrdiff_t>(u_size());
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
    detail::forward_diff(duh_.data(), w_, h_, ex_.data(), ey_.data());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto hp = detail::huber_grad(gx_[i], gy_[i], a0_[i], a1_[i], delta_);
      Real r0, r1;
      detail::huber_grad_backward(hp, gx_[i], gy_[i], a0_[i], a1_[i], delta_, -ex_[i], -ey_[i], r0, r1,
                                  acc.d_w0[i], acc.d_w1[i]);
      px_[i] = r0;
      py_[i] = r1;
    }
    detail::forward_diff_adj(px_.data(), py_.data(), w_, h_, div_.data());
    d_extrap[0].resize(u_size());
    Real* dv = d_extrap[0].data();
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) dv[i] = duh_[i] + div_[i];
  }

  /// u_half = v - D^T (W D v / max(1, |sqrt(W) D v| / delta)); keeps D v in gx_, gy_.
  void smooth(const Real* v) {
    detail::forward_diff(v, w_, h_, gx_.data(), gy_.data());
    const auto n = static_cast<std::ptrdiff_t>(u_size());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto hp = detail::huber_grad(gx_[i], gy_[i], a0_[i], a1_[i], delta_);
      px_[i] = hp.p0;
      py_[i] = hp.p1;
      regime_[i] = hp.linear ? 4 : 0;
    }
    detail::forward_diff_adj(px_.data(), py_.data(), w_, h_, div_.data());
#pragma omp parallel for schedule(static) if (n >= kParallelPixels)
    for (std::ptrdiff_t i = 0; i < n; ++i) uhalf_[i] = v[i] - div_[i];
  }

  const std::vector<Real>& u_half() const { return uhalf_; }

 private:
  std::size_t u_size() const { return w_ * h_; }

  void record(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      trace_->push_back(static_cast<std::uint8_t>(regime_[i] | static_cast<std::uint8_t>(prox_branch(uhalf_[i], uhat_[i], c_[i]))));
    }
  }

  std::size_t w_, h_;
  std::vector<Real> uhat_, c_, a0_, a1_;
  Real delta_;
  std::vector<Real> gx_, gy_, px_, py_, div_, uhalf_, duh_, ex_, ey_;
  std::vector<std::uint8_t> regime_;
  std::vector<std::uint8_t>* trace_ = nullptr;
};

void check_inputs(const Field& uhat, const Field& c, const DiffusionTensor& tensor) {
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
}

template <typename Real>
TvResult forward_impl(const Field& uhat, const Field& c, const DiffusionTensor& tensor, const Field& u0,
                      const SolverConfig& config, std::vector<std::uint8_t>* trace) {
  const std::size_t w = uhat.width(), h = uhat.height();
  TvEngine<Real> engine(uhat, c, fold_tv_lipschitz(tensor), config.delta);
  engine.set_trace(trace);
  const auto t = fista_t_sequence(config.iters);
  const auto momentum = fista_momentum(config.iters);
  const auto indices = checkpoint_indices(config.iters, config.checkpoint);

  TvResult result;
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

  detail::Vars<Real, 1> init{detail::to_vec<Real>(u0)};
  const auto final_u = detail::unrolled_forward(
      engine, init, config.iters, momentum, indices, [&](const detail::Snapshot<Real, 1>& s) {
        store.states.push_back(TvState{detail::to_field(s.prim[0], w, h), detail::to_field(s.extrap[0], w, h),
                                       s.k, s.k == 0 ? 1.0 : t[s.k - 1], t[s.k]});
      });
  result.u = detail::to_field(final_u[0], w, h);
  return result;
}

template <typename Real>
TvGradients backward_impl(const Field& d_uK, const CheckpointStore<TvState>& store, const Field& uhat,
                          const Field& c, const DiffusionTensor& tensor, const SolverConfig& config,
                          ReplayStats* stats) {
  const std::size_t w = uhat.width(), h = uhat.height();
  TvEngine<Real> engine(uhat, c, fold_tv_lipschitz(tensor), config.delta);
  auto acc = engine.make_accum();
  std::vector<detail::Snapshot<Real, 1>> snaps;
  snaps.reserve(store.states.size());
  for (const auto& s : store.states) snaps.push_back({s.k, {detail::to_vec<Real>(s.u)}, {detail::to_vec<Real>(s.v)}});

  const auto d_init = detail::unrolled_backward(engine, snaps, store.iters, fista_momentum(store.iters),
                                                detail::Vars<Real, 1>{detail::to_vec<Real>(d_uK)}, acc, stats);
  const double inv_l = 1.0 / defaults::tv_lipschitz;
  TvGradients g;
  g.d_uhat = detail::to_field(acc.d_uhat, w, h, 1.0);
  g.d_c = detail::to_field(acc.d_c, w, h, 1.0);
  g.d_W = {detail::to_field(acc.d_w0, w, h, inv_l), detail::to_field(acc.d_w1, w, h, inv_l)};
  g.d_u0 = detail::to_field(d_init[0], w, h);
  return g;
}

void check_store(const CheckpointStore<TvState>& store, const Field& uhat, const SolverConfig& config) {
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
    if (!s.u.same_shape(uhat) || !s.v.same_shape(uhat)) fail(ErrorCode::StoreMismatch, "checkpoint field shape");
    if (s.k >= store.iters || (i > 0 && s.k <= store.states[i - 1].k)) {
      fail(ErrorCode::StoreMismatch, "checkpoint indices must increase and stay below K");
    }
  }
}

}  // namespace

DiffusionTensor fold_tv_lipschitz(const DiffusionTensor& tensor) {
  DiffusionTensor out = tensor;
  for (auto* f : {&out.w0, &out.w1}) {
    for (double& v : f->values()) v /= defaults::tv_lipschitz;
  }
  return out;
}

TvState tv_step(const TvState& state, const Field& uhat, const Field& c, const DiffusionTensor& scaled,
                double delta) {
  check_inputs(uhat, c, scaled);
  require_same_shape(state.u, uhat, "state and uhat");
  require_same_shape(state.v, uhat, "state and uhat");
  if (!(delta > 0.0)) fail(ErrorCode::NonPositiveDelta, "Huber delta must be positive");
  TvEngine<double> engine(uhat, c, scaled, delta);
  const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * state.t_cur * state.t_cur)) / 2.0;
  const double gamma = (state.t_cur - 1.0) / t_next;
  detail::Vars<double, 1> prim{detail::to_vec<double>(state.u)};
  detail::Vars<double, 1> extrap{detail::to_vec<double>(state.v)};
  detail::Vars<double, 1> prim_next, extrap_next;
  engine.step(prim, extrap, gamma, prim_next, extrap_next);
  detail::require_finite(prim_next, "tv_step", state.k);
  detail::require_finite(extrap_next, "tv_step", state.k);
  const std::size_t w = uhat.width(), h = uhat.height();
  return TvState{detail::to_field(prim_next[0], w, h), detail::to_field(extrap_next[0], w, h), state.k + 1,
                 state.t_cur, t_next};
}

TvResult tv_forward(const Field& uhat, const Field& c, const DiffusionTensor& tensor, const Field& u0,
                    const SolverConfig& config, std::vector<std::uint8_t>* branch_trace) {
  config.validate();
  check_inputs(uhat, c, tensor);
  require_same_shape(uhat, u0, "uhat and u0");
  require_finite(u0, "u0");
  if (branch_trace) branch_trace->clear();
  return config.precision == Precision::f64 ? forward_impl<double>(uhat, c, tensor, u0, config, branch_trace)
                                            : forward_impl<float>(uhat, c, tensor, u0, config, branch_trace);
}

TvGradients tv_backward(const Field& d_uK, const CheckpointStore<TvState>& store, const Field& uhat,
                        const Field& c, const DiffusionTensor& tensor, const SolverConfig& config,
                        ReplayStats* stats) {
  config.validate();
  check_inputs(uhat, c, tensor);
  require_same_shape(uhat, d_uK, "uhat and d_uK");
  require_finite(d_uK, "d_uK");
  check_store(store, uhat, config);
  return store.precision == Precision::f64 ? backward_impl<double>(d_uK, store, uhat, c, tensor, config, stats)
                                           : backward_impl<float>(d_uK, store, uhat, c, tensor, config, stats);
}

double tv_energy(const Field& u, const Field& uhat, const Field& c, const DiffusionTensor& tensor, double delta) {
  require_same_shape(u, uhat, "u and uhat");
  require_same_shape(u, c, "u and c");
  require_same_shape(u, tensor.w0, "u and W");
  require_same_shape(u, tensor.w1, "u and W");
  const auto g = grad(u);
  double energy = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    energy += huber(std::sqrt(tensor.w0[i]) * g.gx[i], std::sqrt(tensor.w1[i]) * g.gy[i], delta);
    energy += c[i] * std::abs(u[i] - uhat[i]);
  }
  return energy;
}

double tv_objective(const Field& u, const Field& uhat, const Field& c, const DiffusionTensor& tensor,
                    double delta) {
  return tv_energy(u, uhat, c, fold_tv_lipschitz(tensor), delta);
}

}  // namespace varflow
