#include "varflow/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "varflow/tgv.hpp"
#include "varflow/tv.hpp"

namespace varflow {
namespace {

double half_sq(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += 0.5 * v * v;
  return s;
}

/// f = 1/2 of the squared norm of every solver output.
double loss(const SolverInstance& in, Model model, const SolverConfig& cfg, std::vector<std::uint8_t>* trace) {
  if (model == Model::tv) return half_sq(tv_forward(in.uhat, in.c, in.tensor, in.u0, cfg, trace).u);
  const auto r = tgv_forward(in.uhat, in.c, in.tensor, in.beta, in.u0, in.w0, in.w1, cfg, trace);
  return half_sq(r.u) + half_sq(r.w0) + half_sq(r.w1);
}

struct Family {
  std::string name;
  std::function<double&(SolverInstance&, std::size_t)> coord;
  std::size_t count;
  std::vector<double> analytic;
};

std::vector<double> concat(const Field& a, const Field& b) {
  std::vector<double> v(a.values().begin(), a.values().end());
  v.insert(v.end(), b.values().begin(), b.values().end());
  return v;
}

}  // namespace

bool GradcheckReport::passed() const {
  return std::all_of(families.begin(), families.end(), [&](const FamilyReport& f) { return f.max_rel_err < tol; });
}

bool GradcheckReport::smooth() const {
  return std::all_of(families.begin(), families.end(), [](const FamilyReport& f) { return f.kinks == 0; });
}

double gradient_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

SolverInstance random_instance(std::size_t width, std::size_t height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0), conf(0.001, 0.3), pos(0.1, 1.0), small(-0.2, 0.2);
  SolverInstance in;
  in.uhat = Field(width, height);
  in.c = Field(width, height);
  in.tensor = DiffusionTensor::uniform(width, height, 0.0);
  in.u0 = Field(width, height);
  in.w0 = Field(width, height);
  in.w1 = Field(width, height);
  for (std::size_t i = 0; i < width * height; ++i) {
    in.uhat[i] = sym(rng);
    in.c[i] = conf(rng);
    in.tensor.w0[i] = pos(rng);
    in.tensor.w1[i] = pos(rng);
    in.u0[i] = sym(rng);
    in.w0[i] = small(rng);
    in.w1[i] = small(rng);
  }
  return in;
}

GradcheckReport run_gradcheck(const SolverInstance& instance, const GradcheckOptions& options) {
  SolverConfig cfg;
  cfg.iters = options.iters;
  cfg.precision = Precision::f64;
  cfg.checkpoint = CheckpointMode::sqrt;
  cfg.validate();
  if (!(options.fd_step > 0.0)) fail(ErrorCode::NonPositiveValue, "finite-difference step must be positive");

  const std::size_t n = instance.uhat.size();
  std::vector<Family> families;
  auto field_coord = [](Field SolverInstance::*member) {
    return [member](SolverInstance& s, std::size_t i) -> double& { return (s.*member)[i]; };
  };
  auto pair_coord = [n](Field SolverInstance::*a, Field SolverInstance::*b) {
    return [a, b, n](SolverInstance& s, std::size_t i) -> double& { return i < n ? (s.*a)[i] : (s.*b)[i - n]; };
  };
  auto tensor_coord = [n](SolverInstance& s, std::size_t i) -> double& {
    return i < n ? s.tensor.w0[i] : s.tensor.w1[i - n];
  };

  if (options.model == Model::tv) {
    const auto fwd = tv_forward(instance.uhat, instance.c, instance.tensor, instance.u0, cfg);
    const auto g = tv_backward(fwd.u, fwd.store, instance.uhat, instance.c, instance.tensor, cfg);
    const auto& gv = g.d_uhat.values();
    families.push_back({"uhat", field_coord(&SolverInstance::uhat), n, {gv.begin(), gv.end()}});
    families.push_back({"c", field_coord(&SolverInstance::c), n, {g.d_c.values().begin(), g.d_c.values().end()}});
    families.push_back({"W", tensor_coord, 2 * n, concat(g.d_W.d_w0, g.d_W.d_w1)});
    families.push_back({"u0", field_coord(&SolverInstance::u0), n, {g.d_u0.values().begin(), g.d_u0.values().end()}});
  } else {
    const auto fwd = tgv_forward(instance.uhat, instance.c, instance.tensor, instance.beta, instance.u0, instance.w0,
                                 instance.w1, cfg);
    const auto g = tgv_backward(fwd.u, fwd.w0, fwd.w1, fwd.store, instance.uhat, instance.c, instance.tensor,
                                instance.beta, cfg);
    const auto& gv = g.d_uhat.values();
    families.push_back({"uhat", field_coord(&SolverInstance::uhat), n, {gv.begin(), gv.end()}});
    families.push_back({"c", field_coord(&SolverInstance::c), n, {g.d_c.values().begin(), g.d_c.values().end()}});
    families.push_back({"W", tensor_coord, 2 * n, concat(g.d_W.d_w0, g.d_W.d_w1)});
    families.push_back({"beta", [](SolverInstance& s, std::size_t) -> double& { return s.beta; }, 1, {g.d_beta}});
    families.push_back({"u0", field_coord(&SolverInstance::u0), n, {g.d_u0.values().begin(), g.d_u0.values().end()}});
    families.push_back({"w0", pair_coord(&SolverInstance::w0, &SolverInstance::w1), 2 * n,
                        concat(g.d_w0_0, g.d_w1_0)});
  }

  GradcheckReport report;
  report.tol = options.tol;
  SolverInstance probe = instance;
  std::vector<std::uint8_t> base, trace_up, trace_down;
  loss(instance, options.model, cfg, &base);
  for (auto& fam : families) {
    FamilyReport fr;
    fr.name = fam.name;
    fr.count = fam.count;
    fr.max_rel_err = -1.0;
    for (std::size_t i = 0; i < fam.count; ++i) {
      double& x = fam.coord(probe, i);
      const double x0 = x;
      x = x0 + options.fd_step;
      const double up = loss(probe, options.model, cfg, &trace_up);
      x = x0 - options.fd_step;
      const double down = loss(probe, options.model, cfg, &trace_down);
      x = x0;
      const double numeric = (up - down) / (2.0 * options.fd_step);
      const double err = gradient_error(fam.analytic[i], numeric);
      if (trace_up != base || trace_down != base) {
        ++fr.kinks;
        fr.kink_max_rel_err = std::max(fr.kink_max_rel_err, err);
        continue;
      }
      if (err > fr.max_rel_err) {
        fr.max_rel_err = err;
        fr.worst_index = i;
        fr.analytic = fam.analytic[i];
        fr.numeric = numeric;
      }
    }
    if (fr.max_rel_err < 0.0) fr.max_rel_err = 0.0;
    report.families.push_back(fr);
  }
  return report;
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  if (options.width == 0 || options.height == 0) fail(ErrorCode::NonPositiveDims, "grid must be at least 1x1");
  SolverInstance in = random_instance(options.width, options.height, options.seed);
  in.beta = options.beta;
  return run_gradcheck(in, options);
}

}  // namespace varflow
