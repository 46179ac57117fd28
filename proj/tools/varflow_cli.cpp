#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "varflow/confidence.hpp"
#include "varflow/defaults.hpp"
#include "varflow/error.hpp"
#include "varflow/gradcheck.hpp"
#include "varflow/io.hpp"
#include "varflow/matching.hpp"
#include "varflow/parallel.hpp"
#include "varflow/png.hpp"
#include "varflow/pyramid.hpp"
#include "varflow/quadfit.hpp"
#include "varflow/tgv.hpp"
#include "varflow/tv.hpp"

namespace {

using namespace varflow;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemFlags {
  std::string uhat, conf, tensor, image;
  double gamma = defaults::edge_gamma;
  std::string model = "tv";
  double delta = defaults::huber_delta;
  double beta = defaults::tgv_beta;
};

struct InpaintFlags : ProblemFlags {
  std::size_t levels = defaults::pyramid_levels;
  std::string level_iters;
  std::string precision = "f64";
  std::string checkpoint = "sqrt";
  std::string out, png;
  double png_max = 0.0;
};

struct EnergyFlags : ProblemFlags {
  std::string flow, w0, w1;
};

struct CostvolFlags {
  std::string feat0, feat1;
  std::size_t range = defaults::displacement_range;
  std::string out, out_bw, prob0, prob1;
  bool refine = false;
  std::string psi0, psi1, refined, fit_cost, fail_mask;
};

struct QuadfitFlags {
  std::string psi0, psi1, ubar, out, fit_cost, fail_mask;
};

struct GradcheckFlags {
  std::string model = "tv";
  std::string grid = "8x8";
  std::size_t iters = defaults::gradcheck_iters;
  double fd_step = defaults::gradcheck_step;
  double tol = defaults::gradcheck_tol;
  std::uint64_t seed = 0;
  double beta = defaults::tgv_beta;
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& f) {
  cmd->add_option("--uhat", f.uhat, "initial flow estimate (.flo)")->required();
  cmd->add_option("--conf", f.conf, "confidence map (F32M, 1 channel)")->required();
  auto* tensor = cmd->add_option("--tensor", f.tensor, "diffusion tensor (F32M, 2 channels)");
  auto* image = cmd->add_option("--image", f.image, "reference image (PNG) for the edge tensor");
  tensor->excludes(image);
  cmd->add_option("--gamma", f.gamma, "edge tensor sharpness");
  cmd->add_option("--model", f.model, "regularizer")->check(CLI::IsMember({"tv", "tgv"}));
  cmd->add_option("--delta", f.delta, "Huber threshold");
  cmd->add_option("--beta", f.beta, "TGV weight of the second-order term");
}

Model parse_model(const std::string& s) { return s == "tgv" ? Model::tgv : Model::tv; }

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v <= 0) throw UsageError("bad --level-iters entry '" + item + "'");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw UsageError("bad --level-iters entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--level-iters is empty");
  return out;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw UsageError("");
    std::size_t p0 = 0, p1 = 0;
    const long long w = std::stoll(s.substr(0, x), &p0);
    const long long h = std::stoll(s.substr(x + 1), &p1);
    if (p0 != x || p1 != s.size() - x - 1 || w <= 0 || h <= 0) throw UsageError("");
    return {static_cast<std::size_t>(w), static_cast<std::size_t>(h)};
  } catch (const std::exception&) {
    throw UsageError("--grid expects WxH with positive integers, got '" + s + "'");
  }
}

struct Problem {
  FlowField uhat;
  ConfidenceMap conf;
  DiffusionTensor tensor;
};

Problem load_problem(const ProblemFlags& f) {
  if (f.tensor.empty() && f.image.empty()) throw UsageError("one of --tensor or --image is required");
  Problem p;
  p.uhat = read_flo(f.uhat);
  const ScalarMap conf = read_map(f.conf);
  if (conf.channels() != 1) fail(ErrorCode::DimMismatch, "confidence map must have 1 channel");
  p.conf = ConfidenceMap(conf.channel_field(0));
  if (!f.tensor.empty()) {
    const ScalarMap t = read_map(f.tensor);
    if (t.channels() != 2) fail(ErrorCode::DimMismatch, "tensor map must have 2 channels");
    p.tensor = DiffusionTensor(t.channel_field(0), t.channel_field(1));
  } else {
    p.tensor = edge_tensor(read_png_gray(f.image), f.gamma);
  }
  validate(p.uhat);
  validate(p.conf);
  validate(p.tensor);
  require_same_shape(p.uhat.u0, p.conf.c, "flow and confidence");
  require_same_shape(p.uhat.u0, p.tensor.w0, "flow and tensor");
  return p;
}

ScalarMap mask_map(const Mask& m) {
  ScalarMap out(m.width(), m.height(), 1);
  for (std::size_t i = 0; i < m.size(); ++i) out.values()[i] = m[i] ? 1.0 : 0.0;
  return out;
}

double max_magnitude(const FlowField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.u0.size(); ++i) m = std::max(m, std::hypot(f.u0[i], f.u1[i]));
  return m > 0.0 ? m : 1.0;
}

int run_inpaint(const InpaintFlags& f, bool levels_given) {
  PyramidConfig cfg;
  cfg.model = parse_model(f.model);
  cfg.beta = f.beta;
  cfg.solver.delta = f.delta;
  cfg.solver.precision = f.precision == "mixed" ? Precision::mixed : Precision::f64;
  cfg.solver.checkpoint = f.checkpoint == "full" ? CheckpointMode::full : CheckpointMode::sqrt;
  if (!f.level_iters.empty()) {
    cfg.iters_per_level = parse_list(f.level_iters);
    if (levels_given && cfg.iters_per_level.size() != f.levels) {
      throw UsageError("--levels does not match the number of --level-iters entries");
    }
  } else if (f.levels != defaults::pyramid_levels) {
    if (f.levels == 0) throw UsageError("--levels must be at least 1");
    cfg.iters_per_level.assign(f.levels, defaults::level_iterations.front());
    cfg.iters_per_level.back() = defaults::level_iterations.back();
  }
  const Problem p = load_problem(f);
  const FlowField u = solve_pyramid(p.uhat, p.conf, p.tensor, cfg);
  write_flo(u, f.out);
  std::printf("out=%s\n", f.out.c_str());
  std::printf("width=%zu\nheight=%zu\nlevels=%zu\n", u.width(), u.height(), cfg.levels());
  if (!f.png.empty()) {
    const double scale = f.png_max > 0.0 ? f.png_max : max_magnitude(u);
    write_bytes(flow_to_png(u, scale), f.png);
    std::printf("png=%s\npng_max=%.12g\n", f.png.c_str(), scale);
  }
  return 0;
}

int run_energy(const EnergyFlags& f) {
  const Problem p = load_problem(f);
  const FlowField u = read_flo(f.flow);
  validate(u);
  require_same_shape(u.u0, p.uhat.u0, "flow and uhat");
  const Model model = parse_model(f.model);
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    double e = 0.0;
    if (model == Model::tv) {
      e = tv_energy(u.channel(i), p.uhat.channel(i), p.conf.c, p.tensor, f.delta);
    } else {
      const std::string& path = i == 0 ? f.w0 : f.w1;
      Field a(u.width(), u.height()), b(u.width(), u.height());
      if (!path.empty()) {
        const ScalarMap w = read_map(path);
        if (w.channels() != 2) fail(ErrorCode::DimMismatch, "auxiliary field must have 2 channels");
        a = w.channel_field(0);
        b = w.channel_field(1);
        require_same_shape(a, u.u0, "auxiliary field and flow");
      }
      e = tgv_energy(u.channel(i), a, b, p.uhat.channel(i), p.conf.c, p.tensor, f.beta, f.delta);
    }
    std::printf("energy_u%d=%.12g\n", i, e);
    total += e;
  }
  std::printf("energy=%.12g\n", total);
  return 0;
}

FeatureMap load_features(const std::string& path) { return FeatureMap(read_map(path)); }

void write_refinement(const QuadFitResult& r, const std::string& flow, const std::string& cost,
                      const std::string& mask) {
  write_flo(r.flow, flow);
  std::printf("refined=%s\n", flow.c_str());
  if (!cost.empty()) {
    write_map(r.cost, cost);
    std::printf("fit_cost=%s\n", cost.c_str());
  }
  if (!mask.empty()) {
    write_map(mask_map(r.failed), mask);
    std::printf("fail_mask=%s\n", mask.c_str());
  }
  std::size_t failed = 0;
  for (std::size_t i = 0; i < r.failed.size(); ++i) failed += r.failed[i] ? 1 : 0;
  std::printf("failed=%zu\n", failed);
}

int run_costvol(const CostvolFlags& f) {
  if (f.refine && (f.psi0.empty() || f.psi1.empty() || f.refined.empty())) {
    throw UsageError("--refine needs --psi0, --psi1 and --refined");
  }
  const FeatureMap f0 = load_features(f.feat0);
  const FeatureMap f1 = load_features(f.feat1);
  const CostVolumes vols = correlate(f0, f1, f.range);
  const FlowField ubar = argmin_flow(vols.cor[0][0], vols.cor[0][1]);
  write_flo(ubar, f.out);
  std::printf("out=%s\nwidth=%zu\nheight=%zu\nrange=%zu\n", f.out.c_str(), ubar.width(), ubar.height(), f.range);
  if (!f.out_bw.empty()) {
    write_flo(argmin_flow(vols.cor[1][0], vols.cor[1][1]), f.out_bw);
    std::printf("out_bw=%s\n", f.out_bw.c_str());
  }
  if (!f.prob0.empty()) {
    write_map(softmax_prob(vols.cor[0][0]), f.prob0);
    std::printf("prob0=%s\n", f.prob0.c_str());
  }
  if (!f.prob1.empty()) {
    write_map(softmax_prob(vols.cor[0][1]), f.prob1);
    std::printf("prob1=%s\n", f.prob1.c_str());
  }
  if (f.refine) {
    const auto r = quadfit_refine(load_features(f.psi0), load_features(f.psi1), ubar);
    write_refinement(r, f.refined, f.fit_cost, f.fail_mask);
  }
  return 0;
}

int run_quadfit(const QuadfitFlags& f) {
  const auto r = quadfit_refine(load_features(f.psi0), load_features(f.psi1), read_flo(f.ubar));
  write_refinement(r, f.out, f.fit_cost, f.fail_mask);
  return 0;
}

int run_gradcheck_cmd(const GradcheckFlags& f) {
  GradcheckOptions o;
  o.model = parse_model(f.model);
  std::tie(o.width, o.height) = parse_grid(f.grid);
  o.iters = f.iters;
  o.fd_step = f.fd_step;
  o.tol = f.tol;
  o.seed = f.seed;
  o.beta = f.beta;
  if (!(o.tol >= 0.0)) throw UsageError("--tol must be nonnegative");
  const GradcheckReport r = run_gradcheck(o);
  std::printf("model=%s\ngrid=%zux%zu\niters=%zu\nfd_step=%.6g\ntol=%.6g\nseed=%" PRIu64 "\n", f.model.c_str(),
              o.width, o.height, o.iters, o.fd_step, o.tol, o.seed);
  for (const auto& fam : r.families) {
    std::printf(
        "family=%s count=%zu max_rel_err=%.6e worst_index=%zu analytic=%.12g numeric=%.12g kinks=%zu "
        "kink_max_rel_err=%.6e\n",
        fam.name.c_str(), fam.count, fam.max_rel_err, fam.worst_index, fam.analytic, fam.numeric, fam.kinks,
        fam.kink_max_rel_err);
  }
  if (r.passed()) {
    std::printf("result=pass\n");
    return 0;
  }
  for (const auto& fam : r.families) {
    if (fam.max_rel_err < r.tol) continue;
    const std::size_t n = o.width * o.height;
    const std::size_t idx = fam.worst_index % n;
    std::printf("offending family=%s index=%zu x=%zu y=%zu channel=%zu max_rel_err=%.6e\n", fam.name.c_str(),
                fam.worst_index, idx % o.width, idx / o.width, fam.worst_index / n, fam.max_rel_err);
  }
  std::printf("result=fail\n");
  return kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  CLI::App app{"varflow: variational flow inpainting and matching"};
  app.require_subcommand(1);

  InpaintFlags inpaint;
  auto* c_inpaint = app.add_subcommand("inpaint", "densify a flow field with the TV/TGV pyramid solver");
  add_problem_flags(c_inpaint, inpaint);
  auto* levels_opt = c_inpaint->add_option("--levels", inpaint.levels, "pyramid levels");
  c_inpaint->add_option("--level-iters", inpaint.level_iters, "iterations per level, coarse to fine (a,b,c)");
  c_inpaint->add_option("--precision", inpaint.precision)->check(CLI::IsMember({"f64", "mixed"}));
  c_inpaint->add_option("--checkpoint", inpaint.checkpoint)->check(CLI::IsMember({"sqrt", "full"}));
  c_inpaint->add_option("--out", inpaint.out, "output .flo")->required();
  c_inpaint->add_option("--png", inpaint.png, "color-wheel PNG of the result");
  c_inpaint->add_option("--png-max", inpaint.png_max, "flow magnitude at full saturation (default: max)");

  CostvolFlags costvol;
  auto* c_costvol = app.add_subcommand("costvol", "correlation cost volumes and argmin flow");
  c_costvol->add_option("--feat0", costvol.feat0, "strided features of frame 0 (F32M)")->required();
  c_costvol->add_option("--feat1", costvol.feat1, "strided features of frame 1 (F32M)")->required();
  c_costvol->add_option("--range", costvol.range, "displacement range d")->check(CLI::PositiveNumber);
  c_costvol->add_option("--out", costvol.out, "argmin flow (.flo)")->required();
  c_costvol->add_option("--out-bw", costvol.out_bw, "backward argmin flow (.flo)");
  c_costvol->add_option("--prob0", costvol.prob0, "softmax likelihoods along u0 (F32M)");
  c_costvol->add_option("--prob1", costvol.prob1, "softmax likelihoods along u1 (F32M)");
  c_costvol->add_flag("--refine", costvol.refine, "quadratic sub-pixel refinement");
  c_costvol->add_option("--psi0", costvol.psi0, "full-resolution features of frame 0");
  c_costvol->add_option("--psi1", costvol.psi1, "full-resolution features of frame 1");
  c_costvol->add_option("--refined", costvol.refined, "refined flow (.flo)");
  c_costvol->add_option("--fit-cost", costvol.fit_cost, "fitted cost (F32M)");
  c_costvol->add_option("--fail-mask", costvol.fail_mask, "fit failure mask (F32M)");

  QuadfitFlags quadfit;
  auto* c_quadfit = app.add_subcommand("quadfit", "sub-pixel refinement of an integer flow");
  c_quadfit->add_option("--psi0", quadfit.psi0)->required();
  c_quadfit->add_option("--psi1", quadfit.psi1)->required();
  c_quadfit->add_option("--ubar", quadfit.ubar, "half-resolution integer flow (.flo)")->required();
  c_quadfit->add_option("--out", quadfit.out)->required();
  c_quadfit->add_option("--fit-cost", quadfit.fit_cost);
  c_quadfit->add_option("--fail-mask", quadfit.fail_mask);

  GradcheckFlags grad;
  auto* c_grad = app.add_subcommand("gradcheck", "finite-difference check of the solver reverse pass");
  c_grad->add_option("--model", grad.model)->check(CLI::IsMember({"tv", "tgv"}));
  c_grad->add_option("--grid", grad.grid, "grid size WxH");
  c_grad->add_option("--iters", grad.iters)->check(CLI::PositiveNumber);
  c_grad->add_option("--fd-step", grad.fd_step)->check(CLI::PositiveNumber);
  c_grad->add_option("--tol", grad.tol);
  c_grad->add_option("--seed", grad.seed);
  c_grad->add_option("--beta", grad.beta)->check(CLI::PositiveNumber);

  EnergyFlags energy;
  auto* c_energy = app.add_subcommand("energy", "evaluate the TV/TGV energy of a flow field");
  add_problem_flags(c_energy, energy);
  c_energy->add_option("--flow", energy.flow, "flow to evaluate (.flo)")->required();
  c_energy->add_option("--w0", energy.w0, "TGV auxiliary field of u0 (F32M, 2 channels)");
  c_energy->add_option("--w1", energy.w1, "TGV auxiliary field of u1 (F32M, 2 channels)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*c_inpaint) return run_inpaint(inpaint, levels_opt->count() > 0);
    if (*c_costvol) return run_costvol(costvol);
    if (*c_quadfit) return run_quadfit(quadfit);
    if (*c_grad) return run_gradcheck_cmd(grad);
    if (*c_energy) return run_energy(energy);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error=%s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return is_numerical(e.code()) ? kExitNumeric : kExitData;
  }
  return kExitUsage;
}
