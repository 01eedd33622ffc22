#include "nlc/cli.hpp"

#include "nlc/alexandrov.hpp"
#include "nlc/curvature.hpp"
#include "nlc/flow.hpp"
#include "nlc/io.hpp"
#include "nlc/parallel.hpp"
#include "nlc/quadrature.hpp"
#include "nlc/radial.hpp"

#include <map>
#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace nlc {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> c{"curvature-field", "curvature-boundary", "classify", "moving-plane",
                                          "flow",            "ball-table",         "kernel-check"};
  return c;
}

namespace {

struct Inputs {
  KernelSpec kernel;
  bool has_kernel = false;
  Shape shape;
  bool has_shape = false;
  Json shape_json;
};

Inputs load(const RunConfig& c, bool need_kernel, bool need_shape) {
  Inputs in;
  if (need_kernel && c.kernel.empty()) throw ValidationError("kernel", "--kernel is required");
  if (need_shape && c.shape.empty()) throw ValidationError("shape", "--shape is required");
  for (const fs::path& p : {c.kernel, c.shape})
    if (!p.empty() && !fs::is_regular_file(p)) throw ValidationError("path", "no such file: " + p.string());
  if (!c.kernel.empty()) {
    in.kernel = kernel_from_json(read_json_file(c.kernel));
    in.has_kernel = true;
  }
  if (!c.shape.empty()) {
    in.shape_json = read_json_file(c.shape);
    in.shape = shape_from_json(in.shape_json, c.shape.parent_path());
    in.has_shape = true;
  }
  return in;
}

double shape_scale(const Shape& s) {
  if (const auto* b = s.as<Ball>()) return b->R;
  if (const auto* u = s.as<BallUnion>()) {
    double m = std::numeric_limits<double>::infinity();
    for (const Ball& b : u->balls) m = std::min(m, b.R);
    return m;
  }
  if (const auto* m = s.as<MaskShape>()) return 128 * m->mask->grid.h;
  if (!s.bounded()) return 1.0;
  return std::sqrt(s.area() / kPi);
}

QuadratureOptions quadrature(const RunConfig& c, const KernelSpec& k) {
  QuadratureOptions q;
  if (c.quad_tol > 0) q.tol = c.quad_tol * l1_norm(k);
  return q;
}

Json header(const RunConfig& c, const Inputs& in) {
  Json j;
  j["command"] = c.command;
  if (in.has_kernel) {
    j["kernel"] = to_json(in.kernel);
    const auto w = kernel_warnings(in.kernel, in.has_shape ? in.shape.holder_beta : 1.0);
    if (!w.empty()) j["warnings"] = w;
  }
  if (in.has_shape) j["shape"] = to_json(in.shape);
  j["seed"] = c.seed;
  return j;
}

int cmd_curvature_field(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  const KernelSpec& k = in.kernel;
  if (!in.shape.bounded() && !in.shape.as<MaskShape>())
    throw ValidationError("shape", "curvature-field needs a bounded shape or a mask");
  Mask m;
  if (const auto* ms = in.shape.as<MaskShape>()) {
    m = *ms->mask;
  } else {
    const double h = c.grid_h > 0 ? c.grid_h : std::min(shape_scale(in.shape), k.compact() ? k.r : 1.0) / 64;
    const double pad = c.padding >= 0 ? c.padding : (k.compact() ? k.r : 1.0) + 2 * h;
    m = rasterize(in.shape, grid_for(in.shape, h, pad), pad);
  }
  const CurvatureField f = curvature_field(m, k);
  write_field(c.out / "field.f64", f);
  write_mask(c.out / "mask.pgm", m);
  Json j = header(c, in);
  j["grid"] = grid_json(f.grid);
  j["min"] = f.values.minCoeff();
  j["max"] = f.values.maxCoeff();
  j["l1"] = l1_norm(k);
  j["files"] = {"field.f64", "field.json", "mask.pgm", "mask.json"};
  out << j.dump() << "\n";
  return 0;
}

int cmd_curvature_boundary(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  BoundaryCurvatureOptions o;
  o.quadrature = quadrature(c, in.kernel);
  o.derivative = c.derivative;
  o.eps = c.eps;
  const BoundaryCurvature bc = boundary_curvature(in.shape, in.kernel, c.samples, o);
  write_text(c.out / "boundary.csv", boundary_csv(bc));
  Json j = header(c, in);
  j["samples"] = bc.samples.size();
  if (bc.H.size() >= 64) {
    const Constancy s = constancy_check(bc, c.tol > 0 ? c.tol : 1e-3);
    j["mean"] = s.mean;
    j["max_dev"] = s.max_dev;
    j["is_constant"] = s.is_constant;
  }
  j["files"] = {"boundary.csv"};
  out << j.dump() << "\n";
  return 0;
}

MovingPlaneOptions plane_options(const RunConfig& c) {
  MovingPlaneOptions o;
  o.h = c.grid_h;
  return o;
}

int cmd_classify(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  ClassifyOptions o;
  o.samples = c.samples;
  o.plane = plane_options(c);
  o.quadrature = quadrature(c, in.kernel);
  const ShapeVerdict v = classify(in.shape, in.kernel, c.dirs, c.tol > 0 ? c.tol : 1e-3, o);
  Json j = header(c, in);
  j.update(to_json(v));
  write_text(c.out / "verdict.json", j.dump(2) + "\n");
  out << Json{{"verdict", to_string(v.kind)}, {"files", {"verdict.json"}}}.dump() << "\n";
  return 0;
}

int cmd_moving_plane(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  if (c.dirs < 1) throw ValidationError("dirs", "need at least one direction");
  std::vector<MovingPlaneReport> reps(c.dirs);
  const MovingPlaneOptions o = plane_options(c);
  parallel_for(reps.size(), [&](std::size_t i) {
    const double th = 2 * kPi * double(i) / c.dirs;
    reps[i] = moving_plane_run(in.shape, in.kernel, Vec2(std::cos(th), std::sin(th)), o);
  });
  Json j = header(c, in);
  j["directions"] = Json::array();
  bool all = true;
  for (const auto& r : reps) {
    j["directions"].push_back(to_json(r));
    all = all && r.passes();
  }
  write_text(c.out / "moving_plane.json", j.dump(2) + "\n");
  out << Json{{"all_symmetric", all}, {"files", {"moving_plane.json"}}}.dump() << "\n";
  return 0;
}

std::string gnuplot_script(double area0) {
  std::ostringstream g;
  g << "set datafile separator ','\n"
    << "set key top right\n"
    << "set xlabel 't'\n"
    << "set ylabel 'area'\n"
    << "A0 = " << fmt(area0) << "\n"
    << "plot 'flow.csv' using 2:3 skip 1 with lines title 'area', \\\n"
    << "     A0 * (1 - 2 * x / (A0 / pi)) title 'pi R0^2 (1 - 2t / R0^2)'\n";
  return g.str();
}

int cmd_flow(const RunConfig& c, std::ostream& out) {
  const bool nonlocal = c.variant == "nonlocal";
  if (!nonlocal && c.variant != "heat") throw ValidationError("variant", "expected heat or nonlocal");
  const Inputs in = load(c, nonlocal, true);
  if (c.steps < 1) throw ValidationError("steps", "need at least one step");
  FlowVariant v = HeatVariant{c.dt};
  double reach = 6 * std::sqrt(2 * c.dt);
  if (nonlocal) {
    v = NonlocalVariant{in.kernel, c.dt};
    reach = radial_profile(in.kernel)->reach();
  }
  FlowState st;
  if (const auto* ms = in.shape.as<MaskShape>()) {
    st = initial_state(*ms->mask);
  } else {
    if (!in.shape.bounded()) throw ValidationError("shape", "flow needs a bounded shape or a mask");
    const double h = c.grid_h > 0 ? c.grid_h : shape_scale(in.shape) / 128;
    const double pad = c.padding >= 0 ? c.padding : reach + 4 * h;
    st = initial_state(rasterize(in.shape, grid_for(in.shape, h, pad), pad));
  }
  FlowRunOptions o;
  o.keep_masks = c.save_masks;
  const FlowRun run = flow_run(st, v, c.steps, o);
  write_text(c.out / "flow.csv", flow_csv(run));
  write_text(c.out / "flow.gp", gnuplot_script(run.series.front().diag.area));
  Json files = {"flow.csv", "flow.gp"};
  for (std::size_t i = 0; i < run.masks.size(); ++i) {
    std::ostringstream name;
    name << "masks/mask_" << std::setw(5) << std::setfill('0') << (i + 1) << ".pgm";
    write_mask(c.out / name.str(), run.masks[i]);
  }
  if (!run.masks.empty()) files.push_back("masks/");
  Json j = header(c, in);
  j["variant"] = c.variant;
  j["dt"] = c.dt;
  j["grid"] = grid_json(st.mask.grid);
  j["steps_run"] = run.series.back().k;
  j["stop"] = run.stop;
  j["files"] = files;
  out << j.dump() << "\n";
  return 0;
}

int cmd_ball_table(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, false);
  const KernelSpec& k = in.kernel;
  if (k.n != 2) throw ValidationError("n", "ball-table needs n = 2");
  const double L = k.compact() ? k.r : 1.0;
  const double lo = c.r_min > 0 ? c.r_min : 0.1 * L, hi = c.r_max > 0 ? c.r_max : 10 * L;
  if (!(hi > lo)) throw ValidationError("r-max", "need r-min < r-max");
  if (c.count < 2) throw ValidationError("count", "need at least two radii");
  QuadratureOptions q = quadrature(c, k);
  if (q.tol < 0) q.tol = 1e-10 * l1_norm(k);
  std::vector<double> R(c.count), H(c.count);
  for (int i = 0; i < c.count; ++i) R[i] = lo * std::pow(hi / lo, double(i) / (c.count - 1));
  parallel_for(R.size(), [&](std::size_t i) { H[i] = ball_curvature(k, R[i], q); });
  write_text(c.out / "ball_table.csv", ball_table_csv(R, H));
  for (int i = 1; i < c.count; ++i)
    if (!(H[i] < H[i - 1]))
      throw NumericalError("ball curvature is not decreasing between R = " + fmt(R[i - 1]) + " and R = " + fmt(R[i]));
  Json j = header(c, in);
  j["files"] = {"ball_table.csv"};
  if (std::isfinite(c.target)) {
    RadiusBracket b;
    b.lo = lo;
    b.hi = hi;
    b.samples = c.count;
    j["target"] = c.target;
    j["radius"] = radius_for_curvature(k, c.target, b);
  }
  out << j.dump() << "\n";
  return 0;
}

// Invariant suite for one kernel. Each line: PASS|FAIL name detail.
bool kernel_suite(const KernelSpec& k, std::uint64_t seed, std::ostream& out) {
  bool all = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << to_string(k.family) << " " << name << " " << detail << "\n";
    all = all && ok;
  };
  std::mt19937_64 rng(seed);
  const double reach = k.compact() ? k.r : 50.0;
  std::uniform_real_distribution<double> U(0.0, 1.0);

  // Nonnegativity and monotonicity on (0, r).
  {
    bool ok = true;
    const bool decreasing = k.family != KernelFamily::indicator;
    for (int i = 0; i < 10000 && ok; ++i) {
      double a = reach * U(rng), b = reach * U(rng);
      if (a == b || a == 0 || b == 0) continue;
      if (a > b) std::swap(a, b);
      const double ma = profile(k, a), mb = profile(k, b);
      ok = ma >= 0 && mb >= 0 && (decreasing ? ma > mb : ma == mb);
    }
    report("monotone", ok, "10000 random pairs");
  }
  if (k.compact()) report("support", profile(k, k.r) == 0.0 && profile(k, std::nextafter(k.r, 2 * k.r)) == 0.0, "mu(r) = 0");

  // L1 norm against a radial quadrature in u = rho^alpha (u = rho^n for bounded profiles).
  {
    const double w = sphere_area(k.n);
    const double p = k.singular() ? k.alpha : double(k.n);
    auto f = [&](double u) {
      const double rho = std::pow(u, 1 / p);
      return profile(k, rho) * std::pow(rho, k.n - p) / p;
    };
    double num = 0;
    if (k.compact()) {
      num = w * integrate_panels(f, 0.0, std::pow(k.r, p), 64, 20);
    } else {
      const auto nodes = geometric_nodes(1e-8, 1e8, 40);
      num = w * integrate(f, 0.0, std::pow(nodes.front(), p), 20);
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        num += w * integrate(f, std::pow(nodes[i], p), std::pow(nodes[i + 1], p), 20);
    }
    const double exact = l1_norm(k);
    const double rel = std::abs(num - exact) / exact;
    report("l1_norm", rel < (k.compact() ? 1e-10 : 1e-7), "rel " + fmt(rel));
  }

  // Gradient against central differences.
  if (k.family != KernelFamily::indicator) {
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const double rho = (0.1 + 0.85 * U(rng)) * std::min(reach, 1.0);
      const double th = 2 * kPi * U(rng);
      const Eigen::Vector2d z(rho * std::cos(th), rho * std::sin(th));
      const Eigen::Vector2d g = gradient(k, z);
      for (int d = 0; d < 2; ++d) {
        Eigen::Vector2d dz = Eigen::Vector2d::Zero();
        dz(d) = 1e-6;
        const double fd = (eval(k, Eigen::Vector2d(z + dz)) - eval(k, Eigen::Vector2d(z - dz))) / 2e-6;
        worst = std::max(worst, std::abs(fd - g(d)) / std::max(g.norm(), 1e-300));
      }
    }
    report("gradient", worst < 1e-5, "rel " + fmt(worst));
  }

  // Mollified profile and its potential.
  if (k.family != KernelFamily::indicator && k.n == 2) {
    const double L = k.compact() ? k.r : 1.0;
    const double eps = 1e-2 * L;
    const MollifiedProfile phi = mollified_phi(k, eps);
    bool agree = true, mono = true;
    for (int i = 0; i < 1000; ++i) {
      const double t = eps * (1 + 1e-9) + (reach - eps) * U(rng);
      agree = agree && phi.value(t) == profile(k, t);
      mono = mono && phi.derivative(reach * U(rng)) <= 0;
    }
    report("phi_eps_agrees", agree, "t > eps");
    report("phi_eps_monotone", mono, "1000 samples");
    const MollifiedProfile psi = psi_profile(phi, k.n);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const double t = std::exp(std::log(1e-3 * L) + std::log(0.95 * reach / (1e-3 * L)) * U(rng));
      if (std::abs(t - eps) < 1e-6 * L || (k.compact() && std::abs(t - k.r) < 1e-6 * L)) continue;
      const double lhs = k.n * psi.value(t) + t * psi.derivative(t);
      const double rhs = phi.value(t);
      if (rhs > 0) worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
    report("psi_divergence", worst < 1e-6, "rel " + fmt(worst));
  }

  if (!k.compact()) {
    const double tol = 1e-3 * l1_norm(k);
    const double rho = truncation_radius(k, tol);
    const auto nodes = geometric_nodes(rho, rho * 1e8, 40);
    double tail = 0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      tail += sphere_area(k.n) *
              integrate([&](double s) { return profile(k, s) * std::pow(s, k.n - 1); }, nodes[i], nodes[i + 1], 20);
    report("truncation_radius", tail <= tol, "tail " + fmt(tail) + " <= " + fmt(tol));
  }
  return all;
}

int cmd_kernel_check(const RunConfig& c, std::ostream& out) {
  std::vector<KernelSpec> ks;
  if (!c.kernel.empty()) {
    ks.push_back(load(c, true, false).kernel);
  } else {
    ks = {KernelSpec{KernelFamily::power_law_truncated, 2, 1, 1, 1, 1},
          KernelSpec{KernelFamily::smooth_compact, 2, 1, 1, 1, 1},
          KernelSpec{KernelFamily::two_sided_decay, 2, std::numeric_limits<double>::infinity(), 1, 1, 1},
          KernelSpec{KernelFamily::indicator, 2, 1, 1, 1, 1}};
  }
  bool all = true;
  for (const auto& k : ks) all = kernel_suite(k, c.seed, out) && all;
  out << (all ? "PASS" : "FAIL") << " kernel-check\n";
  if (!all) throw NumericalError("kernel invariant suite failed");
  return 0;
}

void emit_error(std::ostream& err, const char* kind, const std::string& field, const std::string& msg, int code) {
  Json j;
  j["error"] = kind;
  if (!field.empty()) j["field"] = field;
  j["message"] = msg;
  j["exit_code"] = code;
  err << j.dump() << "\n";
}

}  // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (c.threads) set_max_threads(c.threads);
    if (c.command == "curvature-field") return cmd_curvature_field(c, out);
    if (c.command == "curvature-boundary") return cmd_curvature_boundary(c, out);
    if (c.command == "classify") return cmd_classify(c, out);
    if (c.command == "moving-plane") return cmd_moving_plane(c, out);
    if (c.command == "flow") return cmd_flow(c, out);
    if (c.command == "ball-table") return cmd_ball_table(c, out);
    if (c.command == "kernel-check") return cmd_kernel_check(c, out);
    throw ValidationError("command", "unknown subcommand \"" + c.command + "\"");
  } catch (const ValidationError& e) {
    emit_error(err, "validation", e.field(), e.what(), 1);
    return 1;
  } catch (const HypothesisViolation& e) {
    emit_error(err, "hypothesis", "", e.what(), 2);
    return 2;
  } catch (const NumericalError& e) {
    emit_error(err, "numerical", "", e.what(), 2);
    return 2;
  } catch (const nlohmann::json::exception& e) {
    emit_error(err, "validation", "json", e.what(), 1);
    return 1;
  } catch (const fs::filesystem_error& e) {
    emit_error(err, "validation", "path", e.what(), 1);
    return 1;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal curvature of sets: fields, boundary traces, classification and flows"};
  app.require_subcommand(1);
  RunConfig c;
  const std::map<std::string, std::string> blurb = {
      {"curvature-field", "curvature on a grid via FFT convolution"},
      {"curvature-boundary", "curvature (and optionally dH/de) along sampled boundary points"},
      {"classify", "ball / union of balls / not constant / inconclusive"},
      {"moving-plane", "reflection test over a set of plane directions"},
      {"flow", "threshold dynamics: heat (MBO) or nonlocal kernel"},
      {"ball-table", "H of balls over a range of radii"},
      {"kernel-check", "self-checks on kernel profiles"},
  };
  for (const std::string& name : subcommands()) {
    CLI::App* s = app.add_subcommand(name, blurb.count(name) ? blurb.at(name) : "");
    s->add_option("--kernel", c.kernel, "kernel spec JSON");
    s->add_option("--shape", c.shape, "shape spec JSON");
    s->add_option("--grid-h", c.grid_h, "grid spacing");
    s->add_option("--padding", c.padding, "grid padding around the shape");
    s->add_option("--tol", c.tol, "main tolerance (constancy, relative to ||J||_1)");
    s->add_option("--quad-tol", c.quad_tol, "quadrature tolerance relative to ||J||_1");
    s->add_option("--geom-tol", c.geom_tol, "geometric tolerance");
    s->add_option("--dirs", c.dirs, "number of plane directions");
    s->add_option("--out", c.out, "output directory");
    s->add_option("--seed", c.seed, "seed for randomized sampling");
    s->add_option("--threads", c.threads, "cap on worker threads");
    s->add_option("--samples", c.samples, "boundary samples");
    s->add_flag("--derivative", c.derivative, "also compute tangential derivatives");
    s->add_option("--eps", c.eps, "mollification length");
    s->add_option("--variant", c.variant, "flow variant: heat or nonlocal");
    s->add_option("--dt", c.dt, "flow time step");
    s->add_option("--steps", c.steps, "flow steps");
    s->add_flag("--save-masks", c.save_masks, "write a PGM mask per flow step");
    s->add_option("--r-min", c.r_min, "smallest radius of the ball table");
    s->add_option("--r-max", c.r_max, "largest radius of the ball table");
    s->add_option("--count", c.count, "number of radii in the ball table");
    s->add_option("--target", c.target, "curvature to invert with the ball table");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "validation", "arguments", e.what(), 1);
    return 1;
  }
  for (CLI::App* s : app.get_subcommands()) c.command = s->get_name();
  return run(c, out, err);
}

}  // namespace nlc
