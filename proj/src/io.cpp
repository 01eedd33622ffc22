#include "nlc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace nlc {

namespace fs = std::filesystem;

namespace {

double number(const Json& j, const char* name, double fallback) {
  if (!j.contains(name)) return fallback;
  const Json& v = j.at(name);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ValidationError(name, "expected a number, got \"" + s + "\"");
  }
  if (!v.is_number()) throw ValidationError(name, "expected a number");
  return v.get<double>();
}

double required(const Json& j, const char* name) {
  if (!j.contains(name)) throw ValidationError(name, "missing field");
  return number(j, name, 0);
}

Vec2 point(const Json& j, const char* name) {
  if (!j.contains(name)) throw ValidationError(name, "missing field");
  const Json& v = j.at(name);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(name, "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> numbers(const Json& j, const char* name) {
  if (!j.contains(name)) throw ValidationError(name, "missing field");
  const Json& v = j.at(name);
  if (!v.is_array()) throw ValidationError(name, "expected an array of numbers");
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) throw ValidationError(name, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Json pt(const Vec2& p) { return Json::array({p.x(), p.y()}); }

}  // namespace

KernelSpec kernel_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("kernel", "expected a JSON object");
  static const char* known[] = {"family", "n", "r", "alpha", "alpha1", "C"};
  for (const auto& [key, _] : j.items())
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return key == k; }))
      throw ValidationError(key, "unknown kernel field");
  KernelSpec k;
  if (!j.contains("family") || !j.at("family").is_string()) throw ValidationError("family", "missing or not a string");
  k.family = kernel_family_from_string(j.at("family").get<std::string>());
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer()) throw ValidationError("n", "expected an integer");
    k.n = j.at("n").get<int>();
  }
  k.r = number(j, "r", k.r);
  k.alpha = number(j, "alpha", k.alpha);
  k.alpha1 = number(j, "alpha1", k.alpha1);
  k.C = number(j, "C", k.C);
  validate(k);
  return k;
}

Json to_json(const KernelSpec& k) {
  Json j;
  j["family"] = to_string(k.family);
  j["n"] = k.n;
  j["r"] = std::isfinite(k.r) ? Json(k.r) : Json("inf");
  j["alpha"] = k.alpha;
  j["alpha1"] = k.alpha1;
  j["C"] = k.C;
  return j;
}

Shape shape_from_json(const Json& j, const fs::path& base) {
  if (!j.is_object()) throw ValidationError("shape", "expected a JSON object");
  if (!j.contains("variant") || !j.at("variant").is_string()) throw ValidationError("variant", "missing or not a string");
  const std::string v = j.at("variant").get<std::string>();
  Shape s;
  if (v == "ball") {
    s = Ball{point(j, "c"), required(j, "R")};
    if (!(s.as<Ball>()->R > 0)) throw ValidationError("R", "radius must be positive");
  } else if (v == "union_of_balls") {
    if (!j.contains("balls") || !j.at("balls").is_array()) throw ValidationError("balls", "expected an array");
    BallUnion u;
    for (const Json& b : j.at("balls")) {
      u.balls.push_back({point(b, "c"), required(b, "R")});
      if (!(u.balls.back().R > 0)) throw ValidationError("R", "radius must be positive");
    }
    s = std::move(u);
  } else if (v == "ellipse") {
    Ellipse e{point(j, "c"), required(j, "a"), required(j, "b"), number(j, "angle", 0)};
    if (!(e.a > 0 && e.b > 0)) throw ValidationError("a", "semi-axes must be positive");
    s = e;
  } else if (v == "polygon") {
    if (!j.contains("vertices") || !j.at("vertices").is_array()) throw ValidationError("vertices", "expected an array");
    std::vector<Vec2> pts;
    for (const Json& p : j.at("vertices")) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("vertices", "expected [x, y] pairs");
      pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    s = make_polygon(std::move(pts));
  } else if (v == "rounded_square") {
    s = rounded_square(point(j, "c"), required(j, "side"), required(j, "radius"),
                       static_cast<int>(number(j, "arc_points", 32)));
  } else if (v == "star") {
    const auto amp = numbers(j, "amplitudes");
    std::vector<double> phase = j.contains("phases") ? numbers(j, "phases") : std::vector<double>(amp.size(), 0.0);
    s = star_polygon(point(j, "c"), required(j, "R0"), amp, phase, static_cast<int>(number(j, "points", 512)));
  } else if (v == "graph_patch") {
    const auto w = numbers(j, "window");
    if (w.size() != 2) throw ValidationError("window", "expected [x0, x1]");
    s = make_graph_patch(w[0], w[1], numbers(j, "f"), number(j, "M", 0.99));
  } else if (v == "half_plane") {
    Vec2 n = point(j, "normal");
    if (!(n.norm() > 0)) throw ValidationError("normal", "must be nonzero");
    s = HalfPlane{n.normalized(), number(j, "offset", 0) / n.norm()};
  } else if (v == "mask") {
    if (!j.contains("pgm") || !j.at("pgm").is_string()) throw ValidationError("pgm", "missing mask file");
    s = read_mask(base / j.at("pgm").get<std::string>());
  } else {
    throw ValidationError("variant", "unknown shape variant \"" + v + "\"");
  }
  s.holder_beta = number(j, "holder_beta", 1.0);
  if (s.holder_beta < 0) throw ValidationError("holder_beta", "must be nonnegative");
  if (j.contains("slope_bound")) {
    s.slope_bound = number(j, "slope_bound", 0);
    if (!(s.slope_bound >= 0 && s.slope_bound < 1)) throw ValidationError("slope_bound", "must lie in [0, 1)");
  } else if (s.as<GraphPatch>()) {
    s.slope_bound = number(j, "M", 0.99);
  }
  return s;
}

Json to_json(const Shape& s) {
  Json j;
  if (const auto* b = s.as<Ball>()) {
    j["variant"] = "ball";
    j["c"] = pt(b->center);
    j["R"] = b->R;
  } else if (const auto* u = s.as<BallUnion>()) {
    j["variant"] = "union_of_balls";
    j["balls"] = Json::array();
    for (const Ball& b : u->balls) j["balls"].push_back({{"c", pt(b.center)}, {"R", b.R}});
  } else if (const auto* e = s.as<Ellipse>()) {
    j["variant"] = "ellipse";
    j["c"] = pt(e->center);
    j["a"] = e->a;
    j["b"] = e->b;
    j["angle"] = e->angle;
  } else if (const auto* p = s.as<Polygon>()) {
    j["variant"] = "polygon";
    j["vertices"] = Json::array();
    for (const Vec2& v : p->vertices) j["vertices"].push_back(pt(v));
  } else if (const auto* g = s.as<GraphPatch>()) {
    j["variant"] = "graph_patch";
    j["window"] = {g->x0, g->x1};
    j["f"] = g->f;
  } else if (const auto* h = s.as<HalfPlane>()) {
    j["variant"] = "half_plane";
    j["normal"] = pt(h->normal);
    j["offset"] = h->offset;
  } else if (const auto* m = s.as<MaskShape>()) {
    j["variant"] = "mask";
    j["grid"] = grid_json(m->mask->grid);
    j["count"] = m->mask->count();
  } else {
    j["variant"] = s.kind();
  }
  j["holder_beta"] = s.holder_beta;
  j["slope_bound"] = s.slope_bound;
  return j;
}

Json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("path", "cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("json", p.filename().string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("out", "cannot write " + p.string());
  out << text;
}

Json grid_json(const Grid& g) {
  return Json{{"origin", pt(g.origin)}, {"h", g.h}, {"nx", g.nx}, {"ny", g.ny}};
}

Grid grid_from_json(const Json& j) {
  Grid g;
  g.origin = point(j, "origin");
  g.h = required(j, "h");
  if (!j.contains("nx") || !j.contains("ny")) throw ValidationError("nx", "missing grid extents");
  g.nx = j.at("nx").get<int>();
  g.ny = j.at("ny").get<int>();
  if (!(g.h > 0) || g.nx < 1 || g.ny < 1) throw ValidationError("grid", "invalid grid");
  return g;
}

void write_mask(const fs::path& pgm, const Mask& m) {
  std::string data = "P5\n" + std::to_string(m.grid.nx) + " " + std::to_string(m.grid.ny) + "\n255\n";
  data.reserve(data.size() + m.grid.size());
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i) data.push_back(m.bits(i, j) ? char(255) : char(0));
  write_text(pgm, data);
  Json side = grid_json(m.grid);
  side["rows"] = "first row is j = 0 (lowest y)";
  write_text(fs::path(pgm).replace_extension(".json"), side.dump(2) + "\n");
}

Mask read_mask(const fs::path& pgm) {
  std::ifstream in(pgm, std::ios::binary);
  if (!in) throw ValidationError("pgm", "cannot open " + pgm.string());
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  if (token() != "P5") throw ValidationError("pgm", "expected a binary (P5) PGM");
  int nx = 0, ny = 0, maxv = 0;
  try {
    nx = std::stoi(token());
    ny = std::stoi(token());
    maxv = std::stoi(token());
  } catch (const std::exception&) {
    throw ValidationError("pgm", "malformed PGM header");
  }
  if (nx < 1 || ny < 1 || maxv != 255) throw ValidationError("pgm", "expected an 8-bit PGM");
  std::string data(static_cast<std::size_t>(nx) * ny, '\0');
  if (!in.read(data.data(), data.size())) throw ValidationError("pgm", "truncated PGM data");
  Grid g = grid_from_json(read_json_file(fs::path(pgm).replace_extension(".json")));
  if (g.nx != nx || g.ny != ny) throw ValidationError("pgm", "sidecar grid does not match the image size");
  Bits bits(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) bits(i, j) = static_cast<unsigned char>(data[std::size_t(j) * nx + i]) >= 128 ? 1 : 0;
  return make_mask(g, std::move(bits));
}

void write_field(const fs::path& raw, const CurvatureField& f) {
  const Grid& g = f.grid;
  std::string data(g.size() * sizeof(double), '\0');
  std::size_t at = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = f.values(i, j);
      unsigned char b[8];
      std::uint64_t bitsv;
      std::memcpy(&bitsv, &v, 8);
      for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bitsv >> (8 * k));
      std::memcpy(&data[at], b, 8);
      at += 8;
    }
  write_text(raw, data);
  Json side = grid_json(g);
  side["dtype"] = "float64 little-endian";
  side["layout"] = "row-major, x fastest, rows in ascending y";
  side["kernel"] = to_json(f.kernel);
  side["sign_convention"] = f.sign_convention;
  write_text(fs::path(raw).replace_extension(".json"), side.dump(2) + "\n");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string boundary_csv(const BoundaryCurvature& bc) {
  std::ostringstream o;
  o << "s,x1,x2,H,dH_de\n";
  for (std::size_t i = 0; i < bc.samples.size(); ++i) {
    const auto& q = bc.samples[i];
    o << fmt(q.s) << ',' << fmt(q.x.x()) << ',' << fmt(q.x.y()) << ',' << fmt(bc.H[i]) << ','
      << fmt(bc.dH.empty() ? std::numeric_limits<double>::quiet_NaN() : bc.dH[i]) << '\n';
  }
  return o.str();
}

std::string flow_csv(const FlowRun& run) {
  std::ostringstream o;
  o << "k,t,area,perimeter,centroid_x,centroid_y\n";
  for (const auto& r : run.series)
    o << r.k << ',' << fmt(r.t) << ',' << fmt(r.diag.area) << ',' << fmt(r.diag.perimeter) << ','
      << fmt(r.diag.centroid.x()) << ',' << fmt(r.diag.centroid.y()) << '\n';
  return o.str();
}

std::string ball_table_csv(const std::vector<double>& R, const std::vector<double>& H) {
  std::ostringstream o;
  o << "R,H\n";
  for (std::size_t i = 0; i < R.size(); ++i) o << fmt(R[i]) << ',' << fmt(H[i]) << '\n';
  return o.str();
}

Json to_json(const MovingPlaneReport& r) {
  Json j;
  j["e"] = pt(r.e);
  j["h"] = r.h;
  j["lambda"] = r.lambda;
  j["contact"] = to_string(r.contact);
  j["x0"] = pt(r.x0);
  j["windowed_sym_diff"] = r.windowed_sym_diff;
  j["sym_diff"] = r.sym_diff;
  j["perimeter"] = r.perimeter;
  j["chain"] = Json::array();
  for (const Vec2& z : r.chain) j["chain"].push_back(pt(z));
  j["min_separation"] = r.min_separation;
  j["chain_covers"] = r.chain_covers;
  j["components"] = r.components;
  j["component_symmetric"] = r.component_symmetric;
  j["influence"] = Json::array();
  for (const auto& [a, b] : r.influence) j["influence"].push_back({a, b});
  j["stages"] = Json::array();
  for (const auto& st : r.stages)
    j["stages"].push_back({{"group", st.group},
                           {"lambda", st.plane.lambda},
                           {"contact", to_string(st.plane.contact)},
                           {"sym_diff", st.sym_diff},
                           {"symmetric", st.symmetric}});
  j["inconclusive"] = r.inconclusive;
  j["passes"] = r.passes();
  return j;
}

Json to_json(const ShapeVerdict& v) {
  Json j;
  j["verdict"] = to_string(v.kind);
  if (!v.reason.empty()) j["reason"] = v.reason;
  j["balls"] = Json::array();
  for (const auto& b : v.balls) j["balls"].push_back({{"c", pt(b.center)}, {"R", b.R}, {"residual", b.residual}});
  j["min_gap"] = v.min_gap;
  j["max_deviation"] = v.max_deviation;
  j["constancy"] = {{"is_constant", v.constancy.is_constant},
                    {"mean", v.constancy.mean},
                    {"max_dev", v.constancy.max_dev},
                    {"l1", v.constancy.l1},
                    {"tol", v.constancy.tol}};
  j["tol"] = v.tol;
  j["tol_geom"] = v.tol_geom;
  j["directions"] = Json::array();
  for (const auto& d : v.directions)
    j["directions"].push_back({{"e", pt(d.e)},
                               {"lambda", d.lambda},
                               {"contact", to_string(d.contact)},
                               {"sym_diff", d.sym_diff},
                               {"windowed_sym_diff", d.windowed_sym_diff},
                               {"passes", d.passes()}});
  return j;
}

}  // namespace nlc
