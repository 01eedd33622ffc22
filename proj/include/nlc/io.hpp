#pragma once

#include "nlc/alexandrov.hpp"
#include "nlc/curvature.hpp"
#include "nlc/flow.hpp"
#include "nlc/geometry.hpp"
#include "nlc/kernels.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace nlc {

using Json = nlohmann::ordered_json;

// Kernel spec: {"family": ..., "n": 2, "r": 1.0, "alpha": 1.0, "alpha1": 1.0, "C": 1.0};
// missing fields take the defaults, r may be "inf". Validated.
KernelSpec kernel_from_json(const Json& j);
Json to_json(const KernelSpec& k);

// Shape spec, e.g. {"variant": "union_of_balls", "balls": [{"c": [0, 0], "R": 1.0}]}.
// Mask variants name a PGM file relative to `base`.
Shape shape_from_json(const Json& j, const std::filesystem::path& base = {});
Json to_json(const Shape& s);

Json read_json_file(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);

// PGM P5, 0 outside and 255 inside, first row is j = 0 (lowest y); the sidecar holds the grid.
void write_mask(const std::filesystem::path& pgm, const Mask& m);
Mask read_mask(const std::filesystem::path& pgm);
Json grid_json(const Grid& g);
Grid grid_from_json(const Json& j);

// Little-endian float64, x fastest, rows in ascending y, plus a JSON sidecar.
void write_field(const std::filesystem::path& raw, const CurvatureField& f);

// Shortest round-trip decimal.
std::string fmt(double v);

std::string boundary_csv(const BoundaryCurvature& bc);
std::string flow_csv(const FlowRun& run);
std::string ball_table_csv(const std::vector<double>& R, const std::vector<double>& H);

Json to_json(const MovingPlaneReport& r);
Json to_json(const ShapeVerdict& v);

}  // namespace nlc
