#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace nlc {

struct RunConfig {
  std::string command;
  std::filesystem::path kernel;  // kernel spec JSON
  std::filesystem::path shape;   // shape spec JSON
  double grid_h = -1;            // < 0: chosen from the shape
  double padding = -1;           // < 0: kernel support plus a few cells
  double tol = -1;               // command's main tolerance; < 0: its default
  double quad_tol = -1;          // relative to ||J||_1
  double geom_tol = -1;
  int dirs = 8;
  std::filesystem::path out = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int samples = 256;
  bool derivative = false;
  double eps = -1;
  // flow
  std::string variant = "heat";
  double dt = 1e-3;
  int steps = 100;
  bool save_masks = false;
  // ball-table
  double r_min = -1, r_max = -1;
  int count = 20;
  double target = std::numeric_limits<double>::quiet_NaN();
};

const std::vector<std::string>& subcommands();

// Returns 0 on success, 1 on validation errors, 2 when a numerical assumption fails; errors
// are reported as one JSON object on `err`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses argv (without running); same exit-code contract.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nlc
