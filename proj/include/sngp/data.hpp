#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sngp/linalg.hpp"

namespace sngp::data {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset2D {
  Matrix points;  // N x 2
  std::vector<int> labels;
  Matrix ood_points;  // M x 2, possibly empty
  std::string name;
  std::uint64_t seed = 0;

  std::size_t size() const { return labels.size(); }
};

/// Construction constants for the two-ovals benchmark: two flat Gaussian
/// clusters at (-center_x, 0) and (+center_x, 0), plus an OOD cluster.
struct TwoOvalsParams {
  double center_x = 1.5;
  double sd_x = 0.4;
  double sd_y = 0.08;
  double ood_x = 0.0;
  double ood_y = 2.0;
  double ood_sd = 0.1;
  std::size_t n_ood = 200;
  double ood_margin = 0.5;
};

/// Two interleaved half circles: class 0 on (cos t, sin t), class 1 on
/// (1 - cos t, 0.5 - sin t), t evenly spaced on [0, pi], plus Gaussian noise.
/// The OOD cluster sits below-right of the lower moon.
struct TwoMoonsParams {
  double ood_x = 2.5;
  double ood_y = -1.75;
  double ood_sd = 0.1;
  std::size_t n_ood = 200;
  double ood_margin = 0.5;
};

inline constexpr double kDefaultMoonNoise = 0.1;

Dataset2D gen_two_ovals(std::size_t n_per_class, std::uint64_t seed, const TwoOvalsParams& params = {});
Dataset2D gen_two_moons(std::size_t n_per_class, double noise_sd, std::uint64_t seed,
                        const TwoMoonsParams& params = {});

/// Row-major grid: y varies slowest, x fastest.
struct EvalGrid {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  std::size_t nx = 2, ny = 2;
  Matrix points;  // (nx * ny) x 2
};

EvalGrid gen_grid(double x_min, double x_max, double y_min, double y_max, std::size_t nx, std::size_t ny);
/// Parses "x0:x1:nx,y0:y1:ny".
EvalGrid parse_grid(const std::string& spec);
inline constexpr const char* kDefaultGridSpec = "-3.5:3.5:100,-2.5:2.5:100";

/// Minimum Euclidean distance from each query row to any reference row.
Vector distance_to_set(const Matrix& queries, const Matrix& reference);

/// Dataset CSV: optional `# ` comment lines, header `x1,x2,label`, rows with
/// label -1 are OOD. Values are written with 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset2D& ds, const std::vector<std::string>& comments = {});
Dataset2D read_dataset_csv(std::istream& in, const std::string& name = "csv");
void write_dataset_csv_file(const std::string& path, const Dataset2D& ds, const std::vector<std::string>& comments = {});
Dataset2D read_dataset_csv_file(const std::string& path);

/// Surface CSV: header `x1,x2,value`.
void write_surface_csv(std::ostream& out, const Matrix& points, std::span<const double> values,
                       const std::vector<std::string>& comments = {});
/// Plain PGM (P2), values linearly mapped from [min, max] to 0..255; grid rows
/// are written top (y_max) to bottom.
void write_pgm(std::ostream& out, const EvalGrid& grid, std::span<const double> values);

}  // namespace sngp::data
