#include "sngp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sngp/rng.hpp"

namespace sngp::data {

namespace {

double min_distance(double x, double y, const Matrix& ref) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ref.rows(); ++i) {
    const double dx = x - ref(i, 0);
    const double dy = y - ref(i, 1);
    best = std::min(best, dx * dx + dy * dy);
  }
  return std::sqrt(best);
}

// Gaussian cluster rejection-sampled to keep `margin` away from the IND data.
Matrix sample_ood_cluster(Rng& rng, const Matrix& ind, double cx, double cy, double sd, std::size_t n,
                          double margin) {
  Matrix out(n, 2);
  std::size_t filled = 0;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * (n + 1);
  while (filled < n) {
    require(++attempts <= max_attempts, "OOD cluster overlaps the training data; cannot honour the margin");
    const double x = cx + sd * rng.normal();
    const double y = cy + sd * rng.normal();
    if (min_distance(x, y, ind) < margin) continue;
    out(filled, 0) = x;
    out(filled, 1) = y;
    ++filled;
  }
  return out;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

double parse_double(const std::string& field, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size() || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": not a finite number: '" + field + "'");
  return v;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Dataset2D gen_two_ovals(std::size_t n_per_class, std::uint64_t seed, const TwoOvalsParams& params) {
  require(n_per_class >= 1, "gen_two_ovals: n_per_class must be >= 1");
  const Rng root(seed);
  Rng ind = root.derive("ovals");
  Dataset2D ds;
  ds.name = "two_ovals";
  ds.seed = seed;
  ds.points = Matrix(2 * n_per_class, 2);
  ds.labels.resize(2 * n_per_class);
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = i < n_per_class ? 0 : 1;
    const double cx = label == 0 ? -params.center_x : params.center_x;
    ds.points(i, 0) = cx + params.sd_x * ind.normal();
    ds.points(i, 1) = params.sd_y * ind.normal();
    ds.labels[i] = label;
  }
  Rng ood = root.derive("ood");
  ds.ood_points = sample_ood_cluster(ood, ds.points, params.ood_x, params.ood_y, params.ood_sd, params.n_ood,
                                     params.ood_margin);
  return ds;
}

Dataset2D gen_two_moons(std::size_t n_per_class, double noise_sd, std::uint64_t seed, const TwoMoonsParams& params) {
  require(n_per_class >= 1, "gen_two_moons: n_per_class must be >= 1");
  require(noise_sd >= 0.0, "gen_two_moons: noise must be >= 0");
  const Rng root(seed);
  Rng ind = root.derive("moons");
  Dataset2D ds;
  ds.name = "two_moons";
  ds.seed = seed;
  ds.points = Matrix(2 * n_per_class, 2);
  ds.labels.resize(2 * n_per_class);
  const double step = n_per_class > 1 ? std::numbers::pi / static_cast<double>(n_per_class - 1) : 0.0;
  for (std::size_t i = 0; i < n_per_class; ++i) {
    const double t = step * static_cast<double>(i);
    ds.points(i, 0) = std::cos(t);
    ds.points(i, 1) = std::sin(t);
    ds.labels[i] = 0;
    const std::size_t j = n_per_class + i;
    ds.points(j, 0) = 1.0 - std::cos(t);
    ds.points(j, 1) = 0.5 - std::sin(t);
    ds.labels[j] = 1;
  }
  for (double& v : ds.points.flat()) v += noise_sd * ind.normal();
  Rng ood = root.derive("ood");
  ds.ood_points = sample_ood_cluster(ood, ds.points, params.ood_x, params.ood_y, params.ood_sd, params.n_ood,
                                     params.ood_margin);
  return ds;
}

EvalGrid gen_grid(double x_min, double x_max, double y_min, double y_max, std::size_t nx, std::size_t ny) {
  require(nx >= 2 && ny >= 2, "gen_grid: need at least 2 points per axis");
  require(x_max > x_min && y_max > y_min, "gen_grid: empty range");
  EvalGrid g{x_min, x_max, y_min, y_max, nx, ny, Matrix(nx * ny, 2)};
  for (std::size_t iy = 0; iy < ny; ++iy) {
    const double y = y_min + (y_max - y_min) * static_cast<double>(iy) / static_cast<double>(ny - 1);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double x = x_min + (x_max - x_min) * static_cast<double>(ix) / static_cast<double>(nx - 1);
      g.points(iy * nx + ix, 0) = x;
      g.points(iy * nx + ix, 1) = y;
    }
  }
  return g;
}

EvalGrid parse_grid(const std::string& spec) {
  const auto axes = split_commas(spec);
  if (axes.size() != 2) throw ParseError("grid spec must look like x0:x1:nx,y0:y1:ny, got '" + spec + "'");
  double lo[2], hi[2];
  std::size_t count[2];
  for (int a = 0; a < 2; ++a) {
    std::vector<std::string> parts;
    std::istringstream ss(axes[a]);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ParseError("grid axis must look like lo:hi:n, got '" + axes[a] + "'");
    lo[a] = parse_double(parts[0], 1);
    hi[a] = parse_double(parts[1], 1);
    const double n = parse_double(parts[2], 1);
    if (n < 2 || n != std::floor(n) || n > 1e5) throw ParseError("grid axis count must be an integer >= 2");
    count[a] = static_cast<std::size_t>(n);
    if (!(hi[a] > lo[a])) throw ParseError("grid axis needs lo < hi, got '" + axes[a] + "'");
  }
  return gen_grid(lo[0], hi[0], lo[1], hi[1], count[0], count[1]);
}

Vector distance_to_set(const Matrix& queries, const Matrix& reference) {
  require(queries.cols() == 2 && reference.cols() == 2, "distance_to_set: expects 2-D points");
  require(reference.rows() > 0, "distance_to_set: empty reference set");
  Vector d(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < queries.rows(); ++i) d[i] = min_distance(queries(i, 0), queries(i, 1), reference);
  return d;
}

void write_dataset_csv(std::ostream& out, const Dataset2D& ds, const std::vector<std::string>& comments) {
  write_comments(out, comments);
  out << "x1,x2,label\n";
  for (std::size_t i = 0; i < ds.points.rows(); ++i)
    out << fmt17(ds.points(i, 0)) << ',' << fmt17(ds.points(i, 1)) << ',' << ds.labels[i] << '\n';
  for (std::size_t i = 0; i < ds.ood_points.rows(); ++i)
    out << fmt17(ds.ood_points(i, 0)) << ',' << fmt17(ds.ood_points(i, 1)) << ",-1\n";
}

Dataset2D read_dataset_csv(std::istream& in, const std::string& name) {
  std::vector<double> ind, ood;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "x1,x2,label")
        throw ParseError("line " + std::to_string(line_no) + ": expected header 'x1,x2,label'");
      header_seen = true;
      continue;
    }
    const auto f = split_commas(line);
    if (f.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields, got " + std::to_string(f.size()));
    const double x = parse_double(f[0], line_no);
    const double y = parse_double(f[1], line_no);
    const double l = parse_double(f[2], line_no);
    if (l != std::floor(l) || l < -1 || l > 1e6)
      throw ParseError("line " + std::to_string(line_no) + ": label must be an integer >= -1");
    if (l < 0) {
      ood.push_back(x);
      ood.push_back(y);
    } else {
      ind.push_back(x);
      ind.push_back(y);
      labels.push_back(static_cast<int>(l));
    }
  }
  if (!header_seen) throw ParseError("missing header 'x1,x2,label'");
  if (labels.empty()) throw ParseError("dataset has no labelled rows");
  Dataset2D ds;
  ds.name = name;
  ds.points = Matrix(labels.size(), 2, std::move(ind));
  ds.labels = std::move(labels);
  const std::size_t n_ood = ood.size() / 2;
  ds.ood_points = Matrix(n_ood, 2, std::move(ood));
  return ds;
}

void write_dataset_csv_file(const std::string& path, const Dataset2D& ds, const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_dataset_csv(out, ds, comments);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset2D read_dataset_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_dataset_csv(in, path);
}

void write_surface_csv(std::ostream& out, const Matrix& points, std::span<const double> values,
                       const std::vector<std::string>& comments) {
  require(points.rows() == values.size() && points.cols() == 2, "write_surface_csv: shape mismatch");
  write_comments(out, comments);
  out << "x1,x2,value\n";
  for (std::size_t i = 0; i < points.rows(); ++i)
    out << fmt17(points(i, 0)) << ',' << fmt17(points(i, 1)) << ',' << fmt17(values[i]) << '\n';
}

void write_pgm(std::ostream& out, const EvalGrid& grid, std::span<const double> values) {
  require(values.size() == grid.nx * grid.ny, "write_pgm: value count does not match the grid");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  out << "P2\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  for (std::size_t r = 0; r < grid.ny; ++r) {
    const std::size_t iy = grid.ny - 1 - r;
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const double v = values[iy * grid.nx + ix];
      const long level = range > 0.0 ? std::lround(255.0 * (v - lo) / range) : 0;
      out << level << (ix + 1 == grid.nx ? '\n' : ' ');
    }
  }
}

}  // namespace sngp::data
