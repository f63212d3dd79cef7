#include "stabclt/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "stabclt/error.hpp"

namespace stabclt {

PointCloud::PointCloud(std::size_t dimension) : dim_(dimension) {
  if (dimension == 0) throw InputError("point cloud dimension must be >= 1");
}

PointCloud::PointCloud(std::size_t dimension, std::vector<double> flat_coords)
    : dim_(dimension), coords_(std::move(flat_coords)) {
  if (dimension == 0) throw InputError("point cloud dimension must be >= 1");
  if (coords_.size() % dimension != 0) throw InputError("flat coordinate count is not a multiple of the dimension");
  for (double c : coords_) {
    if (!std::isfinite(c)) throw InputError("point coordinates must be finite");
  }
}

void PointCloud::push_back(std::span<const double> x) {
  if (x.size() != dim_) throw InputError("point cloud: dimension mismatch on insert");
  coords_.insert(coords_.end(), x.begin(), x.end());
}

PointCloud PointCloud::prefix(std::size_t count) const {
  count = std::min(count, size());
  return PointCloud(dim_, std::vector<double>(coords_.begin(), coords_.begin() + static_cast<std::ptrdiff_t>(count * dim_)));
}

PointCloud PointCloud::restricted_to(const Box& window) const {
  if (window.dimension() != dim_) throw InputError("restriction window has the wrong dimension");
  PointCloud out(dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    if (window.contains((*this)[i])) out.push_back((*this)[i]);
  }
  return out;
}

PointCloud PointCloud::translated(std::span<const double> shift) const {
  if (shift.size() != dim_) throw InputError("translation vector has the wrong dimension");
  std::vector<double> coords = coords_;
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] += shift[i % dim_];
  return PointCloud(dim_, std::move(coords));
}

PointCloud scale_cloud(const PointCloud& cloud, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InputError("scale factor must be positive");
  std::vector<double> coords = cloud.flat();
  for (double& c : coords) c *= factor;
  return PointCloud(cloud.dimension(), std::move(coords));
}

DensityGrid::DensityGrid(Box support, std::vector<std::size_t> cells_per_axis, std::vector<double> values)
    : support_(std::move(support)), cells_(std::move(cells_per_axis)), values_(std::move(values)) {
  const std::size_t d = support_.dimension();
  if (cells_.size() != d) throw InputError("density: cells_per_axis must have one entry per axis");
  std::size_t count = 1;
  for (std::size_t c : cells_) {
    if (c == 0) throw InputError("density: cells_per_axis entries must be positive");
    count *= c;
  }
  if (values_.size() != count) {
    throw InputError("density: expected " + std::to_string(count) + " values, got " + std::to_string(values_.size()));
  }
  cell_sides_.resize(d);
  cell_volume_ = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    cell_sides_[a] = support_.side_lengths()[a] / static_cast<double>(cells_[a]);
    cell_volume_ *= cell_sides_[a];
  }
  cumulative_.reserve(count);
  double running = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("density values must be finite and nonnegative");
    running += v * cell_volume_;
    cumulative_.push_back(running);
    sup_ = std::max(sup_, v);
  }
  total_mass_ = running;
}

DensityGrid DensityGrid::constant(Box support, double value) {
  const std::size_t d = support.dimension();
  return DensityGrid(std::move(support), std::vector<std::size_t>(d, 1), {value});
}

Box DensityGrid::cell_box(std::size_t cell) const {
  const std::size_t d = dimension();
  std::vector<double> corner(d);
  std::size_t rest = cell;
  for (std::size_t a = d; a-- > 0;) {
    const std::size_t idx = rest % cells_[a];
    rest /= cells_[a];
    corner[a] = support_.lower(a) + static_cast<double>(idx) * cell_sides_[a];
  }
  return Box(Point(std::move(corner)), cell_sides_);
}

double DensityGrid::value_at(std::span<const double> x) const {
  if (!support_.contains(x)) return 0.0;
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dimension(); ++a) {
    auto idx = static_cast<std::size_t>((x[a] - support_.lower(a)) / cell_sides_[a]);
    idx = std::min(idx, cells_[a] - 1);
    flat = flat * cells_[a] + idx;
  }
  return values_[flat];
}

bool DensityGrid::same_grid(const DensityGrid& other) const {
  return support_ == other.support_ && cells_ == other.cells_;
}

DensityGrid DensityGrid::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw InputError("density scale factor must be finite and >= 0");
  std::vector<double> values = values_;
  for (double& v : values) v *= factor;
  return DensityGrid(support_, cells_, std::move(values));
}

double DensityGrid::l1_distance(const DensityGrid& other) const {
  if (!same_grid(other)) throw InputError("l1_distance: densities live on different grids");
  double sum = 0.0;
  for (std::size_t c = 0; c < values_.size(); ++c) sum += std::abs(values_[c] - other.values_[c]);
  return sum * cell_volume_;
}

namespace {

void push_uniform_in(const Box& cell, RngStream& rng, PointCloud& out, std::vector<double>& scratch) {
  for (std::size_t a = 0; a < cell.dimension(); ++a) scratch[a] = rng.uniform(cell.lower(a), cell.upper(a));
  out.push_back(scratch);
}

}  // namespace

PointCloud sample_binomial(const DensityGrid& f, std::size_t n, RngStream& rng) {
  if (!(f.total_mass() > 0.0)) throw InputError("sample_binomial: density has zero total mass");
  PointCloud out(f.dimension());
  out.reserve(n);
  std::vector<double> scratch(f.dimension());
  for (std::size_t i = 0; i < n; ++i) {
    const double target = rng.uniform() * f.total_mass();
    auto it = std::upper_bound(f.cumulative_.begin(), f.cumulative_.end(), target);
    if (it == f.cumulative_.end()) {
      // target rounded up to the total: take the last cell with mass
      do --it;
      while (f.values_[static_cast<std::size_t>(it - f.cumulative_.begin())] == 0.0);
    }
    push_uniform_in(f.cell_box(static_cast<std::size_t>(it - f.cumulative_.begin())), rng, out, scratch);
  }
  return out;
}

PointCloud sample_poissonized(const DensityGrid& f, double n, RngStream& rng) {
  if (!(n >= 0.0)) throw InputError("sample_poissonized: n must be >= 0");
  if (!(f.total_mass() > 0.0)) throw InputError("sample_poissonized: density has zero total mass");
  const std::uint64_t count = rng.poisson(n);
  return sample_binomial(f, static_cast<std::size_t>(count), rng);
}

PointCloud sample_homogeneous(double lambda, const Box& box, RngStream& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("sample_homogeneous: lambda must be finite and >= 0");
  PointCloud out(box.dimension());
  const std::uint64_t count = rng.poisson(lambda * box.volume());
  out.reserve(count);
  std::vector<double> scratch(box.dimension());
  for (std::uint64_t i = 0; i < count; ++i) push_uniform_in(box, rng, out, scratch);
  return out;
}

PointCloud sample_inhomogeneous(const DensityGrid& intensity, RngStream& rng) {
  PointCloud out(intensity.dimension());
  std::vector<double> scratch(intensity.dimension());
  for (std::size_t c = 0; c < intensity.cell_count(); ++c) {
    const double value = intensity.values()[c];
    if (value == 0.0) continue;
    const std::uint64_t count = rng.poisson(value * intensity.cell_volume());
    if (count == 0) continue;
    const Box cell = intensity.cell_box(c);
    for (std::uint64_t i = 0; i < count; ++i) push_uniform_in(cell, rng, out, scratch);
  }
  return out;
}

CoupledPair sample_coupled_pair(const DensityGrid& f, const DensityGrid& g, RngStream& rng) {
  if (!f.same_grid(g)) throw InputError("sample_coupled_pair: densities must share support and grid");
  CoupledPair pair{PointCloud(f.dimension()), PointCloud(f.dimension()), 0};
  std::vector<double> scratch(f.dimension());
  for (std::size_t c = 0; c < f.cell_count(); ++c) {
    const double fv = f.values()[c];
    const double gv = g.values()[c];
    const double top = std::max(fv, gv);
    if (top == 0.0) continue;
    const std::uint64_t count = rng.poisson(top * f.cell_volume());
    if (count == 0) continue;
    const Box cell = f.cell_box(c);
    for (std::uint64_t i = 0; i < count; ++i) {
      for (std::size_t a = 0; a < cell.dimension(); ++a) scratch[a] = rng.uniform(cell.lower(a), cell.upper(a));
      const double height = rng.uniform(0.0, top);
      const bool under_f = height < fv;
      const bool under_g = height < gv;
      if (under_f) pair.first.push_back(scratch);
      if (under_g) pair.second.push_back(scratch);
      if (under_f != under_g) ++pair.band_points;
    }
  }
  return pair;
}

nlohmann::json box_to_json(const Box& box) {
  return {{"min", std::vector<double>(box.min_corner().coords().begin(), box.min_corner().coords().end())},
          {"sides", box.side_lengths()}};
}

Box box_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("min") || !j.contains("sides")) {
    throw InputError("box must be an object with \"min\" and \"sides\" arrays");
  }
  return Box(Point(j.at("min").get<std::vector<double>>()), j.at("sides").get<std::vector<double>>());
}

nlohmann::json density_to_json(const DensityGrid& f) {
  return {{"support", box_to_json(f.support())}, {"cells_per_axis", f.cells_per_axis()}, {"values", f.values()}};
}

DensityGrid density_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("density must be a JSON object");
  for (const char* key : {"support", "cells_per_axis", "values"}) {
    if (!j.contains(key)) throw InputError(std::string("density is missing \"") + key + "\"");
  }
  return DensityGrid(box_from_json(j.at("support")), j.at("cells_per_axis").get<std::vector<std::size_t>>(),
                     j.at("values").get<std::vector<double>>());
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  for (std::size_t a = 0; a < cloud.dimension(); ++a) out << (a ? ",x" : "x") << a;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t a = 0; a < cloud.dimension(); ++a) out << (a ? "," : "") << cloud[i][a];
    out << '\n';
  }
}

PointCloud read_cloud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("point CSV: missing header");
  const auto dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
  PointCloud cloud(dim);
  std::vector<double> row;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    row.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("point CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != dim) throw InputError("point CSV line " + std::to_string(line_no) + ": wrong column count");
    cloud.push_back(row);
  }
  return cloud;
}

}  // namespace stabclt
