#include "prismdg/column_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prismdg/errors.hpp"

namespace prismdg {

LayerPolicy LayerPolicy::uniform(int n) {
  LayerPolicy p;
  p.mode = Mode::UniformSigma;
  p.layers = n;
  return p;
}

LayerPolicy LayerPolicy::depth_thresholded(std::vector<std::pair<double, int>> thresholds) {
  LayerPolicy p;
  p.mode = Mode::DepthThresholded;
  std::sort(thresholds.begin(), thresholds.end());
  p.thresholds = std::move(thresholds);
  return p;
}

int LayerPolicy::count_for_depth(double depth) const {
  int n = layers;
  if (mode == Mode::DepthThresholded) {
    if (thresholds.empty()) throw ConfigError("depth-thresholded layer policy has no thresholds");
    n = thresholds.front().second;
    for (const auto& [d, count] : thresholds) {
      if (depth >= d) n = count;
    }
  }
  if (n < 1) throw ConfigError("layer count must be >= 1 (got " + std::to_string(n) + ")");
  return n;
}

int ColumnGrid::max_layers() const {
  return layers_.empty() ? 0 : *std::max_element(layers_.begin(), layers_.end());
}

bool ColumnGrid::conforming() const {
  for (const Edge& e : mesh_->edges()) {
    if (e.right >= 0 && layers_[e.left] != layers_[e.right]) return false;
  }
  return true;
}

void ColumnGrid::require_conforming() const {
  for (const Edge& e : mesh_->edges()) {
    if (e.right >= 0 && layers_[e.left] != layers_[e.right]) {
      throw NonConformingLayers("columns " + std::to_string(e.left) + " (" +
                                std::to_string(layers_[e.left]) + " layers) and " +
                                std::to_string(e.right) + " (" + std::to_string(layers_[e.right]) +
                                " layers) share an edge");
    }
  }
}

double ColumnGrid::jz(int prism, int h) const {
  const int c = column_of_[prism];
  const int l = prism - offset_[c];
  return 0.5 * (z(c, l, h) - z(c, l + 1, h));
}

double ColumnGrid::jz_at(int prism, double xi, double eta) const {
  return (1.0 - xi - eta) * jz(prism, 0) + xi * jz(prism, 1) + eta * jz(prism, 2);
}

double ColumnGrid::mean_height(int prism) const {
  return 2.0 * (jz(prism, 0) + jz(prism, 1) + jz(prism, 2)) / 3.0;
}

namespace {

Vec2 face_slope(const Mesh2D& mesh, int col, double z0, double z1, double z2) {
  const auto g = mesh.basis_gradients(col);
  return z0 * g[0] + z1 * g[1] + z2 * g[2];
}

}  // namespace

Vec2 ColumnGrid::top_slope(int prism) const {
  const int c = column_of_[prism];
  const int l = prism - offset_[c];
  return face_slope(*mesh_, c, z(c, l, 0), z(c, l, 1), z(c, l, 2));
}

Vec2 ColumnGrid::bottom_slope(int prism) const {
  const int c = column_of_[prism];
  const int l = prism - offset_[c] + 1;
  return face_slope(*mesh_, c, z(c, l, 0), z(c, l, 1), z(c, l, 2));
}

Vec2 ColumnGrid::slope(int prism, double zeta) const {
  return 0.5 * (1.0 + zeta) * top_slope(prism) + 0.5 * (1.0 - zeta) * bottom_slope(prism);
}

Vec3 ColumnGrid::m_vector(int prism, double xi, double eta, double zeta) const {
  const double jzv = jz_at(prism, xi, eta);
  const Vec2 s = slope(prism, zeta);
  return {-s.x / jzv, -s.y / jzv, 1.0 / jzv};
}

Vec3 ColumnGrid::top_normal(int prism) const {
  const Vec2 s = top_slope(prism);
  const Vec3 n{-s.x, -s.y, 1.0};
  return (1.0 / norm(n)) * n;
}

Vec3 ColumnGrid::bottom_normal(int prism) const {
  const Vec2 s = bottom_slope(prism);
  const Vec3 n{s.x, s.y, -1.0};
  return (1.0 / norm(n)) * n;
}

Vec3 ColumnGrid::lateral_normal(int prism, int edge) const {
  const Vec2 n = mesh_->edge_normal(column_of_[prism], edge);
  return {n.x, n.y, 0.0};
}

double ColumnGrid::jtb_top(int prism) const {
  return j2d(prism) / std::abs(top_normal(prism).z);
}

double ColumnGrid::jtb_bottom(int prism) const {
  return j2d(prism) / std::abs(bottom_normal(prism).z);
}

double ColumnGrid::jlat(int prism, int edge, double s) const {
  const double a = jz(prism, edge);
  const double b = jz(prism, (edge + 1) % 3);
  return ((1.0 - s) * a + s * b) * mesh_->edge_length(column_of_[prism], edge);
}

void ColumnGrid::set_column(int col, const std::vector<double>& eta) {
  const int n = layers_[col];
  const auto& sig = sigma_[col];
  for (int h = 0; h < 3; ++h) {
    const double e = eta[3 * col + h];
    const double b = mesh_->bed_at(col, h);
    const double depth = e - b;
    if (!(depth > 0.0)) {
      throw DryColumn("column " + std::to_string(col) + " node " + std::to_string(h) +
                      " has water depth " + std::to_string(depth));
    }
    for (int i = 0; i <= n; ++i) {
      double zi = e - sig[i] * depth;
      if (i == n) zi = b;
      z_[(zoff_[col] + i) * 3 + h] = zi;
    }
  }
}

ColumnGrid extrude(std::shared_ptr<const Mesh2D> mesh, const LayerPolicy& policy,
                   const std::vector<double>& eta) {
  const int nt = mesh->num_triangles();
  if (static_cast<int>(eta.size()) != 3 * nt) {
    throw ShapeMismatch("eta has " + std::to_string(eta.size()) + " values, expected " +
                        std::to_string(3 * nt));
  }
  ColumnGrid g;
  g.mesh_ = std::move(mesh);
  g.layers_.resize(nt);
  g.offset_.assign(nt + 1, 0);
  g.zoff_.assign(nt, 0);
  g.sigma_.resize(nt);
  for (int c = 0; c < nt; ++c) {
    double depth = 0.0;
    for (int h = 0; h < 3; ++h) depth = std::max(depth, -g.mesh_->bed_at(c, h));
    const int n = policy.count_for_depth(depth);
    g.layers_[c] = n;
    g.offset_[c + 1] = g.offset_[c] + n;
    g.zoff_[c] = g.offset_[c] + c;
    auto& sig = g.sigma_[c];
    sig.resize(n + 1);
    for (int i = 0; i <= n; ++i) sig[i] = static_cast<double>(i) / n;
  }
  g.column_of_.resize(g.offset_.back());
  for (int c = 0; c < nt; ++c) {
    for (int p = g.offset_[c]; p < g.offset_[c + 1]; ++p) g.column_of_[p] = c;
  }
  const std::size_t nz = static_cast<std::size_t>(g.offset_.back() + nt) * 3;
  g.z_.assign(nz, 0.0);
  g.wm_.assign(nz, 0.0);
  for (int c = 0; c < nt; ++c) g.set_column(c, eta);
  return g;
}

ColumnGrid update_moving_mesh(const ColumnGrid& grid, const std::vector<double>& eta_new,
                              double dt, std::span<const int> columns) {
  if (!(dt > 0.0)) throw Error("update_moving_mesh needs dt > 0");
  if (eta_new.size() != static_cast<std::size_t>(3 * grid.num_columns())) {
    throw ShapeMismatch("eta_new does not match the grid's column count");
  }
  ColumnGrid out = grid;
  std::fill(out.wm_.begin(), out.wm_.end(), 0.0);
  auto move = [&](int c) {
    out.set_column(c, eta_new);
    const int first = out.zoff_[c] * 3;
    const int last = (out.zoff_[c] + out.layers_[c] + 1) * 3;
    for (int i = first; i < last; ++i) out.wm_[i] = (out.z_[i] - grid.z_[i]) / dt;
  };
  if (columns.empty()) {
    for (int c = 0; c < grid.num_columns(); ++c) move(c);
  } else {
    for (int c : columns) move(c);
  }
  return out;
}

}  // namespace prismdg
