#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "prismdg/mesh.hpp"
#include "prismdg/vec.hpp"

namespace prismdg {

// How many layers each column receives.
struct LayerPolicy {
  enum class Mode { UniformSigma, DepthThresholded };

  Mode mode = Mode::UniformSigma;
  int layers = 10;
  // (minimum depth, layer count), used when mode == DepthThresholded. The
  // entry with the largest threshold not exceeding the column depth wins;
  // shallower columns get the first entry's count.
  std::vector<std::pair<double, int>> thresholds;

  static LayerPolicy uniform(int n);
  static LayerPolicy depth_thresholded(std::vector<std::pair<double, int>> thresholds);

  int count_for_depth(double depth) const;
};

// Extruded prism columns over a Mesh2D with sigma-like moving interfaces.
//
// Prism p of column c is p = offset(c) + l, l = 0 at the surface. Local
// prism nodes 0..2 sit on the top face above horizontal nodes 0..2, nodes
// 3..5 on the bottom face. The parent vertical coordinate zeta runs from -1
// (bottom) to 1 (top), so the layer thickness at a horizontal node is 2 Jz.
class ColumnGrid {
 public:
  ColumnGrid() = default;

  int num_columns() const { return static_cast<int>(layers_.size()); }
  int num_prisms() const { return offset_.empty() ? 0 : offset_.back(); }
  int layers(int col) const { return layers_[col]; }
  int max_layers() const;
  int prism_offset(int col) const { return offset_[col]; }
  int column_of(int prism) const { return column_of_[prism]; }
  int layer_of(int prism) const { return prism - offset_[column_of_[prism]]; }
  const std::vector<int>& layer_counts() const { return layers_; }

  const Mesh2D& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh2D>& mesh_ptr() const { return mesh_; }

  // True when every interior edge joins columns with equal layer counts.
  bool conforming() const;
  // Throws NonConformingLayers naming the first offending edge.
  void require_conforming() const;

  // Interface i (0 = surface, layers(col) = bed) above horizontal node h.
  double z(int col, int i, int h) const { return z_[(zoff_[col] + i) * 3 + h]; }
  // Mesh velocity of that interface node.
  double wm(int col, int i, int h) const { return wm_[(zoff_[col] + i) * 3 + h]; }
  double eta(int col, int h) const { return z(col, 0, h); }
  double depth(int col, int h) const { return eta(col, h) - mesh_->bed_at(col, h); }
  const std::vector<double>& sigma(int col) const { return sigma_[col]; }

  // Vertical half-thickness Jz of prism p at horizontal node h.
  double jz(int prism, int h) const;
  // Jz interpolated at parent point (xi, eta).
  double jz_at(int prism, double xi, double eta) const;
  // Average prism height (penalty length scale on horizontal faces).
  double mean_height(int prism) const;

  double j2d(int prism) const { return mesh_->jacobian(column_of_[prism]); }

  // Horizontal gradients of the top and bottom face elevations.
  Vec2 top_slope(int prism) const;
  Vec2 bottom_slope(int prism) const;
  // Gradient of z along an iso-zeta slice.
  Vec2 slope(int prism, double zeta) const;

  // m = d(zeta)/d(x, y, z) at a parent point.
  Vec3 m_vector(int prism, double xi, double eta, double zeta) const;

  // Unit outward normals.
  Vec3 top_normal(int prism) const;
  Vec3 bottom_normal(int prism) const;
  Vec3 lateral_normal(int prism, int edge) const;

  // |J2D / n_z| of the top/bottom faces.
  double jtb_top(int prism) const;
  double jtb_bottom(int prism) const;
  // Jz * Jedge on lateral face `edge` at edge parameter s.
  double jlat(int prism, int edge, double s) const;

 private:
  friend ColumnGrid extrude(std::shared_ptr<const Mesh2D> mesh, const LayerPolicy& policy,
                            const std::vector<double>& eta);
  friend ColumnGrid update_moving_mesh(const ColumnGrid& grid, const std::vector<double>& eta_new,
                                       double dt, std::span<const int> columns);

  void set_column(int col, const std::vector<double>& eta);

  std::shared_ptr<const Mesh2D> mesh_;
  std::vector<int> layers_;
  std::vector<int> offset_;
  std::vector<int> zoff_;
  std::vector<int> column_of_;
  std::vector<std::vector<double>> sigma_;
  std::vector<double> z_;
  std::vector<double> wm_;
};

// Builds the grid with interfaces at sigma fractions of [b, eta]; eta is a
// P1-DG 2D field (3 values per triangle). Throws DryColumn if H <= 0.
ColumnGrid extrude(std::shared_ptr<const Mesh2D> mesh, const LayerPolicy& policy,
                   const std::vector<double>& eta);

// New snapshot with interfaces recomputed from eta_new and w_m = dz/dt.
// When `columns` is non-empty only those columns are moved (the others are
// copied unchanged with w_m = 0).
ColumnGrid update_moving_mesh(const ColumnGrid& grid, const std::vector<double>& eta_new,
                              double dt, std::span<const int> columns = {});

}  // namespace prismdg
