#pragma once

#include <memory>
#include <span>
#include <vector>

#include "prismdg/exec.hpp"
#include "prismdg/mesh.hpp"
#include "prismdg/params.hpp"

namespace prismdg {

// Nodal P1-DG fields on triangles, 3 values per triangle (t * 3 + k).
struct State2D {
  std::vector<double> eta;
  std::vector<Vec2> transport;  // Q = integral of u over the column
  std::vector<double> source;   // s (m/s); empty means zero
  std::vector<double> patm;     // Pa; empty means zero
  std::vector<Vec2> f3d;        // 3D-to-2D forcing, m^2/s^2; empty means zero
  double time = 0.0;

  static State2D at_rest(const Mesh2D& mesh, double eta0 = 0.0);
};

// Edge stabilization samples: per triangle, edge k, point g at t * 6 + k * 2 + g.
inline constexpr int kEdgeSamples = 6;

struct SubcycleResult {
  std::vector<Vec2> mean_transport;  // Q-bar, nodal
  std::vector<double> mean_stab;     // S-bar = max(c) * diff(eta), per edge sample
  std::vector<Vec2> f2d;             // nodal
  int steps = 0;
};

struct Diagnostics2D {
  double volume = 0.0;
  double energy = 0.0;
  double eta_min = 0.0;
  double eta_max = 0.0;
};

class External2D {
 public:
  External2D(std::shared_ptr<const Mesh2D> mesh, PhysParams params);

  const Mesh2D& mesh() const { return *mesh_; }
  const PhysParams& params() const { return params_; }

  // Weak residual of the free-surface equation, 3 per triangle. When
  // `stab` is given it receives the edge stabilization samples. Only the
  // listed triangles are written (all when `elements` is empty).
  void rhs_free_surface(const State2D& s, std::vector<double>& residual,
                        std::vector<double>* stab = nullptr, std::span<const int> elements = {}) const;

  // Weak residual of the depth-integrated momentum equation (without the
  // nodal 3D forcing, which is added after the mass solve).
  void rhs_depth_momentum(const State2D& s, std::vector<Vec2>& residual,
                          std::span<const int> elements = {}) const;

  // Free-surface residual evaluated from a given transport and precomputed
  // stabilization samples (used for the 2D/3D consistency check).
  void rhs_free_surface_from(std::span<const Vec2> transport, std::span<const double> stab,
                             std::vector<double>& residual) const;

  // dt2d * max(c) / min edge length over the listed triangles.
  double courant(const State2D& s, double dt2d, std::span<const int> elements = {}) const;

  // Advances (eta, Q) by m SSP-RK3 steps. Throws CflViolation.
  SubcycleResult subcycle(State2D& s, int m, double dt2d, Executor& exec) const;

  Diagnostics2D diagnostics(const State2D& s) const;

 private:
  void element_residual(int t, const double* eta, const Vec2* q, const State2D& s, double time,
                        double* r_eta, Vec2* r_q, double* stab) const;

  std::shared_ptr<const Mesh2D> mesh_;
  PhysParams params_;
  std::vector<std::array<Vec2, 3>> grads_;
};

// (M_h x)_i for the P1 mass matrix of a triangle with Jacobian j2d.
inline double mass_apply(double j2d, const double* x, int i) {
  return j2d / 24.0 * (x[i] + x[0] + x[1] + x[2]);
}

}  // namespace prismdg
