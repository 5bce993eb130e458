#include "prismdg/external2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "prismdg/column_solvers.hpp"
#include "prismdg/errors.hpp"
#include "prismdg/reference.hpp"

namespace prismdg {

namespace {

std::vector<int> all_elements(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// SSP-RK3 stage weights of the final update: u3 = u0 + dt (L0 + L1 + 4 L2) / 6.
constexpr double kStageWeight[3] = {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0};

}  // namespace

State2D State2D::at_rest(const Mesh2D& mesh, double eta0) {
  State2D s;
  const std::size_t n = static_cast<std::size_t>(mesh.num_triangles()) * 3;
  s.eta.assign(n, eta0);
  s.transport.assign(n, Vec2{});
  return s;
}

External2D::External2D(std::shared_ptr<const Mesh2D> mesh, PhysParams params)
    : mesh_(std::move(mesh)), params_(params) {
  if (!(params_.g > 0.0) || !(params_.rho0 > 0.0)) throw ConfigError("g and rho0 must be positive");
  grads_.resize(mesh_->num_triangles());
  for (int t = 0; t < mesh_->num_triangles(); ++t) grads_[t] = mesh_->basis_gradients(t);
}

void External2D::element_residual(int t, const double* eta, const Vec2* q, const State2D& s, double time,
                                  double* r_eta, Vec2* r_q, double* stab) const {
  const Mesh2D& m = *mesh_;
  const double g = params_.g;
  const double j = m.jacobian(t);
  const auto& grad = grads_[t];
  const int o = 3 * t;

  double h[3];
  for (int k = 0; k < 3; ++k) {
    h[k] = eta[o + k] - m.bed_at(t, k);
    if (!(h[k] > 0.0)) throw DryColumn("non-positive water depth in triangle " + std::to_string(t));
  }

  // Volume terms. Gradients of P1 fields are taken from nodal differences
  // so constant fields give exact zeros.
  const Vec2 qsum = q[o] + q[o + 1] + q[o + 2];
  const Vec2 grad_eta = (eta[o + 1] - eta[o]) * grad[1] + (eta[o + 2] - eta[o]) * grad[2];
  Vec2 grad_p{};
  if (!s.patm.empty()) grad_p = (s.patm[o + 1] - s.patm[o]) * grad[1] + (s.patm[o + 2] - s.patm[o]) * grad[2];
  for (int i = 0; i < 3; ++i) {
    r_eta[i] = j / 6.0 * dot(grad[i], qsum);
    if (!s.source.empty()) r_eta[i] += mass_apply(j, s.source.data() + o, i);
    const double mh = mass_apply(j, h, i);
    r_q[i] = (-g * mh) * grad_eta - (mh / params_.rho0) * grad_p;
  }

  // Edge terms.
  for (int k = 0; k < 3; ++k) {
    const int a = k;
    const int b = (k + 1) % 3;
    const Vec2 n = m.edge_normal(t, k);
    const double len = m.edge_length(t, k);
    const int nb = m.neighbor(t, k);
    const int nk = nb >= 0 ? m.neighbor_local_edge(t, k) : -1;
    const BoundaryTag tag = m.boundary_tag(t, k);
    for (int gp = 0; gp < 2; ++gp) {
      const ref::EdgePoint& p = ref::kEdgeRule[gp];
      const double eta_i = p.lam0 * eta[o + a] + p.lam1 * eta[o + b];
      const double h_i = p.lam0 * h[a] + p.lam1 * h[b];
      const Vec2 q_i = p.lam0 * q[o + a] + p.lam1 * q[o + b];
      double eta_e, h_e;
      Vec2 q_e;
      if (nb >= 0) {
        const int on = 3 * nb;
        const int ea = nk;
        const int eb = (nk + 1) % 3;
        const double hea = eta[on + ea] - m.bed_at(nb, ea);
        const double heb = eta[on + eb] - m.bed_at(nb, eb);
        eta_e = p.lam1 * eta[on + ea] + p.lam0 * eta[on + eb];
        h_e = p.lam1 * hea + p.lam0 * heb;
        q_e = p.lam1 * q[on + ea] + p.lam0 * q[on + eb];
      } else if (tag == BoundaryTag::Open) {
        eta_e = params_.open_eta.at(time);
        h_e = eta_e - (p.lam0 * m.bed_at(t, a) + p.lam1 * m.bed_at(t, b));
        q_e = q_i;
      } else {
        eta_e = eta_i;
        h_e = h_i;
        q_e = q_i - (2.0 * dot(n, q_i)) * n;
      }
      if (!(h_e > 0.0)) throw DryColumn("non-positive exterior depth at triangle " + std::to_string(t));
      const double c = iface_max(std::sqrt(g * h_i), std::sqrt(g * h_e));
      const double d_eta = iface_diff(eta_i, eta_e);
      const double stab_value = c * d_eta;
      const Vec2 q_mean{iface_mean(q_i.x, q_e.x), iface_mean(q_i.y, q_e.y)};
      const Vec2 q_diff{iface_diff(q_i.x, q_e.x), iface_diff(q_i.y, q_e.y)};
      const double flux = dot(n, q_mean) + stab_value;
      const Vec2 fq = (g * iface_mean(h_i, h_e) * d_eta) * n - c * q_diff;
      const double wl = p.weight * len;
      r_eta[a] -= wl * p.lam0 * flux;
      r_eta[b] -= wl * p.lam1 * flux;
      r_q[a] = r_q[a] + (wl * p.lam0) * fq;
      r_q[b] = r_q[b] + (wl * p.lam1) * fq;
      if (stab) stab[k * 2 + gp] = stab_value;
    }
  }
}

void External2D::rhs_free_surface(const State2D& s, std::vector<double>& residual, std::vector<double>* stab,
                                  std::span<const int> elements) const {
  const int nt = mesh_->num_triangles();
  residual.resize(static_cast<std::size_t>(nt) * 3);
  if (stab) stab->resize(static_cast<std::size_t>(nt) * kEdgeSamples);
  std::vector<int> all;
  if (elements.empty()) {
    all = all_elements(nt);
    elements = all;
  }
  Vec2 rq[3];
  for (int t : elements) {
    element_residual(t, s.eta.data(), s.transport.data(), s, s.time, residual.data() + 3 * t, rq,
                     stab ? stab->data() + kEdgeSamples * t : nullptr);
  }
}

void External2D::rhs_depth_momentum(const State2D& s, std::vector<Vec2>& residual,
                                    std::span<const int> elements) const {
  const int nt = mesh_->num_triangles();
  residual.resize(static_cast<std::size_t>(nt) * 3);
  std::vector<int> all;
  if (elements.empty()) {
    all = all_elements(nt);
    elements = all;
  }
  double re[3];
  for (int t : elements) {
    element_residual(t, s.eta.data(), s.transport.data(), s, s.time, re, residual.data() + 3 * t, nullptr);
  }
}

void External2D::rhs_free_surface_from(std::span<const Vec2> transport, std::span<const double> stab,
                                       std::vector<double>& residual) const {
  const Mesh2D& m = *mesh_;
  const int nt = m.num_triangles();
  residual.assign(static_cast<std::size_t>(nt) * 3, 0.0);
  for (int t = 0; t < nt; ++t) {
    const int o = 3 * t;
    const double j = m.jacobian(t);
    const Vec2 qsum = transport[o] + transport[o + 1] + transport[o + 2];
    for (int i = 0; i < 3; ++i) residual[o + i] = j / 6.0 * dot(grads_[t][i], qsum);
    for (int k = 0; k < 3; ++k) {
      const int a = k;
      const int b = (k + 1) % 3;
      const Vec2 n = m.edge_normal(t, k);
      const double len = m.edge_length(t, k);
      const int nb = m.neighbor(t, k);
      const int nk = nb >= 0 ? m.neighbor_local_edge(t, k) : -1;
      const BoundaryTag tag = m.boundary_tag(t, k);
      for (int gp = 0; gp < 2; ++gp) {
        const ref::EdgePoint& p = ref::kEdgeRule[gp];
        const Vec2 q_i = p.lam0 * transport[o + a] + p.lam1 * transport[o + b];
        Vec2 q_e;
        if (nb >= 0) {
          q_e = p.lam1 * transport[3 * nb + nk] + p.lam0 * transport[3 * nb + (nk + 1) % 3];
        } else if (tag == BoundaryTag::Open) {
          q_e = q_i;
        } else {
          q_e = q_i - (2.0 * dot(n, q_i)) * n;
        }
        const Vec2 q_mean{iface_mean(q_i.x, q_e.x), iface_mean(q_i.y, q_e.y)};
        const double flux = dot(n, q_mean) + stab[kEdgeSamples * t + k * 2 + gp];
        const double wl = p.weight * len;
        residual[o + a] -= wl * p.lam0 * flux;
        residual[o + b] -= wl * p.lam1 * flux;
      }
    }
  }
}

double External2D::courant(const State2D& s, double dt2d, std::span<const int> elements) const {
  const Mesh2D& m = *mesh_;
  std::vector<int> all;
  if (elements.empty()) {
    all = all_elements(m.num_triangles());
    elements = all;
  }
  double cmax = 0.0;
  double lmin = std::numeric_limits<double>::infinity();
  for (int t : elements) {
    for (int k = 0; k < 3; ++k) {
      const double h = s.eta[3 * t + k] - m.bed_at(t, k);
      if (h > 0.0) cmax = std::max(cmax, std::sqrt(params_.g * h));
      lmin = std::min(lmin, m.edge_length(t, k));
    }
  }
  return dt2d * cmax / lmin;
}

SubcycleResult External2D::subcycle(State2D& s, int m, double dt2d, Executor& exec) const {
  if (m < 1) throw ConfigError("external iteration count must be at least 1");
  const double cfl = courant(s, dt2d, exec.owned());
  if (cfl > params_.cfl_limit) {
    std::ostringstream msg;
    msg << "external Courant number " << cfl << " exceeds " << params_.cfl_limit << " (dt2d = " << dt2d << ")";
    throw CflViolation(msg.str());
  }
  const int nt = mesh_->num_triangles();
  const std::size_t n = static_cast<std::size_t>(nt) * 3;
  const bool stage_weighted = params_.mean_transport == MeanTransport::StageWeighted;

  SubcycleResult out;
  out.mean_transport.assign(n, Vec2{});
  out.mean_stab.assign(static_cast<std::size_t>(nt) * kEdgeSamples, 0.0);
  out.f2d.assign(n, Vec2{});
  out.steps = m;

  const std::vector<Vec2> q_start = s.transport;
  std::vector<double> e1 = s.eta, e2 = s.eta;
  std::vector<Vec2> q1 = s.transport, q2 = s.transport;

  auto tendency = [&](int t, const double* eta, const Vec2* q, double time, double* de, Vec2* dq,
                      double* stab) {
    element_residual(t, eta, q, s, time, de, dq, stab);
    const double j = mesh_->jacobian(t);
    detail::apply_inverse_mass(j, de);
    double qx[3] = {dq[0].x, dq[1].x, dq[2].x};
    double qy[3] = {dq[0].y, dq[1].y, dq[2].y};
    detail::apply_inverse_mass(j, qx);
    detail::apply_inverse_mass(j, qy);
    for (int k = 0; k < 3; ++k) {
      dq[k] = Vec2{qx[k], qy[k]};
      if (!s.f3d.empty()) dq[k] = dq[k] + s.f3d[3 * t + k];
    }
  };
  auto accumulate = [&](int t, int stage, const Vec2* q, const double* stab) {
    const double w = kStageWeight[stage];
    for (int i = 0; i < kEdgeSamples; ++i) out.mean_stab[kEdgeSamples * t + i] += w * stab[i];
    if (!stage_weighted) return;
    for (int k = 0; k < 3; ++k) out.mean_transport[3 * t + k] = out.mean_transport[3 * t + k] + w * q[3 * t + k];
  };

  for (int step = 0; step < m; ++step) {
    const double t0 = s.time;
    exec.phase(
        [&](std::span<const int> elems) {
          double de[3], stab[kEdgeSamples];
          Vec2 dq[3];
          for (int t : elems) {
            tendency(t, s.eta.data(), s.transport.data(), t0, de, dq, stab);
            accumulate(t, 0, s.transport.data(), stab);
            for (int k = 0; k < 3; ++k) {
              const int i = 3 * t + k;
              e1[i] = s.eta[i] + dt2d * de[k];
              q1[i] = s.transport[i] + dt2d * dq[k];
            }
          }
        },
        {HaloField::flat(e1.data(), 3), HaloField::flat(&q1.data()->x, 6)});
    exec.phase(
        [&](std::span<const int> elems) {
          double de[3], stab[kEdgeSamples];
          Vec2 dq[3];
          for (int t : elems) {
            tendency(t, e1.data(), q1.data(), t0 + dt2d, de, dq, stab);
            accumulate(t, 1, q1.data(), stab);
            for (int k = 0; k < 3; ++k) {
              const int i = 3 * t + k;
              e2[i] = 0.75 * s.eta[i] + 0.25 * (e1[i] + dt2d * de[k]);
              q2[i] = 0.75 * s.transport[i] + 0.25 * (q1[i] + dt2d * dq[k]);
            }
          }
        },
        {HaloField::flat(e2.data(), 3), HaloField::flat(&q2.data()->x, 6)});
    exec.phase(
        [&](std::span<const int> elems) {
          double de[3], stab[kEdgeSamples];
          Vec2 dq[3];
          for (int t : elems) {
            tendency(t, e2.data(), q2.data(), t0 + 0.5 * dt2d, de, dq, stab);
            accumulate(t, 2, q2.data(), stab);
            for (int k = 0; k < 3; ++k) {
              const int i = 3 * t + k;
              s.eta[i] = s.eta[i] / 3.0 + 2.0 / 3.0 * (e2[i] + dt2d * de[k]);
              s.transport[i] = (1.0 / 3.0) * s.transport[i] + (2.0 / 3.0) * (q2[i] + dt2d * dq[k]);
              if (!stage_weighted) out.mean_transport[i] = out.mean_transport[i] + s.transport[i];
            }
          }
        },
        {HaloField::flat(s.eta.data(), 3), HaloField::flat(&s.transport.data()->x, 6)});
    s.time = t0 + dt2d;
  }

  const double big_dt = m * dt2d;
  for (int t : exec.owned()) {
    for (int k = 0; k < 3; ++k) {
      const int i = 3 * t + k;
      out.mean_transport[i] = (1.0 / m) * out.mean_transport[i];
      const Vec2 f3 = s.f3d.empty() ? Vec2{} : s.f3d[i];
      out.f2d[i] = (1.0 / big_dt) * (s.transport[i] - q_start[i] - big_dt * f3);
    }
    for (int i = 0; i < kEdgeSamples; ++i) out.mean_stab[kEdgeSamples * t + i] /= m;
  }
  return out;
}

Diagnostics2D External2D::diagnostics(const State2D& s) const {
  const Mesh2D& m = *mesh_;
  Diagnostics2D d;
  d.eta_min = std::numeric_limits<double>::infinity();
  d.eta_max = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < m.num_triangles(); ++t) {
    const int o = 3 * t;
    const double j = m.jacobian(t);
    d.volume += j / 6.0 * (s.eta[o] + s.eta[o + 1] + s.eta[o + 2]);
    for (const auto& p : ref::triangle_rule()) {
      double eta = 0.0, h = 0.0;
      Vec2 q{};
      for (int k = 0; k < 3; ++k) {
        const double ph = ref::phi_h(k, p.xi, p.eta);
        eta += ph * s.eta[o + k];
        h += ph * (s.eta[o + k] - m.bed_at(t, k));
        q = q + ph * s.transport[o + k];
      }
      d.energy += p.weight * j * (0.5 * params_.g * eta * eta + 0.5 * dot(q, q) / h);
    }
    for (int k = 0; k < 3; ++k) {
      d.eta_min = std::min(d.eta_min, s.eta[o + k]);
      d.eta_max = std::max(d.eta_max, s.eta[o + k]);
    }
  }
  return d;
}

}  // namespace prismdg
