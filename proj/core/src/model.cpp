#include "pffc/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pffc {

double ModelParams::mu() const { return E / (2.0 * (1.0 + nu)); }

double ModelParams::lambda() const {
  if (elasticity == ElasticityModel::PlaneStress) return E * nu / (1.0 - nu * nu);
  return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
}

void ModelParams::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid model parameters: " + what);
  };
  require(eps > 0.0, "eps must be positive");
  require(kappa > 0.0 && kappa < 1.0, "kappa must lie in (0,1)");
  require(gamma > 0.0, "gamma must be positive");
  require(eta > 0.0 && eta <= gamma / 10.0, "eta must satisfy 0 < eta <= gamma/10");
  require(eta0 >= 0.0 && eta0 <= eta / 100.0, "eta0 must satisfy 0 <= eta0 <= eta/100");
  require(alpha > 0.0, "alpha must be positive");
  require(Gc > 0.0, "Gc must be positive");
  require(E > 0.0, "E must be positive");
  require(nu > 0.0 && nu < 0.5, "Poisson ratio must lie in (0,0.5)");
  require(mu() > 0.0 && lambda() > 0.0, "Lame parameters must be positive");
}

Degradation degradation(double phi, double kappa) {
  const double c = 1.0 - kappa;
  return {c * phi * phi + kappa, 2.0 * c * phi, 2.0 * c};
}

Sym2 stress(const Sym2& e, double mu, double lambda) {
  const double tr = e.xx + e.yy;
  return {2.0 * mu * e.xx + lambda * tr, 2.0 * mu * e.yy + lambda * tr, 2.0 * mu * e.xy};
}

std::size_t ActiveMask::count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

namespace {

constexpr int kLocal = 4 * kFields;

using Local = std::array<double, kLocal>;
using LocalMatrix = std::array<double, kLocal * kLocal>;

Local gather(const NodalField& U, const std::array<int, 4>& c) {
  Local out{};
  for (std::size_t a = 0; a < 4; ++a) {
    for (int f = 0; f < kFields; ++f) out[a * kFields + static_cast<std::size_t>(f)] = U[dof(c[a], f)];
  }
  return out;
}

void scatter_vector(const Local& local, const std::array<int, 4>& c, NodalField& out) {
  for (std::size_t a = 0; a < 4; ++a) {
    for (int f = 0; f < kFields; ++f) out[dof(c[a], f)] += local[a * kFields + static_cast<std::size_t>(f)];
  }
}

/// Fields interpolated at one quadrature point.
struct PointValues {
  double phi = 0.0;
  double gx = 0.0;
  double gy = 0.0;
  Sym2 strain;
};

PointValues interpolate(const CellGeometry& g, std::size_t q, const Local& v) {
  PointValues p;
  double dux_dx = 0, dux_dy = 0, duy_dx = 0, duy_dy = 0;
  for (std::size_t a = 0; a < 4; ++a) {
    const double N = g.N[q][a];
    const double dx = g.dN[q][a][0];
    const double dy = g.dN[q][a][1];
    const double ux = v[a * kFields + Ux];
    const double uy = v[a * kFields + Uy];
    const double ph = v[a * kFields + Phi];
    p.phi += N * ph;
    p.gx += dx * ph;
    p.gy += dy * ph;
    dux_dx += dx * ux;
    dux_dy += dy * ux;
    duy_dx += dx * uy;
    duy_dy += dy * uy;
  }
  p.strain = {dux_dx, duy_dy, 0.5 * (dux_dy + duy_dx)};
  return p;
}

/// (sigma * grad N)_x and (sigma * grad N)_y.
inline std::array<double, 2> traction(const Sym2& s, const std::array<double, 2>& dN) {
  return {s.xx * dN[0] + s.xy * dN[1], s.xy * dN[0] + s.yy * dN[1]};
}

}  // namespace

PhaseFieldForms::PhaseFieldForms(const Mesh& mesh, const DofMap& dofs, const ModelParams& params)
    : mesh_(&mesh),
      dofs_(&dofs),
      params_(params),
      mu_(params.mu()),
      lambda_(params.lambda()),
      geo_(precompute_geometry(mesh)),
      pattern_(mesh, kFields),
      mass_(assemble_bulk_mass(mesh)) {}

NodalField PhaseFieldForms::residual(const NodalField& U) const {
  const auto& P = params_;
  NodalField out = NodalField::Zero(U.size());
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    const auto& cell = mesh_->cells[c];
    const auto& g = geo_[c];
    const Local v = gather(U, cell);
    Local r{};
    for (std::size_t q = 0; q < kQuadPerCell; ++q) {
      const PointValues p = interpolate(g, q, v);
      const Degradation d = degradation(p.phi, P.kappa);
      const Sym2 s = stress(p.strain, mu_, lambda_);
      const double energy = contract(s, p.strain);
      const double w = g.JxW[q];
      for (std::size_t a = 0; a < 4; ++a) {
        const auto t = traction(s, g.dN[q][a]);
        const double N = g.N[q][a];
        r[a * kFields + Ux] += w * d.g * t[0];
        r[a * kFields + Uy] += w * d.g * t[1];
        r[a * kFields + Phi] += w * (P.Gc * P.eps * (p.gx * g.dN[q][a][0] + p.gy * g.dN[q][a][1]) -
                                     P.Gc / P.eps * (1.0 - p.phi) * N +
                                     (1.0 - P.kappa) * p.phi * energy * N);
      }
    }
    scatter_vector(r, cell, out);
  }
  return out;
}

namespace {

/// Local Jacobian of one cell: rows = test, cols = direction.
void local_jacobian(const CellGeometry& g, const Local& v, const ModelParams& P, double mu, double lambda,
                    LocalMatrix& K) {
  K.fill(0.0);
  for (std::size_t q = 0; q < kQuadPerCell; ++q) {
    const PointValues p = interpolate(g, q, v);
    const Degradation d = degradation(p.phi, P.kappa);
    const Sym2 s = stress(p.strain, mu, lambda);
    const double energy = contract(s, p.strain);
    const double w = g.JxW[q];
    std::array<std::array<double, 2>, 4> t{};
    for (std::size_t a = 0; a < 4; ++a) t[a] = traction(s, g.dN[q][a]);
    for (std::size_t a = 0; a < 4; ++a) {
      const auto& da = g.dN[q][a];
      const double Na = g.N[q][a];
      for (std::size_t b = 0; b < 4; ++b) {
        const auto& db = g.dN[q][b];
        const double Nb = g.N[q][b];
        const double dot = da[0] * db[0] + da[1] * db[1];
        const std::size_t ra = a * kFields;
        const std::size_t cb = b * kFields;
        for (std::size_t i = 0; i < 2; ++i) {
          for (std::size_t j = 0; j < 2; ++j) {
            const double elastic =
                mu * ((i == j ? dot : 0.0) + da[j] * db[i]) + lambda * da[i] * db[j];
            K[(ra + i) * kLocal + cb + j] += w * d.g * elastic;
          }
          K[(ra + i) * kLocal + cb + Phi] += w * d.dg * Nb * t[a][i];
          K[(ra + Phi) * kLocal + cb + i] += w * d.dg * Na * t[b][i];
        }
        K[(ra + Phi) * kLocal + cb + Phi] +=
            w * (P.Gc * P.eps * dot + P.Gc / P.eps * Na * Nb + 0.5 * d.ddg * energy * Na * Nb);
      }
    }
  }
}

}  // namespace

SparseOperator PhaseFieldForms::jacobian(const NodalField& U) const {
  SparseOperator A = pattern_.prototype();
  add_jacobian(U, 1.0, A);
  return A;
}

void PhaseFieldForms::add_jacobian(const NodalField& U, double scale, SparseOperator& A) const {
  LocalMatrix K;
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    local_jacobian(geo_[c], gather(U, mesh_->cells[c]), params_, mu_, lambda_, K);
    if (scale != 1.0) {
      for (double& k : K) k *= scale;
    }
    pattern_.scatter(A, static_cast<int>(c), K);
  }
}

NodalField PhaseFieldForms::apply_jacobian(const NodalField& U, const NodalField& direction) const {
  NodalField out = NodalField::Zero(U.size());
  LocalMatrix K;
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    const auto& cell = mesh_->cells[c];
    local_jacobian(geo_[c], gather(U, cell), params_, mu_, lambda_, K);
    const Local x = gather(direction, cell);
    Local y{};
    for (std::size_t r = 0; r < kLocal; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kLocal; ++k) acc += K[r * kLocal + k] * x[k];
      y[r] = acc;
    }
    scatter_vector(y, cell, out);
  }
  return out;
}

NodalField PhaseFieldForms::second_uu(const NodalField& U, const NodalField& dU, const NodalField& Z) const {
  const double dg_coeff = 2.0 * (1.0 - params_.kappa);
  NodalField out = NodalField::Zero(U.size());
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    const auto& cell = mesh_->cells[c];
    const auto& g = geo_[c];
    const Local v = gather(U, cell);
    const Local dv = gather(dU, cell);
    const Local zv = gather(Z, cell);
    Local r{};
    for (std::size_t q = 0; q < kQuadPerCell; ++q) {
      const PointValues p = interpolate(g, q, v);
      const PointValues dp = interpolate(g, q, dv);
      const PointValues zp = interpolate(g, q, zv);
      const double dgphi = dg_coeff * p.phi;
      const Sym2 s_u = stress(p.strain, mu_, lambda_);
      const Sym2 s_du = stress(dp.strain, mu_, lambda_);
      const Sym2 s_z = stress(zp.strain, mu_, lambda_);
      // Displacement tests see this combined stress.
      const double cz = dgphi * dp.phi;
      const double cu = dg_coeff * zp.phi * dp.phi;
      const double cdu = dgphi * zp.phi;
      const Sym2 sig{cz * s_z.xx + cu * s_u.xx + cdu * s_du.xx, cz * s_z.yy + cu * s_u.yy + cdu * s_du.yy,
                     cz * s_z.xy + cu * s_u.xy + cdu * s_du.xy};
      const double phi_coeff = dg_coeff * dp.phi * contract(s_u, zp.strain) +
                               dgphi * contract(s_du, zp.strain) +
                               dg_coeff * zp.phi * contract(s_u, dp.strain);
      const double w = g.JxW[q];
      for (std::size_t a = 0; a < 4; ++a) {
        const auto t = traction(sig, g.dN[q][a]);
        r[a * kFields + Ux] += w * t[0];
        r[a * kFields + Uy] += w * t[1];
        r[a * kFields + Phi] += w * phi_coeff * g.N[q][a];
      }
    }
    scatter_vector(r, cell, out);
  }
  return out;
}

ActiveMask PhaseFieldForms::active_mask(const NodalField& U_now, const NodalField& U_prev) const {
  ActiveMask mask;
  mask.active.assign(geo_.size() * kQuadPerCell, 0);
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    const auto& cell = mesh_->cells[c];
    const auto& g = geo_[c];
    for (std::size_t q = 0; q < kQuadPerCell; ++q) {
      double now = 0.0;
      double prev = 0.0;
      for (std::size_t a = 0; a < 4; ++a) {
        now += g.N[q][a] * U_now[dof(cell[a], Phi)];
        prev += g.N[q][a] * U_prev[dof(cell[a], Phi)];
      }
      mask.active[c * kQuadPerCell + q] = now > prev ? 1 : 0;
    }
  }
  return mask;
}

void PhaseFieldForms::add_phi_mass(const ActiveMask* mask, double weight, SparseOperator& A) const {
  LocalMatrix K;
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    const auto& g = geo_[c];
    K.fill(0.0);
    bool any = false;
    for (std::size_t q = 0; q < kQuadPerCell; ++q) {
      if (mask != nullptr && mask->active[c * kQuadPerCell + q] == 0) continue;
      any = true;
      for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
          K[(a * kFields + Phi) * kLocal + b * kFields + Phi] += weight * g.JxW[q] * g.N[q][a] * g.N[q][b];
        }
      }
    }
    if (any) pattern_.scatter(A, static_cast<int>(c), K);
  }
}

NodalField PhaseFieldForms::apply_phi_mass(const ActiveMask* mask, double weight, const NodalField& V) const {
  NodalField out = NodalField::Zero(V.size());
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    const auto& cell = mesh_->cells[c];
    const auto& g = geo_[c];
    for (std::size_t q = 0; q < kQuadPerCell; ++q) {
      if (mask != nullptr && mask->active[c * kQuadPerCell + q] == 0) continue;
      double val = 0.0;
      for (std::size_t a = 0; a < 4; ++a) val += g.N[q][a] * V[dof(cell[a], Phi)];
      for (std::size_t a = 0; a < 4; ++a) out[dof(cell[a], Phi)] += weight * g.JxW[q] * g.N[q][a] * val;
    }
  }
  return out;
}

SparseOperator PhaseFieldForms::weighted_mass(const ActiveMask& mask, double weight) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t c = 0; c < geo_.size(); ++c) {
    const auto& cell = mesh_->cells[c];
    const auto& g = geo_[c];
    for (std::size_t q = 0; q < kQuadPerCell; ++q) {
      if (mask.active[c * kQuadPerCell + q] == 0) continue;
      for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
          trip.emplace_back(cell[a], cell[b], weight * g.JxW[q] * g.N[q][a] * g.N[q][b]);
        }
      }
    }
  }
  const auto n = static_cast<int>(mesh_->num_vertices());
  SparseOperator M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

}  // namespace pffc
