#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pffc/fem.hpp"

namespace pffc {

/// Raised for inconsistent or out-of-range configuration values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ElasticityModel { PlaneStrain, PlaneStress };

struct ModelParams {
  double eps = 0.0884;
  double kappa = 1e-10;
  double eta = 1e3;
  double gamma = 1e5;
  /// Initial-condition scaling. Only validated, never assembled.
  double eta0 = 1.0;
  double alpha = 4.75e-10;
  double Gc = 1.0;
  double E = 1e6;
  double nu = 0.2;
  ElasticityModel elasticity = ElasticityModel::PlaneStrain;
  double qd = 1e3;

  [[nodiscard]] double mu() const;
  [[nodiscard]] double lambda() const;
  /// Throws ConfigError when an invariant of the parameter set is violated.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Degradation {
  double g;
  double dg;
  double ddg;
};

Degradation degradation(double phi, double kappa);

/// Symmetric 2x2 tensor; `xy` is the tensor (not engineering) shear component.
struct Sym2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

Sym2 stress(const Sym2& e, double mu, double lambda);
inline double contract(const Sym2& a, const Sym2& b) { return a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy; }

/// Per quadrature point indicator of phi_now > phi_prev, four entries per cell.
struct ActiveMask {
  std::vector<std::uint8_t> active;

  [[nodiscard]] std::size_t count() const;
  friend bool operator==(const ActiveMask&, const ActiveMask&) = default;
};

/// The semilinear form of the phase-field model and its derivatives, all
/// evaluated on interleaved state vectors (3 unknowns per node). The boundary
/// load is not part of these forms; callers subtract it.
class PhaseFieldForms {
 public:
  PhaseFieldForms(const Mesh& mesh, const DofMap& dofs, const ModelParams& params);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const DofMap& dofs() const { return *dofs_; }
  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] const BlockPattern& pattern() const { return pattern_; }
  [[nodiscard]] const std::vector<CellGeometry>& geometry() const { return geo_; }
  /// Scalar nodal mass matrix.
  [[nodiscard]] const SparseOperator& mass() const { return mass_; }

  /// Bulk part of a(U)(test) for every test function.
  [[nodiscard]] NodalField residual(const NodalField& U) const;
  /// a'_u(U) with rows = test, columns = direction, on the block pattern.
  [[nodiscard]] SparseOperator jacobian(const NodalField& U) const;
  /// A += scale * a'_u(U); A must carry the block pattern.
  void add_jacobian(const NodalField& U, double scale, SparseOperator& A) const;
  [[nodiscard]] NodalField apply_jacobian(const NodalField& U, const NodalField& direction) const;
  /// a''_uu(U)(dU, test, Z) for every test function.
  [[nodiscard]] NodalField second_uu(const NodalField& U, const NodalField& dU, const NodalField& Z) const;

  [[nodiscard]] ActiveMask active_mask(const NodalField& U_now, const NodalField& U_prev) const;
  /// A += weight * (mask-restricted phi mass) on the phi block. A null mask
  /// means the unrestricted mass.
  void add_phi_mass(const ActiveMask* mask, double weight, SparseOperator& A) const;
  /// weight * (restricted phi mass) * V on the phi block of an interleaved vector.
  [[nodiscard]] NodalField apply_phi_mass(const ActiveMask* mask, double weight, const NodalField& V) const;
  /// Restricted phi mass as a scalar nodal operator.
  [[nodiscard]] SparseOperator weighted_mass(const ActiveMask& mask, double weight) const;

 private:
  const Mesh* mesh_;
  const DofMap* dofs_;
  ModelParams params_;
  double mu_;
  double lambda_;
  std::vector<CellGeometry> geo_;
  BlockPattern pattern_;
  SparseOperator mass_;
};

}  // namespace pffc
