#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "pffc/fem.hpp"
#include "pffc/linear_solver.hpp"

namespace pffc {
namespace {

Eigen::MatrixXd dense(const SparseOperator& A) { return Eigen::MatrixXd(A); }

TEST(Q1, VertexAndMidpointValues) {
  const auto v0 = q1_eval({0, 0});
  EXPECT_DOUBLE_EQ(v0.value[0], 1.0);
  EXPECT_DOUBLE_EQ(v0.value[1], 0.0);
  EXPECT_DOUBLE_EQ(v0.value[2], 0.0);
  EXPECT_DOUBLE_EQ(v0.value[3], 0.0);
  const auto c = q1_eval({0.5, 0.5});
  for (double v : c.value) EXPECT_DOUBLE_EQ(v, 0.25);
  const auto e = q1_eval({0.5, 0.0});
  EXPECT_DOUBLE_EQ(e.value[0], 0.5);
  EXPECT_DOUBLE_EQ(e.value[1], 0.5);
  EXPECT_DOUBLE_EQ(e.value[2], 0.0);
  EXPECT_DOUBLE_EQ(e.value[3], 0.0);
}

TEST(Q1, PartitionOfUnity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const auto s = q1_eval({u(rng), u(rng)});
    EXPECT_NEAR(std::accumulate(s.value.begin(), s.value.end(), 0.0), 1.0, 1e-14);
    double gx = 0, gy = 0;
    for (const auto& g : s.grad) {
      gx += g[0];
      gy += g[1];
    }
    EXPECT_NEAR(gx, 0.0, 1e-14);
    EXPECT_NEAR(gy, 0.0, 1e-14);
  }
}

TEST(Q1, GaussWeights) {
  const auto cells = precompute_geometry(build_rectangle_mesh({0, 1}, {0, 1}, 1, 1));
  double w = 0;
  for (double x : cells[0].JxW) w += x;
  EXPECT_NEAR(w, 1.0, 1e-15);
  for (const auto& p : gauss_points()) {
    EXPECT_GT(p.x, 0.0);
    EXPECT_LT(p.x, 1.0);
  }
}

TEST(Mass, SingleUnitCell) {
  const Mesh m = build_rectangle_mesh({0, 1}, {0, 1}, 1, 1);
  const Eigen::MatrixXd M = dense(assemble_bulk_mass(m));
  // vertices 0 (0,0), 1 (1,0), 2 (0,1), 3 (1,1) in lexicographic order
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(M(i, i), 1.0 / 9, 1e-15);
  EXPECT_NEAR(M(0, 1), 1.0 / 18, 1e-15);
  EXPECT_NEAR(M(0, 2), 1.0 / 18, 1e-15);
  EXPECT_NEAR(M(0, 3), 1.0 / 36, 1e-15);
  EXPECT_NEAR(M(1, 2), 1.0 / 36, 1e-15);
}

TEST(Mass, RowSumsAndTotal) {
  const Mesh m = build_lshape_mesh(3);
  const SparseOperator M = assemble_bulk_mass(m);
  EXPECT_NEAR(dense(M).sum(), 0.75, 1e-14);
  const Eigen::VectorXd rows = M * Eigen::VectorXd::Ones(M.cols());
  EXPECT_TRUE((rows.array() > 0).all());
}

TEST(Mass, Scaling) {
  const SparseOperator M1 = assemble_bulk_mass(build_rectangle_mesh({0, 1}, {0, 1}, 3, 2));
  const SparseOperator M2 = assemble_bulk_mass(build_rectangle_mesh({0, 2}, {0, 2}, 3, 2));
  EXPECT_NEAR((dense(M2) - 4.0 * dense(M1)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(Mass, VectorVariant) {
  const Mesh m = build_rectangle_mesh({0, 1}, {0, 1}, 2, 2);
  const Eigen::MatrixXd S = dense(assemble_bulk_mass(m));
  const Eigen::MatrixXd V = dense(assemble_bulk_mass(m, FieldKind::Vector));
  ASSERT_EQ(V.rows(), 2 * S.rows());
  for (int i = 0; i < S.rows(); ++i)
    for (int j = 0; j < S.cols(); ++j) {
      EXPECT_NEAR(V(2 * i, 2 * j), S(i, j), 1e-15);
      EXPECT_NEAR(V(2 * i + 1, 2 * j + 1), S(i, j), 1e-15);
      EXPECT_EQ(V(2 * i, 2 * j + 1), 0.0);
    }
}

TEST(Mass, OrderIndependence) {
  const Mesh m = build_lshape_mesh(4);
  std::vector<int> order(m.num_cells());
  std::iota(order.begin(), order.end(), 0);
  const Eigen::MatrixXd A = dense(assemble_bulk_mass(m, order));
  std::mt19937_64 rng(3);
  std::shuffle(order.begin(), order.end(), rng);
  const Eigen::MatrixXd B = dense(assemble_bulk_mass(m, order));
  EXPECT_LE((A - B).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BoundaryMass, SingleEdge) {
  const double L = 0.25;
  const Mesh m = build_rectangle_mesh({0, L}, {0, 1}, 1, 1);
  const std::array tags{BoundaryTag::NeumannTop};
  const Eigen::MatrixXd G = dense(assemble_boundary_mass(m, tags));
  // top edge joins vertices 2 and 3
  EXPECT_NEAR(G(2, 2), L / 3, 1e-15);
  EXPECT_NEAR(G(3, 3), L / 3, 1e-15);
  EXPECT_NEAR(G(2, 3), L / 6, 1e-15);
  EXPECT_EQ(G(0, 0), 0.0);
  EXPECT_EQ(G(1, 1), 0.0);
}

TEST(BoundaryMass, TotalsAndUnion) {
  RectangleTags rt;
  rt.left = BoundaryTag::NeumannLeft;
  const Mesh m = build_rectangle_mesh({0, 1}, {0, 1}, 8, 8, rt);
  const std::array top{BoundaryTag::NeumannTop};
  EXPECT_NEAR(dense(assemble_boundary_mass(m, top)).sum(), 1.0, 1e-14);
  const std::array both{BoundaryTag::NeumannTop, BoundaryTag::NeumannLeft};
  EXPECT_NEAR(dense(assemble_boundary_mass(m, both)).sum(), 2.0, 1e-14);
  const std::array none{BoundaryTag::NeumannLeft};
  EXPECT_THROW((void)assemble_boundary_mass(build_rectangle_mesh({0, 1}, {0, 1}, 2, 2), none), InvalidGeometry);
}

TEST(DofMapTest, Layout) {
  const Mesh m = build_rectangle_mesh({0, 1}, {0, 1}, 3, 3);
  const DofMap d = make_dof_map(m);
  EXPECT_EQ(d.size(), 3 * 16);
  const auto bottom = m.boundary_nodes(BoundaryTag::DirichletBottom);
  EXPECT_EQ(d.dirichlet_dofs.size(), 2 * bottom.size());
  for (int v = 0; v < 16; ++v) {
    const bool on = std::binary_search(bottom.begin(), bottom.end(), v);
    EXPECT_EQ(d.constrained(dof(v, Ux)), on);
    EXPECT_EQ(d.constrained(dof(v, Uy)), on);
    EXPECT_FALSE(d.constrained(dof(v, Phi)));
  }
}

TEST(DofMapTest, DirichletKeepsSymmetry) {
  const Mesh m = build_rectangle_mesh({0, 1}, {0, 1}, 3, 3);
  const DofMap d = make_dof_map(m);
  SparseOperator A = lift_to_field(assemble_bulk_mass(m), Ux, 16) + lift_to_field(assemble_bulk_mass(m), Phi, 16);
  apply_dirichlet(A, d);
  const Eigen::MatrixXd D = dense(A);
  EXPECT_LE((D - D.transpose()).cwiseAbs().maxCoeff(), 0.0);
  for (int k : d.dirichlet_dofs) {
    EXPECT_EQ(D(k, k), 1.0);
    EXPECT_EQ(D.row(k).cwiseAbs().sum(), 1.0);
  }
}

TEST(Fields, ExtractInsert) {
  NodalField U = NodalField::LinSpaced(12, 0, 11);
  const NodalField phi = extract_field(U, Phi);
  ASSERT_EQ(phi.size(), 4);
  EXPECT_EQ(phi[1], 5.0);
  insert_field(U, Ux, NodalField::Constant(4, -1.0));
  EXPECT_EQ(U[3], -1.0);
  EXPECT_EQ(U[4], 4.0);
}

TEST(Pattern, ScatterMatchesMass) {
  const Mesh m = build_rectangle_mesh({0, 1}, {0, 1}, 2, 2);
  BlockPattern p(m, 1);
  SparseOperator A = p.prototype();
  const auto geo = precompute_geometry(m);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    std::array<double, 16> local{};
    for (int q = 0; q < kQuadPerCell; ++q)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) local[4 * a + b] += geo[c].N[q][a] * geo[c].N[q][b] * geo[c].JxW[q];
    p.scatter(A, static_cast<int>(c), local);
  }
  EXPECT_LE((dense(A) - dense(assemble_bulk_mass(m))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LinearSolve, Identity) {
  SparseOperator I(5, 5);
  I.setIdentity();
  const NodalField b = NodalField::LinSpaced(5, 1, 5);
  EXPECT_EQ(solve_linear(I, b), b);
}

TEST(LinearSolve, MassReproducesConstant) {
  const SparseOperator M = assemble_bulk_mass(build_rectangle_mesh({0, 1}, {0, 1}, 6, 4));
  const NodalField one = NodalField::Ones(M.rows());
  EXPECT_LE((solve_linear(M, M * one) - one).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((solve_cg_jacobi(M, M * one) - one).cwiseAbs().maxCoeff(), 1e-10);
}

// Plain Gaussian elimination with partial pivoting, kept independent of Eigen's solvers.
NodalField gauss_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[p][k])) p = i;
    std::swap(A[k], A[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  NodalField x(static_cast<Eigen::Index>(n));
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[static_cast<Eigen::Index>(j)];
    x[static_cast<Eigen::Index>(i)] = s / A[i][i];
  }
  return x;
}

TEST(LinearSolve, RandomSpdAgainstDenseOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 10;
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = u(rng);
  const Eigen::MatrixXd S = R * R.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  NodalField b(n);
  for (int i = 0; i < n; ++i) b[i] = u(rng);

  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rows[i][j] = S(i, j);
  const NodalField oracle = gauss_solve(rows, std::vector<double>(b.data(), b.data() + n));

  const SparseOperator A = S.sparseView();
  EXPECT_LE((solve_linear(A, b) - oracle).cwiseAbs().maxCoeff(), 1e-10);
  DirectSolver lu(A);
  EXPECT_LE((lu.solve_transposed(b) - oracle).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LinearSolve, TransposedSolve) {
  Eigen::MatrixXd D(3, 3);
  D << 4, 1, 0, 2, 5, 1, 0, 3, 6;
  const SparseOperator A = D.sparseView();
  DirectSolver lu(A);
  const NodalField b = NodalField::LinSpaced(3, 1, 3);
  EXPECT_LE((D.transpose() * lu.solve_transposed(b) - b).norm(), 1e-13);
  EXPECT_LE((D * lu.solve(b) - b).norm(), 1e-13);
}

TEST(LinearSolve, SingularThrows) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
  D(0, 0) = 1;
  D(1, 1) = 1;
  const SparseOperator A = D.sparseView();
  SparseOperator Af = A;
  Af.coeffRef(2, 2) = 0.0;
  EXPECT_THROW((void)solve_linear(Af, NodalField::Ones(3)), SolverFailure);
}

}  // namespace
}  // namespace pffc
