#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "pffc/fem.hpp"

namespace pffc {

/// Raised when a factorization is singular or a solve cannot proceed.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symbolic (ordering) analysis of a sparsity pattern. Shared between
/// factorizations of matrices with an identical pattern.
class SymbolicAnalysis {
 public:
  explicit SymbolicAnalysis(const SparseOperator& A);
  ~SymbolicAnalysis();
  SymbolicAnalysis(const SymbolicAnalysis&) = delete;
  SymbolicAnalysis& operator=(const SymbolicAnalysis&) = delete;

  [[nodiscard]] bool matches(const SparseOperator& A) const;
  [[nodiscard]] void* handle() const { return symbolic_; }

 private:
  void* symbolic_ = nullptr;
  std::vector<int> outer_;
  std::vector<int> inner_;
};

/// Sparse LU of a square matrix with solves against A and its transpose.
class DirectSolver {
 public:
  DirectSolver() = default;
  explicit DirectSolver(const SparseOperator& A,
                        std::shared_ptr<const SymbolicAnalysis> symbolic = nullptr);
  ~DirectSolver();
  DirectSolver(DirectSolver&& other) noexcept;
  DirectSolver& operator=(DirectSolver&& other) noexcept;
  DirectSolver(const DirectSolver&) = delete;
  DirectSolver& operator=(const DirectSolver&) = delete;

  void factorize(const SparseOperator& A, std::shared_ptr<const SymbolicAnalysis> symbolic = nullptr);

  [[nodiscard]] bool ready() const { return numeric_ != nullptr; }
  [[nodiscard]] NodalField solve(const NodalField& b) const;
  [[nodiscard]] NodalField solve_transposed(const NodalField& b) const;
  /// Approximate bytes held by the numeric factors.
  [[nodiscard]] std::size_t memory_bytes() const { return bytes_; }
  [[nodiscard]] const std::shared_ptr<const SymbolicAnalysis>& symbolic() const { return symbolic_; }

 private:
  NodalField run(int sys, const NodalField& b) const;
  void release();

  SparseOperator A_;
  std::shared_ptr<const SymbolicAnalysis> symbolic_;
  void* numeric_ = nullptr;
  std::size_t bytes_ = 0;
};

NodalField solve_linear(const SparseOperator& A, const NodalField& b);

/// Conjugate gradients with Jacobi preconditioning, for SPD mass systems.
NodalField solve_cg_jacobi(const SparseOperator& A, const NodalField& b, double rel_tol = 1e-13,
                           int max_iters = 1000);

}  // namespace pffc
