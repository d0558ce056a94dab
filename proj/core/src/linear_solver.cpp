#include "pffc/linear_solver.hpp"

#include <cmath>
#include <string>

#include <umfpack.h>

namespace pffc {

namespace {

void require_compressed_square(const SparseOperator& A) {
  if (A.rows() != A.cols()) throw SolverFailure("matrix is not square");
  if (!A.isCompressed()) throw SolverFailure("matrix must be in compressed storage");
}

std::string status_text(int status) {
  return "umfpack status " + std::to_string(status);
}

}  // namespace

SymbolicAnalysis::SymbolicAnalysis(const SparseOperator& A) {
  require_compressed_square(A);
  const auto n = static_cast<int>(A.rows());
  outer_.assign(A.outerIndexPtr(), A.outerIndexPtr() + n + 1);
  inner_.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
  double info[UMFPACK_INFO];
  const int status = umfpack_di_symbolic(n, n, A.outerIndexPtr(), A.innerIndexPtr(), A.valuePtr(),
                                         &symbolic_, nullptr, info);
  if (status != UMFPACK_OK) throw SolverFailure("symbolic analysis failed: " + status_text(status));
}

SymbolicAnalysis::~SymbolicAnalysis() {
  if (symbolic_ != nullptr) umfpack_di_free_symbolic(&symbolic_);
}

bool SymbolicAnalysis::matches(const SparseOperator& A) const {
  if (static_cast<std::size_t>(A.rows()) + 1 != outer_.size()) return false;
  if (static_cast<std::size_t>(A.nonZeros()) != inner_.size()) return false;
  return std::equal(outer_.begin(), outer_.end(), A.outerIndexPtr()) &&
         std::equal(inner_.begin(), inner_.end(), A.innerIndexPtr());
}

DirectSolver::DirectSolver(const SparseOperator& A, std::shared_ptr<const SymbolicAnalysis> symbolic) {
  factorize(A, std::move(symbolic));
}

DirectSolver::~DirectSolver() { release(); }

DirectSolver::DirectSolver(DirectSolver&& other) noexcept
    : A_(std::move(other.A_)),
      symbolic_(std::move(other.symbolic_)),
      numeric_(other.numeric_),
      bytes_(other.bytes_) {
  other.numeric_ = nullptr;
  other.bytes_ = 0;
}

DirectSolver& DirectSolver::operator=(DirectSolver&& other) noexcept {
  if (this != &other) {
    release();
    A_ = std::move(other.A_);
    symbolic_ = std::move(other.symbolic_);
    numeric_ = other.numeric_;
    bytes_ = other.bytes_;
    other.numeric_ = nullptr;
    other.bytes_ = 0;
  }
  return *this;
}

void DirectSolver::release() {
  if (numeric_ != nullptr) umfpack_di_free_numeric(&numeric_);
  numeric_ = nullptr;
  bytes_ = 0;
}

void DirectSolver::factorize(const SparseOperator& A, std::shared_ptr<const SymbolicAnalysis> symbolic) {
  require_compressed_square(A);
  release();
  A_ = A;
  if (symbolic == nullptr || !symbolic->matches(A_)) {
    symbolic = std::make_shared<const SymbolicAnalysis>(A_);
  }
  symbolic_ = std::move(symbolic);
  double info[UMFPACK_INFO];
  const int status = umfpack_di_numeric(A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(),
                                        symbolic_->handle(), &numeric_, nullptr, info);
  if (!std::isfinite(info[UMFPACK_UMAX])) {
    release();
    throw SolverFailure("factorization produced non-finite pivots; the BLAS library is suspect");
  }
  if (status != UMFPACK_OK) {
    release();
    throw SolverFailure(status == UMFPACK_WARNING_singular_matrix
                            ? std::string("matrix is singular")
                            : "numeric factorization failed: " + status_text(status));
  }
  bytes_ = static_cast<std::size_t>(info[UMFPACK_NUMERIC_SIZE] * info[UMFPACK_SIZE_OF_UNIT]) +
           static_cast<std::size_t>(A_.nonZeros()) * (sizeof(double) + sizeof(int));
}

NodalField DirectSolver::run(int sys, const NodalField& b) const {
  if (numeric_ == nullptr) throw SolverFailure("solve before factorization");
  if (b.size() != A_.rows()) throw SolverFailure("right-hand side has wrong length");
  NodalField x(b.size());
  double info[UMFPACK_INFO];
  const int status = umfpack_di_solve(sys, A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(),
                                      x.data(), b.data(), numeric_, nullptr, info);
  if (status != UMFPACK_OK) throw SolverFailure("solve failed: " + status_text(status));
  if (!x.allFinite()) throw SolverFailure("solve produced non-finite values");
  return x;
}

NodalField DirectSolver::solve(const NodalField& b) const { return run(UMFPACK_A, b); }

NodalField DirectSolver::solve_transposed(const NodalField& b) const { return run(UMFPACK_At, b); }

NodalField solve_linear(const SparseOperator& A, const NodalField& b) {
  if (A.isCompressed()) return DirectSolver(A).solve(b);
  SparseOperator C = A;
  C.makeCompressed();
  return DirectSolver(C).solve(b);
}

NodalField solve_cg_jacobi(const SparseOperator& A, const NodalField& b, double rel_tol, int max_iters) {
  const NodalField diag = A.diagonal();
  if ((diag.array() <= 0.0).any()) throw SolverFailure("Jacobi CG needs a positive diagonal");
  const NodalField inv = diag.cwiseInverse();
  NodalField x = NodalField::Zero(b.size());
  NodalField r = b;
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;
  NodalField z = inv.cwiseProduct(r);
  NodalField p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iters; ++it) {
    const NodalField Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw SolverFailure("Jacobi CG met a non-positive curvature");
    const double step = rz / pAp;
    x += step * p;
    r -= step * Ap;
    if (r.norm() <= rel_tol * bnorm) return x;
    z = inv.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw SolverFailure("Jacobi CG did not converge in " + std::to_string(max_iters) + " iterations");
}

}  // namespace pffc
