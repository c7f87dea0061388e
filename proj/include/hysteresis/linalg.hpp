#pragma once

#include <Eigen/Sparse>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyst {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Thrown by iterative solvers that exhaust their iteration budget.
class IterationLimitError : public std::runtime_error {
 public:
  IterationLimitError(const std::string& what, long iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  long iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  long iterations_;
  double residual_;
};

// Stationary vector of an irreducible generator by power iteration on the
// uniformized kernel I + Q/unif_rate. Stops when the max-norm of the
// difference of successive iterates is below tol.
std::vector<double> power_stationary(const SparseRowMatrix& generator, double unif_rate, double tol,
                                     long max_iter, long* iterations = nullptr);

// Stationary vector of a generator (or of P - I for a stochastic matrix P)
// by a sparse LU solve of pi*Q = 0 with the normalisation replacing one
// balance equation. Throws std::runtime_error when the system is singular
// (e.g. several recurrent classes).
std::vector<double> lu_stationary(const SparseRowMatrix& generator);

}  // namespace hyst
