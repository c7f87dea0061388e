#include "hysteresis/linalg.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace hyst {

std::vector<double> power_stationary(const SparseRowMatrix& generator, double unif_rate, double tol,
                                     long max_iter, long* iterations) {
  const int n = static_cast<int>(generator.rows());
  std::vector<double> pi(n, 1.0 / n), next(n);
  double residual = 0.0;
  for (long it = 1; it <= max_iter; ++it) {
    next = pi;
    for (int i = 0; i < n; ++i) {
      const double w = pi[i] / unif_rate;
      if (w == 0.0) continue;
      for (SparseRowMatrix::InnerIterator e(generator, i); e; ++e) next[e.col()] += w * e.value();
    }
    double sum = 0.0;
    for (double v : next) sum += v;
    residual = 0.0;
    for (int i = 0; i < n; ++i) {
      next[i] /= sum;
      residual = std::max(residual, std::abs(next[i] - pi[i]));
    }
    pi.swap(next);
    if (residual < tol) {
      if (iterations) *iterations = it;
      return pi;
    }
  }
  std::ostringstream os;
  os << "power method did not converge in " << max_iter << " iterations (residual " << residual << ")";
  throw IterationLimitError(os.str(), max_iter, residual);
}

std::vector<double> lu_stationary(const SparseRowMatrix& generator) {
  const int n = static_cast<int>(generator.rows());
  if (n == 1) return {1.0};
  // Solve Q^T pi = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(generator.nonZeros() + n);
  for (int i = 0; i < n; ++i)
    for (SparseRowMatrix::InnerIterator e(generator, i); e; ++e)
      if (e.col() != n - 1) trips.emplace_back(static_cast<int>(e.col()), i, e.value());
  for (int j = 0; j < n; ++j) trips.emplace_back(n - 1, j, 1.0);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary solve failed: singular system");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw std::runtime_error("stationary solve failed");
  std::vector<double> pi(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    pi[i] = std::max(x[i], 0.0);
    sum += pi[i];
  }
  for (double& v : pi) v /= sum;
  return pi;
}

}  // namespace hyst
