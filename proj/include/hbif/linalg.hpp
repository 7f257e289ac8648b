#pragma once

#include <vector>

#include "hbif/grid.hpp"

namespace hbif {

// y = op * x for a symmetric tridiagonal operator.
std::vector<double> tridiagonal_apply(const TridiagonalOperator& op, const std::vector<double>& x);

// Solves op * x = rhs by LU with partial pivoting (stable for indefinite
// matrices). Returns false when a pivot falls below the singularity
// threshold; x is then unusable.
bool tridiagonal_solve(const TridiagonalOperator& op, const std::vector<double>& rhs,
                       std::vector<double>& x);

// Row-major square dense matrix, only what the fallback paths need.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    explicit DenseMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  private:
    int n_ = 0;
    std::vector<double> a_;
};

// In-place LU factorization with partial pivoting followed by a solve and
// one step of iterative refinement. Returns false on singular factor.
bool dense_solve(DenseMatrix a, std::vector<double> rhs, std::vector<double>& x);

double dot(const std::vector<double>& a, const std::vector<double>& b);

// y += alpha * x
void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y);

} // namespace hbif
