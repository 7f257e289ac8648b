#pragma once

#include <cstddef>
#include <vector>

namespace hbif {

// Values at the interior nodes x_i = i/(n+1), i = 1..n, of a uniform grid
// on (0,1). Boundary values are implicitly zero.
using GridFunction = std::vector<double>;

struct Grid {
    int n = 0;          // interior node count
    double spacing = 0; // 1/(n+1)
    std::vector<double> nodes;
};

// Symmetric tridiagonal operator: one diagonal, one shared off-diagonal band.
struct TridiagonalOperator {
    std::vector<double> diagonal;     // length n
    std::vector<double> off_diagonal; // length n-1

    int size() const { return static_cast<int>(diagonal.size()); }
};

struct Eigenpair {
    double value = 0;
    GridFunction vector;
};

// Requires n >= 3 and n+1 divisible by 4, so that x = 1/4, 1/2, 3/4 are
// grid nodes (this makes max(psi) = 1 and beta = 1 exact).
Grid make_grid(int n);

// Three-point Dirichlet Laplacian: (u[i-1] - 2 u[i] + u[i+1]) / spacing^2.
GridFunction apply_laplacian(const Grid& grid, const GridFunction& u);

// Rectangle-rule inner product: spacing * sum(u_i v_i). The Laplacian is
// exactly self-adjoint with respect to it.
double inner_product(const Grid& grid, const GridFunction& u, const GridFunction& v);

double norm_l2(const Grid& grid, const GridFunction& u);
double norm_inf(const GridFunction& u);

// k-th Dirichlet eigenpair of -Laplacian on the grid: eigenvalue
// (4/spacing^2) sin^2(k pi spacing / 2), eigenvector sin(k pi x) rescaled so
// its maximum entry equals 1. 1 <= k <= n.
Eigenpair discrete_eigenpair(const Grid& grid, int k);

// The tridiagonal matrix of Delta_h + shift*I.
TridiagonalOperator laplacian_operator(const Grid& grid, double shift);

// sin(pi m / N) with exact integer argument reduction.
double sin_pi_frac(long long m, long long N);

} // namespace hbif
