#include "hbif/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace hbif {

// sin(pi m / N) with the argument reduced exactly in integers, so sampled
// sine modes keep full precision for every k and hit their zeros exactly.
double sin_pi_frac(long long m, long long N) {
    long long r = m % (2 * N);
    if (r < 0)
        r += 2 * N;
    double sign = 1.0;
    if (r >= N) {
        r -= N;
        sign = -1.0;
    }
    if (2 * r > N)
        r = N - r;
    return sign * std::sin(M_PI * static_cast<double>(r) / static_cast<double>(N));
}

Grid make_grid(int n) {
    if (n < 3)
        throw std::invalid_argument("make_grid: need n >= 3");
    if ((n + 1) % 4 != 0)
        throw std::invalid_argument("make_grid: need n+1 divisible by 4");
    Grid g;
    g.n = n;
    g.spacing = 1.0 / (n + 1);
    g.nodes.resize(n);
    for (int i = 0; i < n; ++i)
        g.nodes[i] = (i + 1) * g.spacing;
    return g;
}

GridFunction apply_laplacian(const Grid& grid, const GridFunction& u) {
    const int n = grid.n;
    if (static_cast<int>(u.size()) != n)
        throw std::invalid_argument("apply_laplacian: size mismatch");
    const double inv_h2 = 1.0 / (grid.spacing * grid.spacing);
    GridFunction out(n);
    for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? u[i - 1] : 0.0;
        const double right = i < n - 1 ? u[i + 1] : 0.0;
        out[i] = (left - 2.0 * u[i] + right) * inv_h2;
    }
    return out;
}

double inner_product(const Grid& grid, const GridFunction& u, const GridFunction& v) {
    if (u.size() != v.size() || static_cast<int>(u.size()) != grid.n)
        throw std::invalid_argument("inner_product: size mismatch");
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += u[i] * v[i];
    return grid.spacing * s;
}

double norm_l2(const Grid& grid, const GridFunction& u) {
    return std::sqrt(inner_product(grid, u, u));
}

double norm_inf(const GridFunction& u) {
    double m = 0;
    for (double x : u)
        m = std::max(m, std::abs(x));
    return m;
}

Eigenpair discrete_eigenpair(const Grid& grid, int k) {
    if (k < 1 || k > grid.n)
        throw std::invalid_argument("discrete_eigenpair: k out of range");
    const double h = grid.spacing;
    Eigenpair ep;
    const double s = std::sin(0.5 * k * M_PI * h);
    ep.value = 4.0 / (h * h) * s * s;
    ep.vector.resize(grid.n);
    double vmax = 0;
    for (int i = 0; i < grid.n; ++i) {
        ep.vector[i] = sin_pi_frac(static_cast<long long>(k) * (i + 1), grid.n + 1);
        vmax = std::max(vmax, ep.vector[i]);
    }
    for (double& v : ep.vector)
        v /= vmax;
    return ep;
}

TridiagonalOperator laplacian_operator(const Grid& grid, double shift) {
    const double inv_h2 = 1.0 / (grid.spacing * grid.spacing);
    TridiagonalOperator op;
    op.diagonal.assign(grid.n, -2.0 * inv_h2 + shift);
    op.off_diagonal.assign(grid.n - 1, inv_h2);
    return op;
}

} // namespace hbif
