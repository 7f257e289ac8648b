#include "hbif/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace hbif {

std::vector<double> tridiagonal_apply(const TridiagonalOperator& op, const std::vector<double>& x) {
    const int n = op.size();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = op.diagonal[i] * x[i];
        if (i > 0)
            s += op.off_diagonal[i - 1] * x[i - 1];
        if (i < n - 1)
            s += op.off_diagonal[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

// dgtsv-style elimination: partial pivoting between adjacent rows creates a
// second superdiagonal, nothing more.
bool tridiagonal_solve(const TridiagonalOperator& op, const std::vector<double>& rhs,
                       std::vector<double>& x) {
    const int n = op.size();
    if (static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("tridiagonal_solve: size mismatch");

    std::vector<double> d(op.diagonal);          // main diagonal
    std::vector<double> du(n - 1), du2(n > 1 ? n - 2 : 0, 0.0);
    std::vector<double> dl(op.off_diagonal);     // subdiagonal (mutated)
    for (int i = 0; i < n - 1; ++i)
        du[i] = op.off_diagonal[i];
    std::vector<double> b(rhs);

    double scale = 0;
    for (int i = 0; i < n; ++i)
        scale = std::max(scale, std::abs(d[i]));
    for (double v : dl)
        scale = std::max(scale, std::abs(v));
    const double tiny = 1e-14 * std::max(scale, 1.0);

    for (int i = 0; i < n - 1; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (std::abs(d[i]) <= tiny)
                return false;
            const double m = dl[i] / d[i];
            d[i + 1] -= m * du[i];
            b[i + 1] -= m * b[i];
            if (i < n - 2)
                du2[i] = 0.0;
        } else {
            // swap rows i and i+1
            const double m = d[i] / dl[i];
            d[i] = dl[i];
            double tmp = d[i + 1];
            d[i + 1] = du[i] - m * tmp;
            du[i] = tmp;
            if (i < n - 2) {
                du2[i] = du[i + 1];
                du[i + 1] = -m * du2[i];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= m * b[i];
        }
    }
    if (std::abs(d[n - 1]) <= tiny)
        return false;

    x.assign(n, 0.0);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n > 1)
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (int i = n - 3; i >= 0; --i)
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    return true;
}

namespace {

bool lu_factor(DenseMatrix& a, std::vector<int>& piv) {
    const int n = a.size();
    piv.resize(n);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        piv[k] = p;
        if (best == 0.0)
            return false;
        if (p != k)
            for (int j = 0; j < n; ++j)
                std::swap(a(k, j), a(p, j));
        const double inv = 1.0 / a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double m = a(i, k) * inv;
            a(i, k) = m;
            if (m != 0.0)
                for (int j = k + 1; j < n; ++j)
                    a(i, j) -= m * a(k, j);
        }
    }
    return true;
}

void lu_solve_factored(const DenseMatrix& lu, const std::vector<int>& piv,
                       std::vector<double>& b) {
    const int n = lu.size();
    for (int k = 0; k < n; ++k) {
        if (piv[k] != k)
            std::swap(b[k], b[piv[k]]);
        for (int i = k + 1; i < n; ++i)
            b[i] -= lu(i, k) * b[k];
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j)
            b[i] -= lu(i, j) * b[j];
        b[i] /= lu(i, i);
    }
}

} // namespace

bool dense_solve(DenseMatrix a, std::vector<double> rhs, std::vector<double>& x) {
    const int n = a.size();
    if (static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("dense_solve: size mismatch");
    DenseMatrix orig(a);
    std::vector<int> piv;
    if (!lu_factor(a, piv))
        return false;
    x = rhs;
    lu_solve_factored(a, piv, x);
    // one refinement step
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
        double s = rhs[i];
        for (int j = 0; j < n; ++j)
            s -= orig(i, j) * x[j];
        r[i] = s;
    }
    lu_solve_factored(a, piv, r);
    for (int i = 0; i < n; ++i)
        x[i] += r[i];
    return true;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

} // namespace hbif
