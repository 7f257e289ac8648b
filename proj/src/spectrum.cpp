#include "hbif/spectrum.hpp"

#include <cmath>
#include <stdexcept>

#include "hbif/linalg.hpp"

namespace hbif {

namespace {

// Gershgorin bounds on the spectrum.
std::pair<double, double> spectral_bounds(const TridiagonalOperator& op) {
    const int n = op.size();
    double lo = op.diagonal[0], hi = op.diagonal[0];
    for (int i = 0; i < n; ++i) {
        double r = 0;
        if (i > 0)
            r += std::abs(op.off_diagonal[i - 1]);
        if (i < n - 1)
            r += std::abs(op.off_diagonal[i]);
        lo = std::min(lo, op.diagonal[i] - r);
        hi = std::max(hi, op.diagonal[i] + r);
    }
    return {lo, hi};
}

// bisects until the midpoint is no longer representable between the bounds
double bisect_eigenvalue(const TridiagonalOperator& op, int k) {
    auto [lo, hi] = spectral_bounds(op);
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        if (sturm_count_below(op, mid) >= k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

GridFunction inverse_iteration(const TridiagonalOperator& op, double shift) {
    const int n = op.size();
    const double scale = std::max(std::abs(spectral_bounds(op).second), 1.0);
    TridiagonalOperator shifted = op;

    GridFunction v(n);
    for (int i = 0; i < n; ++i)
        v[i] = 1.0 + 0.3 * std::sin(2.7 * (i + 1)); // fixed, generic start

    double offset = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        for (int i = 0; i < n; ++i)
            shifted.diagonal[i] = op.diagonal[i] - (shift + offset);
        bool ok = true;
        GridFunction w = v;
        for (int it = 0; it < 8 && ok; ++it) {
            GridFunction next;
            ok = tridiagonal_solve(shifted, w, next);
            if (!ok)
                break;
            double m = norm_inf(next);
            if (!(m > 0) || !std::isfinite(m)) {
                ok = false;
                break;
            }
            for (double& x : next)
                x /= m;
            // converged when the residual of the Rayleigh pair is tiny
            GridFunction av = tridiagonal_apply(op, next);
            const double mu = dot(next, av) / dot(next, next);
            double res = 0;
            for (int i = 0; i < n; ++i)
                res = std::max(res, std::abs(av[i] - mu * next[i]));
            w = next;
            if (res <= 1e-12 * scale)
                return w;
        }
        if (ok)
            return w;
        offset = (offset == 0.0 ? 1e-12 * scale : offset * 32.0);
    }
    throw std::runtime_error("inverse iteration did not converge");
}

} // namespace

int sturm_count_below(const TridiagonalOperator& op, double x) {
    const int n = op.size();
    double pivmin = 1e-300;
    for (int i = 0; i + 1 < n; ++i)
        pivmin = std::max(pivmin, 1e-30 * op.off_diagonal[i] * op.off_diagonal[i]);
    // zero pivots are pushed to -pivmin before the sign test (counts ties
    // as below, keeps the recurrence finite)
    int count = 0;
    double q = op.diagonal[0] - x;
    if (std::abs(q) <= pivmin)
        q = -pivmin;
    if (q < 0)
        ++count;
    for (int i = 1; i < n; ++i) {
        const double e = op.off_diagonal[i - 1];
        q = (op.diagonal[i] - x) - e * e / q;
        if (std::abs(q) <= pivmin)
            q = -pivmin;
        if (q < 0)
            ++count;
    }
    return count;
}

Inertia inertia(const TridiagonalOperator& op, double shift, double zero_band) {
    Inertia in;
    const int n = op.size();
    in.negatives = sturm_count_below(op, shift - zero_band);
    const int below_hi = sturm_count_below(op, shift + zero_band);
    in.zeros = below_hi - in.negatives;
    in.positives = n - below_hi;
    return in;
}

double eigenvalue_by_index(const TridiagonalOperator& op, int k) {
    if (k < 1 || k > op.size())
        throw std::invalid_argument("eigenvalue_by_index: k out of range");
    return bisect_eigenvalue(op, k);
}

Eigenpair eigenpair_by_index(const Grid& grid, const TridiagonalOperator& op, int k) {
    Eigenpair ep;
    ep.value = bisect_eigenvalue(op, k);
    ep.vector = inverse_iteration(op, ep.value);
    // Rayleigh polish
    GridFunction av = tridiagonal_apply(op, ep.vector);
    ep.value = dot(ep.vector, av) / dot(ep.vector, ep.vector);

    // orient: largest-magnitude entry positive
    double big = 0;
    for (double v : ep.vector)
        if (std::abs(v) > std::abs(big))
            big = v;
    const GridFunction phi = discrete_eigenpair(grid, 1).vector;
    const double target = inner_product(grid, phi, phi);
    const double s = std::sqrt(target / inner_product(grid, ep.vector, ep.vector));
    for (double& v : ep.vector)
        v *= big < 0 ? -s : s;
    return ep;
}

Eigenpair smallest_eigenpair(const Grid& grid, const TridiagonalOperator& op) {
    return eigenpair_by_index(grid, op, 1);
}

SpectrumReport linearization_spectrum(const Problem& problem, double a, const GridFunction& u,
                                      double tol_deg) {
    // L = -(Delta_h + a - f'(u))
    TridiagonalOperator L = jacobian(problem, a, u);
    for (double& d : L.diagonal)
        d = -d;
    for (double& e : L.off_diagonal)
        e = -e;

    const double band = tol_deg * std::max(1.0, problem.lambda1);
    SpectrumReport rep;
    const Inertia in = inertia(L, 0.0, band);
    rep.morse_index = in.negatives;
    rep.degenerate = in.zeros > 0;
    rep.smallest_eigenvalue = eigenvalue_by_index(L, 1);
    if (rep.degenerate) {
        Eigenpair kp = eigenpair_by_index(problem.grid, L, in.negatives + 1);
        rep.eigenvalue_near_zero = kp.value;
        // sign convention: <w,phi> >= 0, falling back to <w,psi> >= 0 when
        // the phi component vanishes (kernel along psi)
        const double wphi = inner_product(problem.grid, kp.vector, problem.phi);
        const double wpsi = inner_product(problem.grid, kp.vector, problem.psi);
        const double tol = 1e-10 * problem.phi_phi;
        double sign = 1.0;
        if (wphi < -tol)
            sign = -1.0;
        else if (std::abs(wphi) <= tol && wpsi < 0)
            sign = -1.0;
        if (sign < 0)
            for (double& v : kp.vector)
                v = -v;
        rep.kernel_vector = std::move(kp.vector);
    }
    return rep;
}

} // namespace hbif
