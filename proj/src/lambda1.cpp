#include "hbif/lambda1.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hbif/linalg.hpp"
#include "hbif/solver.hpp"

namespace hbif {

GridFunction solve_resolvent_g(const Problem& problem) {
    const TridiagonalOperator op = laplacian_operator(problem.grid, problem.lambda1);
    BorderedResult r = bordered_solve(op, problem.phi, problem.phi, 0.0, problem.h.values, 0.0);
    if (!r.ok())
        throw std::runtime_error("resolvent: bordered system singular (is <h,phi> = 0?)");
    GridFunction g = std::move(r.main);
    // a couple of refinement passes tighten the residual to rounding level
    for (int pass = 0; pass < 2; ++pass) {
        GridFunction res = tridiagonal_apply(op, g);
        for (int i = 0; i < problem.grid.n; ++i)
            res[i] = problem.h.values[i] - res[i];
        BorderedResult corr =
            bordered_solve(op, problem.phi, problem.phi, 0.0, res, -dot(problem.phi, g));
        if (!corr.ok())
            break;
        axpy(1.0, corr.main, g);
    }
    // exact phi-projection; (Delta+lambda1) phi = 0, so the residual is untouched
    const double coef = inner_product(problem.grid, g, problem.phi) / problem.phi_phi;
    for (int i = 0; i < problem.grid.n; ++i)
        g[i] -= coef * problem.phi[i];
    return g;
}

CRange c_range_at_t(const GridFunction& g, const Problem& problem, double t) {
    const double M = problem.f.threshold;
    const double gtol = 1e-13 * std::max(1.0, norm_inf(g));
    CRange r;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < problem.grid.n; ++i) {
        const double slack = M - t * problem.phi[i];
        if (g[i] > gtol)
            hi = std::min(hi, slack / g[i]);
        else if (g[i] < -gtol)
            lo = std::max(lo, slack / g[i]);
        else if (slack < 0)
            return r; // c-independent constraint violated
    }
    if (lo <= hi) {
        r.feasible = true;
        r.lo = lo;
        r.hi = hi;
    }
    return r;
}

double compute_T(const GridFunction& g, const Problem& problem) {
    const double M = problem.f.threshold;
    double lo = M; // (M, 0) is always feasible
    if (!c_range_at_t(g, problem, lo).feasible)
        throw std::runtime_error("compute_T: t = M unexpectedly infeasible");
    double hi = std::max(2.0 * M, 1.0);
    int guard = 0;
    while (c_range_at_t(g, problem, hi).feasible) {
        hi *= 2.0;
        if (++guard > 60)
            throw std::runtime_error("compute_T: T appears unbounded (g one-signed?)");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (c_range_at_t(g, problem, mid).feasible)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

LambdaSet build_lambda_set(const Problem& problem, int samples, double t_lo) {
    LambdaSet set;
    set.g = solve_resolvent_g(problem);
    set.T = compute_T(set.g, problem);
    if (t_lo >= set.T)
        throw std::invalid_argument("build_lambda_set: t_lo must lie below T");
    set.t_samples.resize(samples);
    set.c_minus.resize(samples);
    set.c_plus.resize(samples);
    for (int i = 0; i < samples; ++i) {
        const double t = t_lo + (set.T - t_lo) * i / (samples - 1.0);
        const CRange r = c_range_at_t(set.g, problem, t);
        if (!r.feasible)
            throw std::runtime_error("build_lambda_set: infeasible sample below T");
        set.t_samples[i] = t;
        set.c_minus[i] = r.lo;
        set.c_plus[i] = r.hi;
    }
    const CRange r0 = c_range_at_t(set.g, problem, 0.0);
    set.c_star_minus = r0.lo;
    set.c_star_plus = r0.hi;
    return set;
}

namespace {

// Inverse of a strictly monotone sampled curve by bisection on the sample
// grid plus local linear interpolation.
double invert_monotone(const std::vector<double>& t, const std::vector<double>& y, double target,
                       bool increasing) {
    const int n = static_cast<int>(t.size());
    auto above = [&](int i) { return increasing ? y[i] >= target : y[i] <= target; };
    if (above(0))
        return t[0];
    if (!above(n - 1))
        return t[n - 1];
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (above(mid))
            hi = mid;
        else
            lo = mid;
    }
    const double dy = y[hi] - y[lo];
    if (dy == 0.0)
        return t[lo];
    return t[lo] + (target - y[lo]) / dy * (t[hi] - t[lo]);
}

} // namespace

TauLimit tau_and_limit(const LambdaSet& set, const Problem& problem, double c) {
    TauLimit out;
    if (c < set.c_star_minus)
        out.tau0 = invert_monotone(set.t_samples, set.c_minus, c, true);
    else if (c > set.c_star_plus)
        out.tau0 = invert_monotone(set.t_samples, set.c_plus, c, false);
    else
        out.tau0 = 0.0;
    out.u_limit.resize(problem.grid.n);
    for (int i = 0; i < problem.grid.n; ++i)
        out.u_limit[i] = out.tau0 * problem.phi[i] + c * set.g[i];
    return out;
}

double tau_profile(const LambdaSet& set, double t_hat, double c) {
    if (t_hat >= 0)
        throw std::invalid_argument("tau_profile: need t_hat < 0");
    if (c <= set.c_star_minus)
        return std::min(invert_monotone(set.t_samples, set.c_minus, c, true), t_hat);
    if (c >= set.c_star_plus)
        return std::min(t_hat, invert_monotone(set.t_samples, set.c_plus, c, false));
    return t_hat;
}

double t_c_profile(const LambdaSet& set, const Problem& problem, double c) {
    if (problem.f.threshold <= 0)
        throw std::invalid_argument("t_c_profile: defined only for M > 0");
    if (c < set.c_star_minus || c > set.c_star_plus)
        throw std::invalid_argument("t_c_profile: c outside [c*-, c*+]");
    const double cmT = set.c_minus.back();
    const double cpT = set.c_plus.back();
    if (c < cmT)
        return invert_monotone(set.t_samples, set.c_minus, c, true);
    if (c > cpT)
        return invert_monotone(set.t_samples, set.c_plus, c, false);
    return set.T;
}

} // namespace hbif
