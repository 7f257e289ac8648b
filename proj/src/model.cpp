#include "hbif/model.hpp"

#include <cmath>
#include <stdexcept>

namespace hbif {

CompetitionTerm make_competition_term(double threshold, double kappa, int power) {
    if (threshold < 0)
        throw std::invalid_argument("competition term: need M >= 0");
    if (kappa <= 0)
        throw std::invalid_argument("competition term: need kappa > 0");
    if (power < 3)
        throw std::invalid_argument("competition term: need p >= 3 for a C^2 family");
    return CompetitionTerm{threshold, kappa, power};
}

FDerivatives f_eval(const CompetitionTerm& f, double u) {
    FDerivatives d;
    const double s = u - f.threshold;
    if (s <= 0)
        return d;
    const double p = f.power;
    const double sp2 = std::pow(s, f.power - 2);
    d.second = f.kappa * p * (p - 1) * sp2;
    d.first = f.kappa * p * sp2 * s;
    d.value = f.kappa * sp2 * s * s;
    return d;
}

HarvestTerm build_harvest(const Grid& grid, const std::vector<std::pair<int, double>>& modes) {
    if (modes.empty())
        throw std::invalid_argument("harvest: need at least one mode");
    bool nonzero = false;
    for (const auto& [k, b] : modes) {
        if (k < 2)
            throw std::invalid_argument("harvest: modes must have k >= 2");
        if (k > grid.n)
            throw std::invalid_argument("harvest: mode index exceeds grid resolution");
        if (b != 0.0)
            nonzero = true;
    }
    if (!nonzero)
        throw std::invalid_argument("harvest: all coefficients are zero");

    HarvestTerm h;
    h.modes = modes;
    h.values.assign(grid.n, 0.0);
    for (const auto& [k, b] : modes)
        for (int i = 0; i < grid.n; ++i)
            h.values[i] += b * sin_pi_frac(static_cast<long long>(k) * (i + 1), grid.n + 1);

    // exact discrete projection orthogonal to phi
    const GridFunction phi = discrete_eigenpair(grid, 1).vector;
    const double pp = inner_product(grid, phi, phi);
    for (int pass = 0; pass < 2; ++pass) {
        const double coef = inner_product(grid, h.values, phi) / pp;
        for (int i = 0; i < grid.n; ++i)
            h.values[i] -= coef * phi[i];
    }

    const GridFunction psi = discrete_eigenpair(grid, 2).vector;
    h.psi_component = inner_product(grid, h.values, psi);
    const double scale = norm_inf(h.values) * norm_inf(psi);
    if (std::abs(h.psi_component) <= 1e-12 * std::max(scale, 1e-30))
        throw std::invalid_argument("harvest: <h,psi> = 0 violates hypothesis (c)");
    return h;
}

Problem make_problem(Grid grid, CompetitionTerm f, HarvestTerm h) {
    if (static_cast<int>(h.values.size()) != grid.n)
        throw std::invalid_argument("make_problem: harvest/grid size mismatch");
    Problem p;
    p.grid = std::move(grid);
    p.f = f;
    p.h = std::move(h);
    auto e1 = discrete_eigenpair(p.grid, 1);
    auto e2 = discrete_eigenpair(p.grid, 2);
    auto e3 = discrete_eigenpair(p.grid, 3);
    p.lambda1 = e1.value;
    p.lambda2 = e2.value;
    p.lambda3 = e3.value;
    p.phi = std::move(e1.vector);
    p.psi = std::move(e2.vector);
    double m = 0;
    for (double v : p.psi)
        m = std::min(m, v);
    p.beta = -m;
    p.phi_phi = inner_product(p.grid, p.phi, p.phi);
    p.psi_psi = inner_product(p.grid, p.psi, p.psi);
    return p;
}

GridFunction residual(const Problem& problem, double a, const GridFunction& u, double c) {
    const int n = problem.grid.n;
    const double inv_h2 = 1.0 / (problem.grid.spacing * problem.grid.spacing);
    GridFunction r(n);
    for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? u[i - 1] : 0.0;
        const double right = i < n - 1 ? u[i + 1] : 0.0;
        r[i] = (left - 2.0 * u[i] + right) * inv_h2 + a * u[i] - f_eval(problem.f, u[i]).value -
               c * problem.h.values[i];
    }
    return r;
}

TridiagonalOperator jacobian(const Problem& problem, double a, const GridFunction& u) {
    const int n = problem.grid.n;
    const double inv_h2 = 1.0 / (problem.grid.spacing * problem.grid.spacing);
    TridiagonalOperator op;
    op.diagonal.resize(n);
    op.off_diagonal.assign(n - 1, inv_h2);
    for (int i = 0; i < n; ++i)
        op.diagonal[i] = -2.0 * inv_h2 + a - f_eval(problem.f, u[i]).first;
    return op;
}

double t_phi_component(const Problem& problem, const GridFunction& u) {
    return inner_product(problem.grid, u, problem.phi) / problem.phi_phi;
}

double t_psi_component(const Problem& problem, const GridFunction& u) {
    return inner_product(problem.grid, u, problem.psi) / problem.psi_psi;
}

double phi_projection_defect(const Problem& problem, double a, const GridFunction& u) {
    GridFunction fu(problem.grid.n);
    for (int i = 0; i < problem.grid.n; ++i)
        fu[i] = f_eval(problem.f, u[i]).value;
    const double t = t_phi_component(problem, u);
    return (a - problem.lambda1) * t * problem.phi_phi - inner_product(problem.grid, fu, problem.phi);
}

HypothesisReport check_hypotheses(const Problem& problem) {
    HypothesisReport rep;
    const CompetitionTerm& f = problem.f;
    const double M = f.threshold;

    // (ii): zero below threshold, positive above
    rep.f_sign = true;
    for (int i = 0; i <= 40; ++i) {
        const double u = M - 2.0 + 7.0 * i / 40.0;
        const double v = f_eval(f, u).value;
        if (u <= M ? v != 0.0 : v <= 0.0)
            rep.f_sign = false;
    }

    // (iii): convexity on samples
    rep.f_convex = true;
    for (int i = 0; i <= 40; ++i)
        if (f_eval(f, M - 2.0 + 7.0 * i / 40.0).second < 0)
            rep.f_convex = false;

    // (i): C^2 needs p >= 3 (f'' continuous at M) -- guaranteed by
    // construction, re-check numerically that f'' -> 0 from above at M.
    rep.f_smooth = f.power >= 3 && std::abs(f_eval(f, M + 1e-9).second) < 1e-6;

    // (iv): f(u)/u grows without bound
    const double u1 = M + 10.0, u2 = M + 1000.0;
    rep.f_superlinear = f_eval(f, u2).value / u2 > 10.0 * f_eval(f, u1).value / u1;

    rep.h_bounded = std::isfinite(norm_inf(problem.h.values));
    const double hn = norm_inf(problem.h.values);
    rep.h_phi_orthogonal = std::abs(inner_product(problem.grid, problem.h.values, problem.phi)) <=
                           1e-13 * std::max(1.0, hn);
    rep.h_psi_nonzero = std::abs(inner_product(problem.grid, problem.h.values, problem.psi)) >
                        1e-12 * std::max(1.0, hn);
    return rep;
}

} // namespace hbif
