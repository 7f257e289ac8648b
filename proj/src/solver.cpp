#include "hbif/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hbif/linalg.hpp"

namespace hbif {

Solution make_solution(const Problem& problem, double a, GridFunction u, double c,
                       double tol_deg) {
    Solution s;
    s.a = a;
    s.c = c;
    s.residual_norm = norm_inf(residual(problem, a, u, c));
    s.t_phi = t_phi_component(problem, u);
    s.t_psi = t_psi_component(problem, u);
    s.spectrum = linearization_spectrum(problem, a, u, tol_deg);
    s.u = std::move(u);
    return s;
}

NewtonResult newton_solve(const Problem& problem, double a, double c,
                          const GridFunction& initial_guess, const SolverConfig& config) {
    NewtonResult result;
    GridFunction u = initial_guess;
    double rn = norm_inf(residual(problem, a, u, c));
    result.residual_history.push_back(rn);

    for (int it = 0; it < config.max_iterations; ++it) {
        if (rn <= config.newton_tol) {
            result.status = NewtonStatus::converged;
            result.solution = make_solution(problem, a, std::move(u), c, config.tol_deg);
            result.iterations = it;
            return result;
        }
        const TridiagonalOperator jac = jacobian(problem, a, u);
        GridFunction r = residual(problem, a, u, c);
        for (double& v : r)
            v = -v;
        GridFunction delta;
        if (!tridiagonal_solve(jac, r, delta)) {
            result.status = NewtonStatus::singular_jacobian;
            result.iterations = it;
            return result;
        }

        // backtracking line search on the residual norm
        double best_rn = std::numeric_limits<double>::infinity();
        GridFunction best_u;
        for (double alpha = 1.0; alpha >= config.damping_min * 0.999; alpha *= 0.5) {
            GridFunction trial = u;
            axpy(alpha, delta, trial);
            const double trial_rn = norm_inf(residual(problem, a, trial, c));
            if (std::isfinite(trial_rn) && trial_rn < best_rn) {
                best_rn = trial_rn;
                best_u = std::move(trial);
            }
            if (trial_rn < rn)
                break;
        }
        if (best_u.empty()) {
            result.iterations = it;
            return result; // residual not finite anywhere along the step
        }
        u = std::move(best_u);
        rn = best_rn;
        result.residual_history.push_back(rn);
    }

    if (rn <= config.newton_tol) {
        result.status = NewtonStatus::converged;
        result.solution = make_solution(problem, a, std::move(u), c, config.tol_deg);
    }
    result.iterations = config.max_iterations;
    return result;
}

BorderedResult bordered_solve(const TridiagonalOperator& op, const std::vector<double>& border_row,
                              const std::vector<double>& border_col, double corner,
                              const std::vector<double>& rhs_main, double rhs_border) {
    const int n = op.size();
    if (static_cast<int>(border_row.size()) != n || static_cast<int>(border_col.size()) != n ||
        static_cast<int>(rhs_main.size()) != n)
        throw std::invalid_argument("bordered_solve: size mismatch");

    BorderedResult out;

    double op_scale = 0;
    for (double v : op.diagonal)
        op_scale = std::max(op_scale, std::abs(v));
    for (double v : op.off_diagonal)
        op_scale = std::max(op_scale, std::abs(v));

    // fast path: block elimination with two tridiagonal solves
    std::vector<double> x1, x2;
    if (tridiagonal_solve(op, rhs_main, x1) && tridiagonal_solve(op, border_col, x2)) {
        const double denom = corner - dot(border_row, x2);
        const double row_scale = norm_inf(border_row) + std::abs(corner);
        if (std::abs(denom) > 1e-12 * std::max(1.0, row_scale * (1.0 + norm_inf(x2)))) {
            const double aux = (rhs_border - dot(border_row, x1)) / denom;
            std::vector<double> main = x1;
            axpy(-aux, x2, main);
            // accept only when the bordered residual is small
            std::vector<double> r = tridiagonal_apply(op, main);
            double res = 0;
            for (int i = 0; i < n; ++i)
                res = std::max(res, std::abs(r[i] + aux * border_col[i] - rhs_main[i]));
            const double rb = dot(border_row, main) + corner * aux - rhs_border;
            const double scale = std::max({1.0, op_scale * norm_inf(main), norm_inf(rhs_main)});
            if (res <= 1e-10 * scale &&
                std::abs(rb) <= 1e-10 * std::max(1.0, row_scale * (1.0 + norm_inf(main)))) {
                out.status = BorderedStatus::ok;
                out.main = std::move(main);
                out.aux = aux;
                return out;
            }
        }
    }

    // dense fallback; handles singular op with borders completing the rank
    DenseMatrix a(n + 1);
    for (int i = 0; i < n; ++i) {
        a(i, i) = op.diagonal[i];
        if (i > 0)
            a(i, i - 1) = op.off_diagonal[i - 1];
        if (i < n - 1)
            a(i, i + 1) = op.off_diagonal[i];
        a(i, n) = border_col[i];
        a(n, i) = border_row[i];
    }
    a(n, n) = corner;
    std::vector<double> rhs = rhs_main;
    rhs.push_back(rhs_border);
    std::vector<double> sol;
    if (!dense_solve(std::move(a), std::move(rhs), sol))
        return out;
    out.status = BorderedStatus::ok;
    out.main.assign(sol.begin(), sol.begin() + n);
    out.aux = sol[n];
    return out;
}

} // namespace hbif
