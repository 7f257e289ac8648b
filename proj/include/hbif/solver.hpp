#pragma once

#include <vector>

#include "hbif/model.hpp"
#include "hbif/spectrum.hpp"

namespace hbif {

struct SolverConfig {
    double newton_tol = 1e-10;
    int max_iterations = 40;
    double damping_min = 1.0 / 64.0;
    double tol_deg = 1e-8; // degeneracy band for the spectrum report
};

// An accepted solution triple (a, u, c) with diagnostics.
struct Solution {
    double a = 0;
    GridFunction u;
    double c = 0;
    double residual_norm = 0;
    double t_phi = 0; // <u,phi>/<phi,phi>
    double t_psi = 0; // <u,psi>/<psi,psi>
    SpectrumReport spectrum;
};

enum class NewtonStatus { converged, max_iterations, singular_jacobian };

struct NewtonResult {
    NewtonStatus status = NewtonStatus::max_iterations;
    Solution solution; // valid iff converged
    int iterations = 0;
    std::vector<double> residual_history;

    bool ok() const { return status == NewtonStatus::converged; }
};

// Damped Newton at fixed (a, c): backtracks by halving until the residual
// decreases, with floor damping_min.
NewtonResult newton_solve(const Problem& problem, double a, double c,
                          const GridFunction& initial_guess, const SolverConfig& config = {});

// Builds the Solution record (t components, spectrum) for an already
// converged u; residual_norm is recomputed.
Solution make_solution(const Problem& problem, double a, GridFunction u, double c,
                       double tol_deg = 1e-8);

enum class BorderedStatus { ok, singular };

struct BorderedResult {
    BorderedStatus status = BorderedStatus::singular;
    std::vector<double> main;
    double aux = 0;

    bool ok() const { return status == BorderedStatus::ok; }
};

// Solves the (n+1) x (n+1) system
//     [ op          border_col ] [ main ]   [ rhs_main   ]
//     [ border_row^T    corner ] [ aux  ] = [ rhs_border ]
// (border_row enters as a plain dot product). Block elimination by two
// tridiagonal solves when op is safely regular, otherwise a dense
// partial-pivot path; the bordered system may be nonsingular even when op
// itself is singular.
BorderedResult bordered_solve(const TridiagonalOperator& op, const std::vector<double>& border_row,
                              const std::vector<double>& border_col, double corner,
                              const std::vector<double>& rhs_main, double rhs_border);

inline SpectrumReport morse_index(const Problem& problem, const Solution& s,
                                  double tol_deg = 1e-8) {
    return linearization_spectrum(problem, s.a, s.u, tol_deg);
}

} // namespace hbif
