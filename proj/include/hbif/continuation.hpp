#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hbif/solver.hpp"

namespace hbif {

enum class MarkerKind { start, fold_index0, transition_index12, segment_endpoint };

struct Marker {
    int point = 0;
    MarkerKind kind = MarkerKind::start;
};

enum class Parametrization { arclength, chart, segment };

enum class TraceEnd {
    closed,
    reached_segment, // arrived at the far end of the analytic segment (a = lambda2)
    window_exit,
    step_budget,
    arclength_budget,
    fold_budget,
    stalled, // ds underflow without convergence
};

// Degenerate index-0 solution (turning point in c) with its kernel vector
// and the local fold coefficients.
struct FoldPoint {
    Solution solution;
    GridFunction kernel;            // w*, <w,w> = <phi,phi>, positive in the interior
    double h_w = 0;                 // <h, w*>, nonzero with the sign of c*
    double mu_prime = 0;            // <f''(u*) w*^3> / <w*,w*>, positive
    double c_second_derivative = 0; // -<f''(u*) w*^3> / <h, w*>, sign opposite to c*
    int side = 0;                   // sign of c*
};

struct FoldCurve {
    std::vector<std::pair<double, FoldPoint>> samples; // ascending in a
    int side = 0;
};

struct Branch {
    double a = 0;
    std::vector<Solution> points;
    std::vector<Marker> markers;
    std::vector<Parametrization> parameter_log; // one entry per point
    bool closed = false;
    TraceEnd termination = TraceEnd::step_budget;
    double final_ds = 0; // step length when the trace ended
    std::vector<FoldPoint> folds;      // refined index-0 folds, traversal order
    std::vector<Solution> transitions; // refined index 1<->2 transition points
};

struct StepConfig {
    double ds0 = 0.02;
    double ds_min = 1e-6;
    double ds_max = 0.2;
    double grow = 1.3;
    int grow_iterations = 3; // grow ds when the corrector needed at most this many steps
    int corrector_max_iterations = 12;
    int max_steps = 20000;
    double arclength_budget = 1e4;
    int fold_budget = 64;
    std::optional<std::pair<double, double>> c_window;
    SolverConfig newton;

    // t-chart switching (engaged above lambda2)
    double c_switch_factor = 0.1;    // chart activates once |c| < factor * |c_flat estimate|
    double kernel_proximity = 0.2;   // ... and |mu2(L)| < proximity * (lambda3 - lambda2)
    double chart_margin_factor = 0.25; // window beyond [-M/beta, M]: eps = factor * max(M, 0.1)
};

// The stable positive solution u_dagger(a) at c = 0, a > lambda1, obtained
// by natural continuation in a from just above lambda1.
Solution positive_branch_u_dagger(const Problem& problem, double a_target,
                                  const SolverConfig& config = {});

// Pseudo-arclength predictor-corrector in (u, c) at fixed a, starting from
// an accepted solution. Index changes along the way are refined into
// fold/transition markers.
Branch continue_in_c(const Problem& problem, double a, const Solution& start, int direction,
                     const StepConfig& step = {});

// Newton on the extended system {R(u,c) = 0, J(u) w = 0, <w,w> = <phi,phi>}
// seeded from a bracket of two branch points with opposite-sign critical
// eigenvalue.
FoldPoint locate_fold(const Problem& problem, double a, const Solution& bracket_lo,
                      const Solution& bracket_hi, const SolverConfig& config = {});

// Continuation of the extended fold system with a as parameter, one sample
// per point of a uniform a-grid.
FoldCurve track_folds_in_a(const Problem& problem, const FoldPoint& seed, double a_lo,
                           double a_hi, int samples, const SolverConfig& config = {});

// Full branch assembly at fixed a in (lambda1, lambda2 + delta]: arclength
// tracing, t-chart interludes near the psi-kernel region above lambda2, and
// the analytic degenerate segment at a = lambda2 exactly.
Branch trace_branch(const Problem& problem, double a, const StepConfig& step = {});

struct SolutionCount {
    int count = 0;
    bool tangential = false;     // a touch counted once
    bool ambiguous_fold = false; // c within 1e-9 of a fold c-value
};

// Transversal intersections of the branch with the line c = const.
SolutionCount count_solutions_at(const Branch& branch, double c);

// One Newton solve of the t-chart equations u = t psi + y, <y,psi> = 0 with
// unknowns (y, c), at fixed a and t.
NewtonResult chart_solve(const Problem& problem, double a, double t, const GridFunction& guess_u,
                         double guess_c, const SolverConfig& config = {});

// Central finite difference of c(t) at t = 0 on the chart, a > lambda2.
double chart_derivative_at_zero(const Problem& problem, double a, double dt,
                                const SolverConfig& config = {});

struct DeltaSearch {
    double delta = 0;
    int halvings = 0;
    Branch branch; // the successful trace at lambda2 + delta
};

// Halving search for a delta above lambda2 at which the traced branch shows
// the expected closed four-marker structure.
DeltaSearch find_delta_above_lambda2(const Problem& problem, const StepConfig& step = {});

// True when the branch has the closed structure expected just above
// lambda2: two adjacent index-1/2 transitions and two adjacent index-0
// folds of opposite c sign.
bool has_upper_structure(const Branch& branch);

double composite_distance(const Problem& problem, const Solution& p, const Solution& q);

} // namespace hbif
