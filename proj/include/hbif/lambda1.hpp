#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hbif/model.hpp"

namespace hbif {

// Geometry of the solution set at a = lambda1: all solutions there are
// u = t phi + c g with g = (Delta_h + lambda1)^{-1} h, constrained by
// t phi + c g <= M pointwise. The feasible (t,c) region is closed and
// convex, bounded above in t by T, and bounded laterally by the monotone
// curves c_minus (increasing, convex) and c_plus (decreasing, concave).
struct LambdaSet {
    GridFunction g;               // resolvent, <g,phi> = 0
    double T = 0;                 // largest feasible t
    std::vector<double> t_samples;
    std::vector<double> c_minus;  // sampled on t_samples
    std::vector<double> c_plus;
    double c_star_minus = 0;      // c_minus(0) <= 0
    double c_star_plus = 0;       // c_plus(0) >= 0
};

struct CRange {
    bool feasible = false;
    double lo = 0;
    double hi = 0;
};

GridFunction solve_resolvent_g(const Problem& problem);

// Feasible c interval at fixed t (pointwise linear constraints per node).
CRange c_range_at_t(const GridFunction& g, const Problem& problem, double t);

// Largest feasible t, by bisection on the feasibility indicator.
double compute_T(const GridFunction& g, const Problem& problem);

LambdaSet build_lambda_set(const Problem& problem, int samples = 2000, double t_lo = -10.0);

// tau0(c): 0 on [c*-, c*+], the inverse of c_minus left of it and of c_plus
// right of it; u_limit = tau0(c) phi + c g is the a->lambda1- limit profile.
struct TauLimit {
    double tau0 = 0;
    GridFunction u_limit;
};

TauLimit tau_and_limit(const LambdaSet& set, const Problem& problem, double c);

// Lower barrier tau_that(c) with cap t_hat < 0 (half-space bound for
// solutions just below lambda1).
double tau_profile(const LambdaSet& set, double t_hat, double c);

// The limit t-component of the stable branch as a decreases to lambda1
// (requires M > 0): inverse of c_minus / T / inverse of c_plus.
double t_c_profile(const LambdaSet& set, const Problem& problem, double c);

} // namespace hbif
