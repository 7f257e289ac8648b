#pragma once

#include <utility>
#include <vector>

#include "hbif/grid.hpp"

namespace hbif {

// f(u) = kappa * ((u - M)_+)^p with integer p >= 3, so f is C^2, convex,
// vanishes below the threshold M and grows superlinearly.
struct CompetitionTerm {
    double threshold = 1.0; // M >= 0
    double kappa = 1.0;     // > 0
    int power = 3;          // p >= 3
};

CompetitionTerm make_competition_term(double threshold, double kappa, int power);

struct FDerivatives {
    double value = 0;
    double first = 0;
    double second = 0;
};

FDerivatives f_eval(const CompetitionTerm& f, double u);

// Finite sum of sine modes k >= 2, sampled on the grid and then projected
// exactly orthogonal to the discrete first eigenfunction.
struct HarvestTerm {
    std::vector<std::pair<int, double>> modes; // (k, b_k)
    GridFunction values;
    double psi_component = 0; // <h,psi> (nonzero by hypothesis)
};

struct Problem {
    Grid grid;
    CompetitionTerm f;
    HarvestTerm h;
    GridFunction phi;      // first eigenfunction, max = 1
    GridFunction psi;      // second eigenfunction, max = 1
    double lambda1 = 0;    // discrete eigenvalues of -Delta_h
    double lambda2 = 0;
    double lambda3 = 0;
    double beta = 0;       // -min(psi) = 1 on admissible grids
    double phi_phi = 0;    // <phi,phi>
    double psi_psi = 0;    // <psi,psi>
};

HarvestTerm build_harvest(const Grid& grid, const std::vector<std::pair<int, double>>& modes);

Problem make_problem(Grid grid, CompetitionTerm f, HarvestTerm h);

// R = Delta_h u + a u - f(u) - c h, pointwise.
GridFunction residual(const Problem& problem, double a, const GridFunction& u, double c);

// Delta_h + a I - diag(f'(u)).
TridiagonalOperator jacobian(const Problem& problem, double a, const GridFunction& u);

double t_phi_component(const Problem& problem, const GridFunction& u);
double t_psi_component(const Problem& problem, const GridFunction& u);

// Defect of the identity (a - lambda1) t <phi,phi> = <f(u),phi> that every
// solution satisfies.
double phi_projection_defect(const Problem& problem, double a, const GridFunction& u);

struct HypothesisReport {
    bool f_smooth = false;        // (i) C^2 family
    bool f_sign = false;          // (ii) zero below M, positive above
    bool f_convex = false;        // (iii) f'' >= 0
    bool f_superlinear = false;   // (iv) f(u)/u unbounded
    bool h_bounded = false;       // (a)
    bool h_phi_orthogonal = false; // (b)
    bool h_psi_nonzero = false;   // (c)

    bool all() const {
        return f_smooth && f_sign && f_convex && f_superlinear && h_bounded &&
               h_phi_orthogonal && h_psi_nonzero;
    }
};

HypothesisReport check_hypotheses(const Problem& problem);

} // namespace hbif
