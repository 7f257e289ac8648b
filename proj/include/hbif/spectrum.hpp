#pragma once

#include <optional>

#include "hbif/grid.hpp"
#include "hbif/model.hpp"

namespace hbif {

struct Inertia {
    int negatives = 0;
    int zeros = 0;
    int positives = 0;
};

// Spectral classification of the linearized operator
// L = -Delta_h - a I + diag(f'(u)) at a solution.
//
// morse_index counts eigenvalues below -zero band; degenerate means some
// eigenvalue lies within the band around zero (at index-1 degenerate points,
// e.g. on the segment at lambda2, that eigenvalue is not the bottom one).
// smallest_eigenvalue is the algebraically smallest.
struct SpectrumReport {
    int morse_index = 0;
    double smallest_eigenvalue = 0;
    double eigenvalue_near_zero = 0; // only meaningful when degenerate
    bool degenerate = false;
    std::optional<GridFunction> kernel_vector; // present iff degenerate;
                                               // normalized <w,w> = <phi,phi>,
                                               // sign <w,phi> >= 0 (then <w,psi> >= 0)
};

// Eigenvalue counts of op below / within zero_band of / above the shift,
// by Sturm-sequence sign counting (robust at near-singular shifts).
Inertia inertia(const TridiagonalOperator& op, double shift, double zero_band = 0.0);

// Number of eigenvalues of op strictly below x.
int sturm_count_below(const TridiagonalOperator& op, double x);

// k-th smallest eigenvalue (1-based) by Sturm bisection.
double eigenvalue_by_index(const TridiagonalOperator& op, int k);

// Bottom eigenpair: Sturm bisection plus inverse iteration. The eigenvector
// is rescaled so that <v,v> = <phi,phi> on the problem grid, with its
// largest-magnitude entry positive.
Eigenpair smallest_eigenpair(const Grid& grid, const TridiagonalOperator& op);

// Eigenpair for the k-th smallest eigenvalue.
Eigenpair eigenpair_by_index(const Grid& grid, const TridiagonalOperator& op, int k);

// Classification of L = -(Delta_h + a - f'(u)) at (a, u). zero band is
// tol_deg * max(1, lambda1).
SpectrumReport linearization_spectrum(const Problem& problem, double a, const GridFunction& u,
                                      double tol_deg = 1e-8);

} // namespace hbif
