#pragma once

#include <string>
#include <vector>

#include "hbif/continuation.hpp"
#include "hbif/lambda1.hpp"

namespace hbif {

// One row of the branch CSV (the u profile itself is not serialized).
struct BranchRow {
    int index = 0;
    double a = 0;
    double c = 0;
    double t_phi = 0;
    double t_psi = 0;
    double u_max = 0;
    double u_min = 0;
    int morse_index = 0;
    int degenerate = 0;
    double residual_norm = 0;
    std::string marker = "-";
};

// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

// Header: index,a,c,t_phi,t_psi,u_max,u_min,morse_index,degenerate,residual_norm,marker
void write_branch_csv(const Branch& branch, const std::string& path);

std::vector<BranchRow> branch_rows(const Branch& branch);
std::vector<BranchRow> read_branch_csv(const std::string& path);

void write_lambda_csv(const LambdaSet& set, const std::string& path);

void write_fold_curves_csv(const std::vector<FoldCurve>& curves, const std::string& path);

} // namespace hbif
