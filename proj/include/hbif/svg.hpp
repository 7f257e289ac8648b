#pragma once

#include <string>
#include <vector>

#include "hbif/continuation.hpp"
#include "hbif/csv.hpp"
#include "hbif/lambda1.hpp"

namespace hbif {

enum class BranchAxes { c_vs_tpsi, c_vs_tphi };

// A polyline in data coordinates. color_class selects one of the fixed
// Morse-index colors; dashed marks the analytic segment.
struct PlotSeries {
    std::vector<std::pair<double, double>> points;
    int color_class = 0;
    bool dashed = false;
};

struct PlotMark {
    double x = 0;
    double y = 0;
    int kind = 0; // 0: fold circle, 1: transition circle, 2: segment endpoint
};

// Standalone deterministic SVG with axes and tick labels.
void render_plot_svg(const std::string& path, const std::vector<PlotSeries>& series,
                     const std::vector<PlotMark>& marks, const std::string& x_label,
                     const std::string& y_label);

void series_from_branch(const Branch& branch, BranchAxes axes, std::vector<PlotSeries>& series,
                        std::vector<PlotMark>& marks);

// Reconstructs the plot from serialized rows (used by the plot command).
void series_from_rows(const std::vector<BranchRow>& rows, BranchAxes axes,
                      std::vector<PlotSeries>& series, std::vector<PlotMark>& marks);

void render_branches_svg(const std::vector<Branch>& branches, BranchAxes axes,
                         const std::string& path);

// Boundary curves of the set Lambda in the (t, c) plane.
void render_lambda_svg(const LambdaSet& set, const std::string& path);

// Fold curves a -> c*(a).
void render_fold_curves_svg(const std::vector<FoldCurve>& curves, const std::string& path);

} // namespace hbif
