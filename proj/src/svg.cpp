#include "hbif/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hbif {

namespace {

constexpr double kWidth = 800, kHeight = 600;
constexpr double kMarginL = 70, kMarginR = 25, kMarginT = 25, kMarginB = 55;

// fixed Morse-index colors: 0 stable, 1, 2
const char* kColors[] = {"#1b9e77", "#d95f02", "#7570b3", "#666666"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;

    double px(double x) const {
        return kMarginL + (x - x_lo) / (x_hi - x_lo) * (kWidth - kMarginL - kMarginR);
    }
    double py(double y) const {
        return kHeight - kMarginB - (y - y_lo) / (y_hi - y_lo) * (kHeight - kMarginT - kMarginB);
    }
};

std::vector<double> ticks(double lo, double hi, int n = 5) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i)
        t[i] = lo + (hi - lo) * i / (n - 1.0);
    return t;
}

} // namespace

void render_plot_svg(const std::string& path, const std::vector<PlotSeries>& series,
                     const std::vector<PlotMark>& marks, const std::string& x_label,
                     const std::string& y_label) {
    bool any = false;
    for (const PlotSeries& s : series)
        if (!s.points.empty())
            any = true;
    if (!any)
        throw std::invalid_argument("render_plot_svg: nothing to plot");

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const PlotSeries& s : series)
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    const double xpad = std::max(1e-12, 0.05 * (x_hi - x_lo));
    const double ypad = std::max(1e-12, 0.05 * (y_hi - y_lo));
    Frame fr{x_lo - xpad, x_hi + xpad, y_lo - ypad, y_hi + ypad};

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    // axes box and ticks
    out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
        << kWidth - kMarginL - kMarginR << "\" height=\"" << kHeight - kMarginT - kMarginB
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(fr.x_lo, fr.x_hi)) {
        const double x = fr.px(t);
        out << "<line x1=\"" << num(x) << "\" y1=\"" << kHeight - kMarginB << "\" x2=\"" << num(x)
            << "\" y2=\"" << kHeight - kMarginB + 6 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(x) << "\" y=\"" << kHeight - kMarginB + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t : ticks(fr.y_lo, fr.y_hi)) {
        const double y = fr.py(t);
        out << "<line x1=\"" << kMarginL - 6 << "\" y1=\"" << num(y) << "\" x2=\"" << kMarginL
            << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kMarginL - 9 << "\" y=\"" << num(y + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    out << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\"" << kHeight - 12
        << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << (kMarginT + kHeight - kMarginB) / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (kMarginT + kHeight - kMarginB) / 2 << ")\">" << y_label << "</text>\n";

    for (const PlotSeries& s : series) {
        if (s.points.size() < 2) {
            if (s.points.size() == 1)
                out << "<circle cx=\"" << num(fr.px(s.points[0].first)) << "\" cy=\""
                    << num(fr.py(s.points[0].second)) << "\" r=\"2.5\" fill=\""
                    << kColors[s.color_class % 4] << "\"/>\n";
            continue;
        }
        out << "<polyline fill=\"none\" stroke=\"" << kColors[s.color_class % 4]
            << "\" stroke-width=\"2\"";
        if (s.dashed)
            out << " stroke-dasharray=\"6 4\"";
        out << " points=\"";
        for (const auto& [x, y] : s.points)
            out << num(fr.px(x)) << ',' << num(fr.py(y)) << ' ';
        out << "\"/>\n";
    }

    for (const PlotMark& m : marks) {
        const char* fill = m.kind == 0 ? "black" : (m.kind == 1 ? "#e7298a" : "#1f78b4");
        out << "<circle cx=\"" << num(fr.px(m.x)) << "\" cy=\"" << num(fr.py(m.y)) << "\" r=\""
            << (m.kind == 0 ? 5 : 4) << "\" fill=\"" << fill << "\"/>\n";
    }
    out << "</svg>\n";
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

namespace {

template <typename Row>
std::pair<double, double> row_xy(const Row& r, BranchAxes axes);

template <>
std::pair<double, double> row_xy(const BranchRow& r, BranchAxes axes) {
    return {r.c, axes == BranchAxes::c_vs_tpsi ? r.t_psi : r.t_phi};
}

} // namespace

void series_from_rows(const std::vector<BranchRow>& rows, BranchAxes axes,
                      std::vector<PlotSeries>& series, std::vector<PlotMark>& marks) {
    PlotSeries cur;
    bool open = false;
    auto flush = [&]() {
        if (open && cur.points.size() >= 1)
            series.push_back(cur);
        cur = PlotSeries{};
        open = false;
    };
    bool in_segment = false;
    for (const BranchRow& r : rows) {
        const auto [x, y] = row_xy(r, axes);
        const bool seg_point = r.marker == "Lstart" || r.marker == "Lend" ||
                               (in_segment && r.marker == "-" && r.degenerate == 1);
        if (r.marker == "Lstart")
            in_segment = true;
        // split series on Morse index or segment changes; duplicate the
        // joint point so arcs stay visually connected
        if (open && (cur.color_class != r.morse_index || cur.dashed != (in_segment || seg_point))) {
            cur.points.emplace_back(x, y);
            flush();
        }
        if (!open) {
            cur.color_class = r.morse_index;
            cur.dashed = in_segment || seg_point;
            open = true;
        }
        cur.points.emplace_back(x, y);
        if (r.marker == "Lend")
            in_segment = false;
        if (r.marker == "fold0")
            marks.push_back({x, y, 0});
        else if (r.marker == "trans12")
            marks.push_back({x, y, 1});
        else if (r.marker == "Lstart" || r.marker == "Lend")
            marks.push_back({x, y, 2});
    }
    flush();
}

void series_from_branch(const Branch& branch, BranchAxes axes, std::vector<PlotSeries>& series,
                        std::vector<PlotMark>& marks) {
    series_from_rows(branch_rows(branch), axes, series, marks);
    // close the loop visually
    if (branch.closed && !branch.points.empty() && !series.empty()) {
        const Solution& f = branch.points.front();
        const double y = axes == BranchAxes::c_vs_tpsi ? f.t_psi : f.t_phi;
        series.back().points.emplace_back(f.c, y);
    }
}

void render_branches_svg(const std::vector<Branch>& branches, BranchAxes axes,
                         const std::string& path) {
    std::vector<PlotSeries> series;
    std::vector<PlotMark> marks;
    for (const Branch& b : branches)
        series_from_branch(b, axes, series, marks);
    render_plot_svg(path, series, marks, "c",
                    axes == BranchAxes::c_vs_tpsi ? "t_psi" : "t_phi");
}

void render_lambda_svg(const LambdaSet& set, const std::string& path) {
    std::vector<PlotSeries> series(2);
    series[0].color_class = 0;
    series[1].color_class = 1;
    for (std::size_t i = 0; i < set.t_samples.size(); ++i) {
        series[0].points.emplace_back(set.t_samples[i], set.c_minus[i]);
        series[1].points.emplace_back(set.t_samples[i], set.c_plus[i]);
    }
    std::vector<PlotMark> marks;
    marks.push_back({set.T, set.c_minus.back(), 2});
    marks.push_back({0.0, set.c_star_minus, 0});
    marks.push_back({0.0, set.c_star_plus, 0});
    render_plot_svg(path, series, marks, "t", "c");
}

void render_fold_curves_svg(const std::vector<FoldCurve>& curves, const std::string& path) {
    std::vector<PlotSeries> series;
    std::vector<PlotMark> marks;
    for (const FoldCurve& curve : curves) {
        PlotSeries s;
        s.color_class = curve.side > 0 ? 0 : 1;
        for (const auto& [a, fp] : curve.samples)
            s.points.emplace_back(a, fp.solution.c);
        series.push_back(std::move(s));
    }
    render_plot_svg(path, series, marks, "a", "c_fold");
}

} // namespace hbif
