#include "hbif/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hbif {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string marker_name(const Branch& branch, int point) {
    // the first segment endpoint in traversal order is Lstart, the second Lend
    int seg_seen = 0;
    for (const Marker& mk : branch.markers) {
        const bool is_seg = mk.kind == MarkerKind::segment_endpoint;
        if (is_seg)
            ++seg_seen;
        if (mk.point != point)
            continue;
        switch (mk.kind) {
        case MarkerKind::start:
            return "start";
        case MarkerKind::fold_index0:
            return "fold0";
        case MarkerKind::transition_index12:
            return "trans12";
        case MarkerKind::segment_endpoint:
            return seg_seen == 1 ? "Lstart" : "Lend";
        }
    }
    return "-";
}

} // namespace

std::vector<BranchRow> branch_rows(const Branch& branch) {
    std::vector<BranchRow> rows;
    rows.reserve(branch.points.size());
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        const Solution& s = branch.points[i];
        BranchRow r;
        r.index = static_cast<int>(i);
        r.a = s.a;
        r.c = s.c;
        r.t_phi = s.t_phi;
        r.t_psi = s.t_psi;
        r.u_max = *std::max_element(s.u.begin(), s.u.end());
        r.u_min = *std::min_element(s.u.begin(), s.u.end());
        r.morse_index = s.spectrum.morse_index;
        r.degenerate = s.spectrum.degenerate ? 1 : 0;
        r.residual_norm = s.residual_norm;
        r.marker = marker_name(branch, static_cast<int>(i));
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_branch_csv(const Branch& branch, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "index,a,c,t_phi,t_psi,u_max,u_min,morse_index,degenerate,residual_norm,marker\n";
    for (const BranchRow& r : branch_rows(branch)) {
        out << r.index << ',' << format_double(r.a) << ',' << format_double(r.c) << ','
            << format_double(r.t_phi) << ',' << format_double(r.t_psi) << ','
            << format_double(r.u_max) << ',' << format_double(r.u_min) << ',' << r.morse_index
            << ',' << r.degenerate << ',' << format_double(r.residual_norm) << ',' << r.marker
            << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

std::vector<BranchRow> read_branch_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty csv: " + path);
    const std::string expected =
        "index,a,c,t_phi,t_psi,u_max,u_min,morse_index,degenerate,residual_norm,marker";
    if (line != expected)
        throw std::runtime_error("unexpected csv header in " + path);
    std::vector<BranchRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string field;
        BranchRow r;
        auto next = [&]() {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("short csv row in " + path);
            return field;
        };
        r.index = std::stoi(next());
        r.a = std::stod(next());
        r.c = std::stod(next());
        r.t_phi = std::stod(next());
        r.t_psi = std::stod(next());
        r.u_max = std::stod(next());
        r.u_min = std::stod(next());
        r.morse_index = std::stoi(next());
        r.degenerate = std::stoi(next());
        r.residual_norm = std::stod(next());
        r.marker = next();
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_lambda_csv(const LambdaSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "t,c_minus,c_plus\n";
    for (std::size_t i = 0; i < set.t_samples.size(); ++i)
        out << format_double(set.t_samples[i]) << ',' << format_double(set.c_minus[i]) << ','
            << format_double(set.c_plus[i]) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

void write_fold_curves_csv(const std::vector<FoldCurve>& curves, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "a,c,t_phi,u_max,side\n";
    for (const FoldCurve& curve : curves)
        for (const auto& [a, fp] : curve.samples)
            out << format_double(a) << ',' << format_double(fp.solution.c) << ','
                << format_double(fp.solution.t_phi) << ','
                << format_double(*std::max_element(fp.solution.u.begin(), fp.solution.u.end()))
                << ',' << curve.side << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

} // namespace hbif
