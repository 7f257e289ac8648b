#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>

#include "hbif/config.hpp"
#include "hbif/csv.hpp"
#include "hbif/svg.hpp"
#include "hbif/verify.hpp"

namespace fs = std::filesystem;
using namespace hbif;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    int n_override = 0;
    unsigned seed_override = 0;
    bool seed_set = false;
};

Config resolve_config(const GlobalOpts& g) {
    Config cfg = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (g.n_override > 0)
        cfg.grid_n = g.n_override;
    if (g.seed_set)
        cfg.seed = g.seed_override;
    return cfg;
}

fs::path ensure_out(const GlobalOpts& g) {
    fs::path dir(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory: " + g.out_dir);
    return dir;
}

double resolve_a(const Problem& pr, double a, double a_rel, bool has_a, bool has_rel) {
    if (has_a == has_rel)
        throw std::invalid_argument("give exactly one of --a or --a-rel");
    return has_a ? a : pr.lambda1 + a_rel * (pr.lambda2 - pr.lambda1);
}

int cmd_eig(const Config& cfg) {
    const Problem pr = problem_from_config(cfg);
    std::printf("n = %d, spacing = %s\n", pr.grid.n, format_double(pr.grid.spacing).c_str());
    for (int k = 1; k <= 4 && k <= pr.grid.n; ++k) {
        const Eigenpair ep = discrete_eigenpair(pr.grid, k);
        std::printf("lambda_%d = %s  (continuum %g)\n", k, format_double(ep.value).c_str(),
                    k * k * M_PI * M_PI);
    }
    std::printf("beta = %s\n", format_double(pr.beta).c_str());
    return 0;
}

int cmd_lambda1(const Config& cfg, const GlobalOpts& g) {
    const Problem pr = problem_from_config(cfg);
    const fs::path dir = ensure_out(g);
    const LambdaSet set = build_lambda_set(pr);
    write_lambda_csv(set, (dir / "lambda_set.csv").string());
    render_lambda_svg(set, (dir / "lambda_set.svg").string());
    std::printf("T = %s\n", format_double(set.T).c_str());
    std::printf("c*- = %s, c*+ = %s\n", format_double(set.c_star_minus).c_str(),
                format_double(set.c_star_plus).c_str());
    std::printf("wrote %s and %s\n", (dir / "lambda_set.csv").c_str(),
                (dir / "lambda_set.svg").c_str());
    return 0;
}

int cmd_solve(const Config& cfg, const GlobalOpts& g, double a, double a_rel, bool has_a,
              bool has_rel, double c) {
    const Problem pr = problem_from_config(cfg);
    const double a_val = resolve_a(pr, a, a_rel, has_a, has_rel);
    const double a_max = pr.lambda2 + 0.5 * (pr.lambda3 - pr.lambda2);
    if (!(a_val < a_max))
        throw std::invalid_argument("solve: a beyond the supported window (a < " +
                                    format_double(a_max) + ")");
    const SolverConfig sc = solver_config(cfg);

    std::vector<GridFunction> guesses;
    if (a_val < pr.lambda1) {
        const GridFunction gres = solve_resolvent_g(pr);
        GridFunction cg(pr.grid.n);
        for (int i = 0; i < pr.grid.n; ++i)
            cg[i] = c * gres[i];
        guesses.push_back(std::move(cg));
    } else {
        GridFunction mphi(pr.grid.n);
        for (int i = 0; i < pr.grid.n; ++i)
            mphi[i] = (pr.f.threshold + 0.5) * pr.phi[i];
        guesses.push_back(std::move(mphi));
    }
    guesses.emplace_back(pr.grid.n, 0.0);

    for (const GridFunction& g0 : guesses) {
        NewtonResult r = newton_solve(pr, a_val, c, g0, sc);
        if (!r.ok())
            continue;
        const Solution& s = r.solution;
        std::printf("converged in %d iterations\n", r.iterations);
        std::printf("a = %s, c = %s\n", format_double(s.a).c_str(), format_double(s.c).c_str());
        std::printf("residual = %s, t_phi = %s, t_psi = %s\n",
                    format_double(s.residual_norm).c_str(), format_double(s.t_phi).c_str(),
                    format_double(s.t_psi).c_str());
        std::printf("morse index = %d, degenerate = %d\n", s.spectrum.morse_index,
                    s.spectrum.degenerate ? 1 : 0);
        const fs::path dir = ensure_out(g);
        std::ofstream out(dir / "solution.csv");
        out << "x,u\n";
        for (int i = 0; i < pr.grid.n; ++i)
            out << format_double(pr.grid.nodes[i]) << ',' << format_double(s.u[i]) << '\n';
        std::printf("wrote %s\n", (dir / "solution.csv").c_str());
        return 0;
    }
    std::fprintf(stderr, "no convergence from the built-in guesses\n");
    return 1;
}

int cmd_branch(const Config& cfg, const GlobalOpts& g, double a, double a_rel, bool has_a,
               bool has_rel, const std::string& axes_name) {
    const Problem pr = problem_from_config(cfg);
    const double a_val = resolve_a(pr, a, a_rel, has_a, has_rel);
    const Branch br = trace_branch(pr, a_val, step_config(cfg));
    const fs::path dir = ensure_out(g);
    write_branch_csv(br, (dir / "branch.csv").string());
    BranchAxes axes;
    if (axes_name == "c_vs_tpsi")
        axes = BranchAxes::c_vs_tpsi;
    else if (axes_name == "c_vs_tphi")
        axes = BranchAxes::c_vs_tphi;
    else if (axes_name == "auto")
        axes = a_val > pr.lambda1 + 0.75 * (pr.lambda2 - pr.lambda1) ? BranchAxes::c_vs_tpsi
                                                                     : BranchAxes::c_vs_tphi;
    else
        throw std::invalid_argument("unknown axes: " + axes_name);
    render_branches_svg({br}, axes, (dir / "diagram.svg").string());
    std::printf("a = %s: %zu points, %zu folds, closed = %d\n", format_double(a_val).c_str(),
                br.points.size(), br.folds.size(), br.closed ? 1 : 0);
    for (const FoldPoint& f : br.folds)
        std::printf("fold: c* = %s, c'' = %s\n", format_double(f.solution.c).c_str(),
                    format_double(f.c_second_derivative).c_str());
    std::printf("wrote %s and %s\n", (dir / "branch.csv").c_str(), (dir / "diagram.svg").c_str());
    return 0;
}

int cmd_fold_track(const Config& cfg, const GlobalOpts& g, double a_min_rel, double a_max_rel,
                   int samples) {
    const Problem pr = problem_from_config(cfg);
    const double gap = pr.lambda2 - pr.lambda1;
    const double a_seed = pr.lambda1 + 0.5 * gap;
    const Branch br = trace_branch(pr, a_seed, step_config(cfg));
    if (br.folds.size() != 2)
        throw std::runtime_error("fold-track: seed branch did not produce two folds");
    const double a_lo = pr.lambda1 + a_min_rel * gap;
    const double a_hi = pr.lambda1 + a_max_rel * gap;
    std::vector<FoldCurve> curves;
    for (const FoldPoint& seed : br.folds)
        curves.push_back(track_folds_in_a(pr, seed, a_lo, a_hi, samples, solver_config(cfg)));
    const fs::path dir = ensure_out(g);
    write_fold_curves_csv(curves, (dir / "folds.csv").string());
    render_fold_curves_svg(curves, (dir / "folds.svg").string());
    std::printf("tracked %zu curves over a in [%s, %s]\n", curves.size(),
                format_double(a_lo).c_str(), format_double(a_hi).c_str());
    std::printf("wrote %s and %s\n", (dir / "folds.csv").c_str(), (dir / "folds.svg").c_str());
    return 0;
}

int cmd_sweep(const Config& cfg, const GlobalOpts& g, double rel_min, double rel_max, int count,
              int workers) {
    const Problem pr = problem_from_config(cfg);
    const fs::path dir = ensure_out(g);
    std::vector<double> a_values(count);
    for (int i = 0; i < count; ++i)
        a_values[i] = pr.lambda1 +
                      (rel_min + (rel_max - rel_min) * (count == 1 ? 0.0 : i / (count - 1.0))) *
                          (pr.lambda2 - pr.lambda1);

    struct Row {
        double a = 0;
        bool ok = false;
        std::string error;
        std::size_t points = 0, folds = 0;
        bool closed = false;
        double c_lo = 0, c_hi = 0;
    };
    std::vector<Row> rows(count);
    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count)
                return;
            Row& row = rows[i];
            row.a = a_values[i];
            try {
                const Branch br = trace_branch(pr, a_values[i], step_config(cfg));
                write_branch_csv(br, (dir / ("branch_" + std::to_string(i) + ".csv")).string());
                row.ok = true;
                row.points = br.points.size();
                row.folds = br.folds.size();
                row.closed = br.closed;
                double lo = 1e300, hi = -1e300;
                for (const Solution& s : br.points) {
                    lo = std::min(lo, s.c);
                    hi = std::max(hi, s.c);
                }
                row.c_lo = lo;
                row.c_hi = hi;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    const int nw = std::max(1, std::min<int>(workers, count));
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w)
        pool.emplace_back(work);
    for (std::thread& t : pool)
        t.join();

    std::ofstream out(dir / "summary.csv");
    out << "index,a,ok,points,folds,closed,c_min,c_max,error\n";
    bool all_ok = true;
    for (int i = 0; i < count; ++i) {
        const Row& r = rows[i];
        all_ok = all_ok && r.ok;
        out << i << ',' << format_double(r.a) << ',' << (r.ok ? 1 : 0) << ',' << r.points << ','
            << r.folds << ',' << (r.closed ? 1 : 0) << ',' << format_double(r.c_lo) << ','
            << format_double(r.c_hi) << ',' << r.error << '\n';
    }
    std::printf("swept %d branches with %d workers; wrote %s\n", count, nw,
                (dir / "summary.csv").c_str());
    return all_ok ? 0 : 1;
}

int cmd_verify(const Config& cfg, const GlobalOpts& g, const std::string& level) {
    Config used = cfg;
    if (!level.empty())
        used.verify_level = level;
    const Problem pr = problem_from_config(used);
    SuiteConfig suite;
    suite.level = used.verify_level;
    suite.seed = used.seed;
    suite.solver = solver_config(used);
    suite.step = step_config(used);
    suite.config_digest = config_digest(used);
    const VerificationReport rep = run_suite(pr, suite);
    const std::string text = format_report(rep);
    std::fputs(text.c_str(), stdout);
    const fs::path dir = ensure_out(g);
    std::ofstream out(dir / "report.txt");
    out << text;
    std::printf("wrote %s\n", (dir / "report.txt").c_str());
    return rep.all_passed() ? 0 : 1;
}

int cmd_plot(const GlobalOpts& g, const std::string& input, const std::string& axes_name) {
    const std::vector<BranchRow> rows = read_branch_csv(input);
    BranchAxes axes;
    if (axes_name == "c_vs_tpsi" || axes_name == "auto")
        axes = BranchAxes::c_vs_tpsi;
    else if (axes_name == "c_vs_tphi")
        axes = BranchAxes::c_vs_tphi;
    else
        throw std::invalid_argument("unknown axes: " + axes_name);
    std::vector<PlotSeries> series;
    std::vector<PlotMark> marks;
    series_from_rows(rows, axes, series, marks);
    const fs::path dir = ensure_out(g);
    render_plot_svg((dir / "diagram.svg").string(), series, marks, "c",
                    axes == BranchAxes::c_vs_tpsi ? "t_psi" : "t_phi");
    std::printf("wrote %s\n", (dir / "diagram.svg").c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bifurcation curves of the diffusive logistic equation with harvesting"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON configuration file");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--n", g.n_override, "override grid size (n+1 divisible by 4)");
    auto* seed_opt = app.add_option("--seed", g.seed_override, "seed for sampled checks");

    auto* eig = app.add_subcommand("eig", "print discrete eigenvalues");

    auto* lam = app.add_subcommand("lambda1-geometry", "emit the solution-set geometry at lambda1");

    double a = 0, a_rel = 0, c = 0;
    auto* solve = app.add_subcommand("solve", "one Newton solve at fixed (a, c)");
    auto* solve_a = solve->add_option("--a", a, "linear growth a");
    auto* solve_ar = solve->add_option("--a-rel", a_rel, "a = lambda1 + rel * (lambda2 - lambda1)");
    solve->add_option("--c", c, "harvesting amplitude c");

    std::string axes = "auto";
    auto* branch = app.add_subcommand("branch", "trace one bifurcation branch");
    auto* branch_a = branch->add_option("--a", a, "linear growth a");
    auto* branch_ar = branch->add_option("--a-rel", a_rel, "relative a");
    branch->add_option("--axes", axes, "c_vs_tpsi | c_vs_tphi | auto");

    double a_min_rel = 0.02, a_max_rel = 1.0;
    int samples = 25;
    auto* ft = app.add_subcommand("fold-track", "track the two fold curves in a");
    ft->add_option("--a-min-rel", a_min_rel, "lower end, relative to the eigenvalue gap");
    ft->add_option("--a-max-rel", a_max_rel, "upper end, relative");
    ft->add_option("--samples", samples, "number of a samples");

    double rel_min = 0.1, rel_max = 0.9;
    int count = 5, workers = static_cast<int>(std::thread::hardware_concurrency());
    auto* sweep = app.add_subcommand("sweep", "trace branches for several a concurrently");
    sweep->add_option("--a-rel-min", rel_min, "first relative a");
    sweep->add_option("--a-rel-max", rel_max, "last relative a");
    sweep->add_option("--count", count, "number of branches");
    sweep->add_option("--workers", workers, "worker threads");

    std::string level;
    auto* verify = app.add_subcommand("verify", "run the verification suite");
    verify->add_option("--level", level, "smoke | full");

    std::string plot_in;
    auto* plot = app.add_subcommand("plot", "render an SVG from an emitted branch CSV");
    plot->add_option("--in", plot_in, "branch CSV path")->required();
    plot->add_option("--axes", axes, "c_vs_tpsi | c_vs_tphi");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    g.seed_set = seed_opt->count() > 0;
    try {
        const Config cfg = resolve_config(g);
        if (eig->parsed())
            return cmd_eig(cfg);
        if (lam->parsed())
            return cmd_lambda1(cfg, g);
        if (solve->parsed())
            return cmd_solve(cfg, g, a, a_rel, solve_a->count() > 0, solve_ar->count() > 0, c);
        if (branch->parsed())
            return cmd_branch(cfg, g, a, a_rel, branch_a->count() > 0, branch_ar->count() > 0,
                              axes);
        if (ft->parsed())
            return cmd_fold_track(cfg, g, a_min_rel, a_max_rel, samples);
        if (sweep->parsed())
            return cmd_sweep(cfg, g, rel_min, rel_max, count, workers);
        if (verify->parsed())
            return cmd_verify(cfg, g, level);
        if (plot->parsed())
            return cmd_plot(g, plot_in, axes);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
