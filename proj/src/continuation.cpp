#include "hbif/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "hbif/linalg.hpp"
#include "hbif/spectrum.hpp"

namespace hbif {

double composite_distance(const Problem& problem, const Solution& p, const Solution& q) {
    GridFunction d = p.u;
    axpy(-1.0, q.u, d);
    const double du = norm_l2(problem.grid, d);
    return std::hypot(du, p.c - q.c);
}

namespace {

struct Tangent {
    GridFunction u;
    double c = 0;
};

// Tangent of the solution curve at (u, c): solves [J, -h; ref] tau = [0; 1],
// which keeps the orientation of the reference direction, then normalizes in
// the composite metric.
std::optional<Tangent> branch_tangent(const Problem& pr, double a, const GridFunction& u,
                                      const Tangent& ref) {
    const int n = pr.grid.n;
    const TridiagonalOperator J = jacobian(pr, a, u);
    std::vector<double> row(n), col(n);
    for (int i = 0; i < n; ++i) {
        row[i] = pr.grid.spacing * ref.u[i];
        col[i] = -pr.h.values[i];
    }
    const std::vector<double> zero(n, 0.0);
    BorderedResult r = bordered_solve(J, row, col, ref.c, zero, 1.0);
    if (!r.ok())
        return std::nullopt;
    Tangent t{std::move(r.main), r.aux};
    const double s = std::sqrt(inner_product(pr.grid, t.u, t.u) + t.c * t.c);
    if (!(s > 0) || !std::isfinite(s))
        return std::nullopt;
    for (double& v : t.u)
        v /= s;
    t.c /= s;
    return t;
}

struct CorrectorResult {
    bool ok = false;
    Solution solution;
    int iterations = 0;
};

CorrectorResult arclength_correct(const Problem& pr, double a, const Solution& base,
                                  const Tangent& tan, double ds, const StepConfig& cfg) {
    const int n = pr.grid.n;
    CorrectorResult out;
    GridFunction u = base.u;
    axpy(ds, tan.u, u);
    double c = base.c + ds * tan.c;

    std::vector<double> row(n), col(n);
    for (int i = 0; i < n; ++i) {
        row[i] = pr.grid.spacing * tan.u[i];
        col[i] = -pr.h.values[i];
    }

    auto constraint = [&](const GridFunction& uu, double cc) {
        GridFunction d = uu;
        axpy(-1.0, base.u, d);
        return inner_product(pr.grid, d, tan.u) + tan.c * (cc - base.c) - ds;
    };

    for (int it = 0; it < cfg.corrector_max_iterations; ++it) {
        GridFunction R = residual(pr, a, u, c);
        const double rn = norm_inf(R);
        const double N = constraint(u, c);
        if (rn <= cfg.newton.newton_tol && std::abs(N) <= 1e-12 * (1.0 + std::abs(ds))) {
            out.ok = true;
            out.iterations = it;
            out.solution = make_solution(pr, a, std::move(u), c, cfg.newton.tol_deg);
            return out;
        }
        for (double& v : R)
            v = -v;
        BorderedResult step = bordered_solve(jacobian(pr, a, u), row, col, tan.c, R, -N);
        if (!step.ok())
            return out;

        const double merit0 = rn + std::abs(N);
        double best_merit = std::numeric_limits<double>::infinity();
        GridFunction best_u;
        double best_c = 0;
        for (double alpha = 1.0; alpha >= cfg.newton.damping_min * 0.999; alpha *= 0.5) {
            GridFunction tu = u;
            axpy(alpha, step.main, tu);
            const double tc = c + alpha * step.aux;
            const double m = norm_inf(residual(pr, a, tu, tc)) + std::abs(constraint(tu, tc));
            if (std::isfinite(m) && m < best_merit) {
                best_merit = m;
                best_u = std::move(tu);
                best_c = tc;
            }
            if (m < merit0)
                break;
        }
        if (best_u.empty())
            return out;
        u = std::move(best_u);
        c = best_c;
    }
    return out;
}

// ---- extended (fold) system -----------------------------------------------

struct ExtState {
    GridFunction u;
    double c = 0;
    GridFunction w;
};

void orient_kernel(const Problem& pr, GridFunction& w) {
    const double wphi = inner_product(pr.grid, w, pr.phi);
    const double wpsi = inner_product(pr.grid, w, pr.psi);
    const double tol = 1e-10 * pr.phi_phi;
    bool flip = wphi < -tol || (std::abs(wphi) <= tol && wpsi < 0);
    if (flip)
        for (double& v : w)
            v = -v;
}

// Newton on {R(u,c) = 0, J(u) w = 0, <w,w> = <phi,phi>} with a dense
// partial-pivot solve of the (2n+1) system per step.
bool extended_newton(const Problem& pr, double a, ExtState& st, const SolverConfig& cfg) {
    const int n = pr.grid.n;
    const double sp = pr.grid.spacing;
    const int m = 2 * n + 1;

    auto merit = [&](const ExtState& s, double& rn, double& jn, double& nr) {
        GridFunction R = residual(pr, a, s.u, s.c);
        rn = norm_inf(R);
        GridFunction Jw = tridiagonal_apply(jacobian(pr, a, s.u), s.w);
        jn = norm_inf(Jw);
        nr = 0.5 * (inner_product(pr.grid, s.w, s.w) - pr.phi_phi);
        return rn + jn + std::abs(nr);
    };

    for (int it = 0; it < 50; ++it) {
        GridFunction R = residual(pr, a, st.u, st.c);
        const TridiagonalOperator J = jacobian(pr, a, st.u);
        GridFunction Jw = tridiagonal_apply(J, st.w);
        const double nr = 0.5 * (inner_product(pr.grid, st.w, st.w) - pr.phi_phi);
        const double rn = norm_inf(R);
        const double jn = norm_inf(Jw);
        if (rn <= cfg.newton_tol && jn <= 1e-8 && std::abs(nr) <= 1e-12)
            return true;

        // unknowns [u, c, w]; equations [R rows, norm row, Jw rows]
        DenseMatrix Mx(m);
        std::vector<double> rhs(m);
        for (int i = 0; i < n; ++i) {
            Mx(i, i) = J.diagonal[i];
            if (i > 0)
                Mx(i, i - 1) = J.off_diagonal[i - 1];
            if (i < n - 1)
                Mx(i, i + 1) = J.off_diagonal[i];
            Mx(i, n) = -pr.h.values[i];
            rhs[i] = -R[i];
        }
        for (int j = 0; j < n; ++j)
            Mx(n, n + 1 + j) = sp * st.w[j];
        rhs[n] = -nr;
        for (int i = 0; i < n; ++i) {
            const int r = n + 1 + i;
            Mx(r, i) = -f_eval(pr.f, st.u[i]).second * st.w[i];
            Mx(r, n + 1 + i) = J.diagonal[i];
            if (i > 0)
                Mx(r, n + i) = J.off_diagonal[i - 1];
            if (i < n - 1)
                Mx(r, n + 2 + i) = J.off_diagonal[i];
            rhs[r] = -Jw[i];
        }
        std::vector<double> delta;
        if (!dense_solve(std::move(Mx), std::move(rhs), delta))
            return false;

        const double merit0 = rn + jn + std::abs(nr);
        ExtState best;
        double best_merit = std::numeric_limits<double>::infinity();
        for (double alpha = 1.0; alpha >= 1.0 / 64.0 * 0.999; alpha *= 0.5) {
            ExtState trial = st;
            for (int i = 0; i < n; ++i) {
                trial.u[i] += alpha * delta[i];
                trial.w[i] += alpha * delta[n + 1 + i];
            }
            trial.c += alpha * delta[n];
            double trn, tjn, tnr;
            const double mval = merit(trial, trn, tjn, tnr);
            if (std::isfinite(mval) && mval < best_merit) {
                best_merit = mval;
                best = std::move(trial);
            }
            if (mval < merit0)
                break;
        }
        if (best.u.empty())
            return false;
        st = std::move(best);
    }
    double rn, jn, nr;
    merit(st, rn, jn, nr);
    return rn <= cfg.newton_tol && jn <= 1e-8 && std::abs(nr) <= 1e-12;
}

FoldPoint make_fold_point(const Problem& pr, double a, ExtState st, const SolverConfig& cfg) {
    orient_kernel(pr, st.w);
    FoldPoint fp;
    fp.kernel = st.w;
    fp.solution = make_solution(pr, a, std::move(st.u), st.c, cfg.tol_deg);
    GridFunction fww(pr.grid.n);
    for (int i = 0; i < pr.grid.n; ++i)
        fww[i] = f_eval(pr.f, fp.solution.u[i]).second * st.w[i] * st.w[i];
    const double fw3 = inner_product(pr.grid, fww, st.w);
    fp.h_w = inner_product(pr.grid, pr.h.values, st.w);
    fp.mu_prime = fw3 / inner_product(pr.grid, st.w, st.w);
    fp.c_second_derivative = fp.h_w != 0 ? -fw3 / fp.h_w : 0.0;
    fp.side = fp.solution.c >= 0 ? +1 : -1;
    return fp;
}

// Critical eigenvalue index between two Morse indices: the one crossing zero.
int crossing_index(const Solution& s1, const Solution& s2) {
    return std::min(s1.spectrum.morse_index, s2.spectrum.morse_index) + 1;
}

ExtState seed_from_bracket(const Problem& pr, double a, const Solution& s1, const Solution& s2) {
    const int k = crossing_index(s1, s2);
    auto critical = [&](const Solution& s) {
        TridiagonalOperator L = jacobian(pr, a, s.u);
        for (double& d : L.diagonal)
            d = -d;
        for (double& e : L.off_diagonal)
            e = -e;
        return eigenvalue_by_index(L, k);
    };
    const double e1 = critical(s1);
    const double e2 = critical(s2);
    double theta = e1 != e2 ? e1 / (e1 - e2) : 0.5;
    theta = std::clamp(theta, 0.05, 0.95);

    ExtState st;
    st.u.resize(pr.grid.n);
    for (int i = 0; i < pr.grid.n; ++i)
        st.u[i] = (1.0 - theta) * s1.u[i] + theta * s2.u[i];
    st.c = (1.0 - theta) * s1.c + theta * s2.c;
    TridiagonalOperator L = jacobian(pr, a, st.u);
    for (double& d : L.diagonal)
        d = -d;
    for (double& e : L.off_diagonal)
        e = -e;
    st.w = eigenpair_by_index(pr.grid, L, k).vector;
    orient_kernel(pr, st.w);
    return st;
}

ExtState refine_degenerate(const Problem& pr, double a, const Solution& s1, const Solution& s2,
                           const SolverConfig& cfg) {
    ExtState st = seed_from_bracket(pr, a, s1, s2);
    if (extended_newton(pr, a, st, cfg))
        return st;
    // retry from the plain midpoint with a refreshed kernel
    ExtState st2 = seed_from_bracket(pr, a, s1, s2);
    for (int i = 0; i < pr.grid.n; ++i)
        st2.u[i] = 0.5 * (s1.u[i] + s2.u[i]);
    st2.c = 0.5 * (s1.c + s2.c);
    if (extended_newton(pr, a, st2, cfg))
        return st2;
    throw std::runtime_error("extended Newton for a degenerate point did not converge");
}

// ---- tracer ----------------------------------------------------------------

struct Tracer {
    const Problem& pr;
    double a;
    StepConfig cfg;
    bool chart_enabled = false;
    const Solution* segment_target = nullptr; // far end of the analytic segment

    Branch br;
    Tangent tan;
    double ds = 0;
    double arclen = 0;
    double excursion = 0;
    int index_changes = 0;
    double cb_estimate = 0; // |c| scale of the near-kernel region
    bool chart_cooldown = false;

    Tracer(const Problem& p, double a_, StepConfig c) : pr(p), a(a_), cfg(std::move(c)) {}

    void append(Solution s, Parametrization mode) {
        if (!br.points.empty()) {
            arclen += composite_distance(pr, br.points.back(), s);
            excursion = std::max(excursion, composite_distance(pr, br.points.front(), s));
            if (s.spectrum.morse_index != br.points.back().spectrum.morse_index)
                ++index_changes;
        }
        br.points.push_back(std::move(s));
        br.parameter_log.push_back(mode);
    }

    bool window_exited(double c) const {
        return cfg.c_window && (c < cfg.c_window->first || c > cfg.c_window->second);
    }

    double second_eigenvalue(const Solution& s) const {
        TridiagonalOperator L = jacobian(pr, a, s.u);
        for (double& d : L.diagonal)
            d = -d;
        for (double& e : L.off_diagonal)
            e = -e;
        return eigenvalue_by_index(L, 2);
    }

    double chart_eps() const {
        return cfg.chart_margin_factor * std::max(pr.f.threshold, 0.1);
    }

    bool chart_activation() {
        if (br.points.size() < 2)
            return false;
        const Solution& cur = br.points.back();
        const double c_switch = cfg.c_switch_factor * cb_estimate;
        if (chart_cooldown) {
            if (std::abs(cur.c) > 2.0 * std::max(c_switch, 1e-12))
                chart_cooldown = false;
            return false;
        }
        const double mu2 = second_eigenvalue(cur);
        if (std::abs(mu2) >= cfg.kernel_proximity * (pr.lambda3 - pr.lambda2))
            return false;
        cb_estimate = std::max(cb_estimate, std::abs(cur.c));
        if (!(std::abs(cur.c) < cfg.c_switch_factor * cb_estimate))
            return false;
        const double eps = chart_eps();
        const double lo = -pr.f.threshold / pr.beta - 0.5 * eps;
        const double hi = pr.f.threshold + 0.5 * eps;
        return cur.t_psi > lo && cur.t_psi < hi;
    }

    void run_chart(int& steps) {
        const double eps = chart_eps();
        const double win_lo = -pr.f.threshold / pr.beta - eps;
        const double win_hi = pr.f.threshold + eps;
        const Solution* prev = &br.points[br.points.size() - 2];
        const Solution* cur = &br.points.back();
        double dir = cur->t_psi - prev->t_psi;
        if (dir == 0)
            return;
        dir = dir > 0 ? 1.0 : -1.0;
        double dt = ds;
        while (steps < cfg.max_steps) {
            ++steps;
            const double t_next = cur->t_psi + dir * dt;
            if (t_next <= win_lo || t_next >= win_hi)
                break;
            GridFunction guess = cur->u;
            axpy(t_next - cur->t_psi, pr.psi, guess);
            NewtonResult r = chart_solve(pr, a, t_next, guess, cur->c, cfg.newton);
            if (!r.ok() || composite_distance(pr, *cur, r.solution) > cfg.ds_max) {
                dt *= 0.5;
                if (dt < cfg.ds_min)
                    break;
                continue;
            }
            append(std::move(r.solution), Parametrization::chart);
            cur = &br.points.back();
            prev = &br.points[br.points.size() - 2];
            if (r.iterations <= cfg.grow_iterations)
                dt = std::min(dt * cfg.grow, cfg.ds_max);
        }
        chart_cooldown = true;
    }

    // Re-anchor the arclength tangent on the secant of the last two points.
    bool refresh_tangent_from_secant() {
        const Solution& cur = br.points.back();
        const Solution& prev = br.points[br.points.size() - 2];
        Tangent ref;
        ref.u = cur.u;
        axpy(-1.0, prev.u, ref.u);
        ref.c = cur.c - prev.c;
        auto t = branch_tangent(pr, a, cur.u, ref);
        if (!t)
            return false;
        tan = std::move(*t);
        return true;
    }

    void run(const Solution& start, Tangent initial_ref) {
        run_impl(start, std::move(initial_ref));
        br.final_ds = ds > 0 ? ds : cfg.ds0;
    }

    void run_impl(const Solution& start, Tangent initial_ref) {
        br.a = a;
        append(start, segment_target ? Parametrization::segment : Parametrization::arclength);
        auto t0 = branch_tangent(pr, a, start.u, initial_ref);
        if (!t0) {
            br.termination = TraceEnd::stalled;
            return;
        }
        tan = std::move(*t0);
        ds = cfg.ds0;

        int steps = 0;
        while (steps < cfg.max_steps) {
            ++steps;
            CorrectorResult cr = arclength_correct(pr, a, br.points.back(), tan, ds, cfg);
            if (!cr.ok ||
                composite_distance(pr, br.points.back(), cr.solution) > cfg.ds_max * 1.0001) {
                ds *= 0.5;
                if (ds < cfg.ds_min) {
                    br.termination = TraceEnd::stalled;
                    return;
                }
                continue;
            }
            const double d_start = composite_distance(pr, cr.solution, br.points.front());
            const bool far = excursion >= 2.5 * ds && arclen >= 6.0 * ds;
            const int iterations = cr.iterations;
            append(std::move(cr.solution), Parametrization::arclength);
            const Solution& nw = br.points.back();

            if (segment_target &&
                composite_distance(pr, nw, *segment_target) <= std::max(ds, cfg.ds0)) {
                br.termination = TraceEnd::reached_segment;
                br.closed = true;
                return;
            }
            if (!segment_target && far && d_start <= ds) {
                br.termination = TraceEnd::closed;
                br.closed = true;
                return;
            }
            if (window_exited(nw.c)) {
                br.termination = TraceEnd::window_exit;
                return;
            }
            if (arclen > cfg.arclength_budget) {
                br.termination = TraceEnd::arclength_budget;
                return;
            }
            if (index_changes >= cfg.fold_budget) {
                br.termination = TraceEnd::fold_budget;
                return;
            }

            if (!refresh_tangent_from_secant()) {
                br.termination = TraceEnd::stalled;
                return;
            }
            if (iterations <= cfg.grow_iterations)
                ds = std::min(ds * cfg.grow, cfg.ds_max);

            if (chart_enabled && chart_activation()) {
                run_chart(steps);
                if (!refresh_tangent_from_secant()) {
                    br.termination = TraceEnd::stalled;
                    return;
                }
            }
        }
        br.termination = TraceEnd::step_budget;
    }
};

// Detects Morse index changes between consecutive points (wrapping when the
// branch is closed), refines each to a degenerate point and inserts it.
void annotate_markers(const Problem& pr, Branch& br, const SolverConfig& cfg) {
    struct Event {
        int after;          // insert after this point index
        Solution refined;
        GridFunction kernel;
        bool fold0;
        FoldPoint fp;
    };
    std::vector<Event> events;
    const int m = static_cast<int>(br.points.size());
    const int pairs = br.closed ? m : m - 1;
    for (int i = 0; i < pairs; ++i) {
        const Solution& s1 = br.points[i];
        const Solution& s2 = br.points[(i + 1) % m];
        if (s1.spectrum.morse_index == s2.spectrum.morse_index)
            continue;
        ExtState st = refine_degenerate(pr, br.a, s1, s2, cfg);
        Event ev;
        ev.after = i;
        ev.fp = make_fold_point(pr, br.a, std::move(st), cfg);
        ev.refined = ev.fp.solution;
        ev.kernel = ev.fp.kernel;
        ev.fold0 = ev.refined.spectrum.morse_index == 0;
        events.push_back(std::move(ev));
    }
    for (const Event& ev : events) {
        if (ev.fold0)
            br.folds.push_back(ev.fp);
        else
            br.transitions.push_back(ev.refined);
    }
    // insert from the back to keep earlier positions valid
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
        const int pos = it->after + 1;
        br.points.insert(br.points.begin() + pos, it->refined);
        br.parameter_log.insert(br.parameter_log.begin() + pos,
                                br.parameter_log[it->after]);
        for (Marker& mk : br.markers)
            if (mk.point >= pos)
                ++mk.point;
        br.markers.push_back(
            {pos, it->fold0 ? MarkerKind::fold_index0 : MarkerKind::transition_index12});
    }
    std::sort(br.markers.begin(), br.markers.end(),
              [](const Marker& x, const Marker& y) { return x.point < y.point; });
}

} // namespace

Solution positive_branch_u_dagger(const Problem& problem, double a_target,
                                  const SolverConfig& config) {
    if (!(a_target > problem.lambda1))
        throw std::invalid_argument("positive branch: need a > lambda1");
    const double gap = problem.lambda2 - problem.lambda1;
    const double a0 = std::min(a_target, problem.lambda1 + 0.02 * gap);
    const double M = problem.f.threshold;

    NewtonResult r;
    for (double boost : {0.5, 0.2, 1.0}) {
        GridFunction guess(problem.grid.n);
        for (int i = 0; i < problem.grid.n; ++i)
            guess[i] = (M + boost) * problem.phi[i];
        r = newton_solve(problem, a0, 0.0, guess, config);
        if (r.ok() && r.solution.spectrum.morse_index == 0 && r.solution.t_phi > 0)
            break;
    }
    if (!r.ok() || r.solution.spectrum.morse_index != 0 || !(r.solution.t_phi > 0))
        throw std::runtime_error("positive branch: no stable start above lambda1");

    Solution cur = std::move(r.solution);
    double a = a0;
    double da = 0.1 * gap;
    while (a < a_target - 1e-13 * std::max(1.0, a_target)) {
        const double a_next = std::min(a + da, a_target);
        NewtonResult step = newton_solve(problem, a_next, 0.0, cur.u, config);
        bool good = step.ok() && step.solution.spectrum.morse_index == 0;
        if (good) {
            double umin = 0;
            for (double v : step.solution.u)
                umin = std::min(umin, v);
            good = umin > -1e-10;
        }
        if (good) {
            cur = std::move(step.solution);
            a = a_next;
            if (step.iterations <= 4)
                da = std::min(da * 1.5, 0.15 * gap);
        } else {
            da *= 0.5;
            if (da < 1e-6 * gap)
                throw std::runtime_error("positive branch: continuation in a stalled");
        }
    }
    return cur;
}

Branch continue_in_c(const Problem& problem, double a, const Solution& start, int direction,
                     const StepConfig& step) {
    if (start.residual_norm > step.newton.newton_tol * 10)
        throw std::invalid_argument("continue_in_c: start point is not an accepted solution");
    Tracer tr(problem, a, step);
    Tangent ref;
    ref.u.assign(problem.grid.n, 0.0);
    ref.c = direction >= 0 ? 1.0 : -1.0;
    tr.run(start, std::move(ref));
    if (tr.br.termination == TraceEnd::stalled)
        throw std::runtime_error("continue_in_c: step size underflow without convergence");
    tr.br.markers.push_back({0, MarkerKind::start});
    annotate_markers(problem, tr.br, step.newton);
    return std::move(tr.br);
}

FoldPoint locate_fold(const Problem& problem, double a, const Solution& bracket_lo,
                      const Solution& bracket_hi, const SolverConfig& config) {
    ExtState st = refine_degenerate(problem, a, bracket_lo, bracket_hi, config);
    return make_fold_point(problem, a, std::move(st), config);
}

FoldCurve track_folds_in_a(const Problem& problem, const FoldPoint& seed, double a_lo,
                           double a_hi, int samples, const SolverConfig& config) {
    if (!(a_lo < a_hi) || samples < 2)
        throw std::invalid_argument("track_folds_in_a: bad range");
    FoldCurve curve;
    curve.side = seed.side;

    std::function<bool(ExtState&, double, double, int)> advance =
        [&](ExtState& st, double a_from, double a_to, int depth) -> bool {
        ExtState trial = st;
        if (extended_newton(problem, a_to, trial, config)) {
            st = std::move(trial);
            return true;
        }
        if (depth >= 8)
            return false;
        const double mid = 0.5 * (a_from + a_to);
        return advance(st, a_from, mid, depth + 1) && advance(st, mid, a_to, depth + 1);
    };

    std::vector<double> grid(samples);
    for (int i = 0; i < samples; ++i)
        grid[i] = a_lo + (a_hi - a_lo) * i / (samples - 1.0);

    std::vector<std::pair<double, FoldPoint>> collected;
    auto sweep = [&](bool upward) {
        ExtState st{seed.solution.u, seed.solution.c, seed.kernel};
        double a_cur = seed.solution.a;
        for (int i = 0; i < samples; ++i) {
            const double a_k = upward ? grid[i] : grid[samples - 1 - i];
            if (upward ? a_k < seed.solution.a : a_k >= seed.solution.a)
                continue;
            if (!advance(st, a_cur, a_k, 0))
                throw std::runtime_error("track_folds_in_a: fold lost near a = " +
                                         std::to_string(a_cur));
            a_cur = a_k;
            collected.emplace_back(a_k, make_fold_point(problem, a_k, st, config));
        }
    };
    sweep(true);
    sweep(false);

    std::sort(collected.begin(), collected.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [a_k, fp] : collected)
        if (fp.side != curve.side)
            throw std::runtime_error("track_folds_in_a: fold curve crossed c = 0");
    curve.samples = std::move(collected);
    return curve;
}

NewtonResult chart_solve(const Problem& problem, double a, double t, const GridFunction& guess_u,
                         double guess_c, const SolverConfig& config) {
    const int n = problem.grid.n;
    NewtonResult result;
    GridFunction u = guess_u;
    double c = guess_c;
    std::vector<double> row(n), col(n);
    for (int i = 0; i < n; ++i) {
        row[i] = problem.grid.spacing * problem.psi[i];
        col[i] = -problem.h.values[i];
    }
    auto constraint = [&](const GridFunction& uu) {
        return inner_product(problem.grid, uu, problem.psi) - t * problem.psi_psi;
    };

    double rn = norm_inf(residual(problem, a, u, c));
    result.residual_history.push_back(rn);
    for (int it = 0; it < config.max_iterations; ++it) {
        GridFunction R = residual(problem, a, u, c);
        rn = norm_inf(R);
        const double N = constraint(u);
        if (rn <= config.newton_tol && std::abs(N) <= 1e-12 * (1.0 + std::abs(t))) {
            result.status = NewtonStatus::converged;
            result.solution = make_solution(problem, a, std::move(u), c, config.tol_deg);
            result.iterations = it;
            return result;
        }
        for (double& v : R)
            v = -v;
        BorderedResult step = bordered_solve(jacobian(problem, a, u), row, col, 0.0, R, -N);
        if (!step.ok()) {
            result.status = NewtonStatus::singular_jacobian;
            return result;
        }
        const double merit0 = rn + std::abs(N);
        GridFunction best_u;
        double best_c = 0;
        double best_merit = std::numeric_limits<double>::infinity();
        for (double alpha = 1.0; alpha >= config.damping_min * 0.999; alpha *= 0.5) {
            GridFunction tu = u;
            axpy(alpha, step.main, tu);
            const double tc = c + alpha * step.aux;
            const double mval = norm_inf(residual(problem, a, tu, tc)) + std::abs(constraint(tu));
            if (std::isfinite(mval) && mval < best_merit) {
                best_merit = mval;
                best_u = std::move(tu);
                best_c = tc;
            }
            if (mval < merit0)
                break;
        }
        if (best_u.empty())
            return result;
        u = std::move(best_u);
        c = best_c;
        result.residual_history.push_back(norm_inf(residual(problem, a, u, c)));
    }
    return result;
}

double chart_derivative_at_zero(const Problem& problem, double a, double dt,
                                const SolverConfig& config) {
    if (!(a > problem.lambda2) || !(dt > 0))
        throw std::invalid_argument("chart derivative: need a > lambda2 and dt > 0");
    double c_at[2];
    int k = 0;
    for (double s : {1.0, -1.0}) {
        GridFunction guess(problem.grid.n);
        for (int i = 0; i < problem.grid.n; ++i)
            guess[i] = s * dt * problem.psi[i];
        NewtonResult r = chart_solve(problem, a, s * dt, guess, 0.0, config);
        if (!r.ok())
            throw std::runtime_error("chart derivative: chart solve failed");
        c_at[k++] = r.solution.c;
    }
    return (c_at[0] - c_at[1]) / (2.0 * dt);
}

Branch trace_branch(const Problem& problem, double a, const StepConfig& step) {
    if (!(a > problem.lambda1))
        throw std::invalid_argument("trace_branch: need a > lambda1");
    if (!(a < problem.lambda3))
        throw std::invalid_argument("trace_branch: a beyond the supported window");

    const bool at_lambda2 = std::abs(a - problem.lambda2) <= 1e-12 * problem.lambda2;

    if (!at_lambda2) {
        Solution start = positive_branch_u_dagger(problem, a, step.newton);
        Tracer tr(problem, a, step);
        tr.chart_enabled = a > problem.lambda2;
        Tangent ref;
        ref.u.assign(problem.grid.n, 0.0);
        ref.c = 1.0;
        tr.run(start, std::move(ref));
        if (tr.br.termination == TraceEnd::stalled)
            throw std::runtime_error("trace_branch: continuation stalled");
        tr.br.markers.push_back({0, MarkerKind::start});
        annotate_markers(problem, tr.br, step.newton);
        return std::move(tr.br);
    }

    // a = lambda2 exactly: insert the analytic degenerate segment
    // { t psi : t in [-M/beta, M] } and restart continuation at its ends.
    const double M = problem.f.threshold;
    const double t_lo = -M / problem.beta;
    const double t_hi = M;
    std::vector<Solution> segment;
    const double unit = std::sqrt(problem.psi_psi);
    const int count =
        M > 0 ? std::max(2, static_cast<int>(std::ceil((t_hi - t_lo) * unit / (0.5 * step.ds_max))) + 1)
              : 1;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : t_lo + (t_hi - t_lo) * i / (count - 1.0);
        GridFunction u(problem.grid.n);
        for (int j = 0; j < problem.grid.n; ++j)
            u[j] = t * problem.psi[j];
        segment.push_back(make_solution(problem, a, std::move(u), 0.0, step.newton.tol_deg));
    }

    Tracer tr(problem, a, step);
    tr.segment_target = count > 1 ? &segment.front() : nullptr; // M = 0: plain closure
    Tangent ref;
    ref.u = problem.psi;
    ref.c = 0.0;
    tr.run(segment.back(), std::move(ref));
    if (tr.br.termination == TraceEnd::stalled)
        throw std::runtime_error("trace_branch: continuation stalled at lambda2");

    Branch br;
    br.a = a;
    br.points = segment;
    br.parameter_log.assign(segment.size(), Parametrization::segment);
    br.markers.push_back({0, MarkerKind::segment_endpoint});
    if (count > 1)
        br.markers.push_back({count - 1, MarkerKind::segment_endpoint});
    for (std::size_t i = 1; i < tr.br.points.size(); ++i) {
        br.points.push_back(std::move(tr.br.points[i]));
        br.parameter_log.push_back(tr.br.parameter_log[i]);
    }
    br.closed = tr.br.closed;
    br.termination = tr.br.termination;
    br.final_ds = tr.br.final_ds;
    annotate_markers(problem, br, step.newton);
    return br;
}

SolutionCount count_solutions_at(const Branch& branch, double c) {
    SolutionCount out;
    for (const FoldPoint& f : branch.folds)
        if (std::abs(f.solution.c - c) <= 1e-9)
            out.ambiguous_fold = true;

    const int m = static_cast<int>(branch.points.size());
    if (m < 2)
        return out;
    std::vector<int> signs;
    signs.reserve(m);
    for (const Solution& s : branch.points) {
        const double d = s.c - c;
        signs.push_back(d > 0 ? 1 : (d < 0 ? -1 : 0));
    }

    // walk runs of nonzero signs; zeros between equal signs are tangential
    int first_nonzero = -1;
    for (int i = 0; i < m; ++i)
        if (signs[i] != 0) {
            first_nonzero = i;
            break;
        }
    if (first_nonzero < 0)
        return out; // the whole branch lies on the line

    const int total = branch.closed ? m : m - first_nonzero;
    int prev = signs[first_nonzero];
    bool pending_zero = false;
    for (int k = 1; k <= (branch.closed ? total : total - 1); ++k) {
        const int idx = branch.closed ? (first_nonzero + k) % m : first_nonzero + k;
        const int s = signs[idx];
        if (s == 0) {
            pending_zero = true;
            continue;
        }
        if (s != prev) {
            ++out.count;
        } else if (pending_zero) {
            ++out.count; // touched the line and came back
            out.tangential = true;
        }
        pending_zero = false;
        prev = s;
    }
    return out;
}

bool has_upper_structure(const Branch& branch) {
    if (!branch.closed)
        return false;
    std::vector<MarkerKind> kinds;
    for (const Marker& mk : branch.markers)
        if (mk.kind == MarkerKind::fold_index0 || mk.kind == MarkerKind::transition_index12)
            kinds.push_back(mk.kind);
    if (branch.folds.size() != 2 || branch.transitions.size() != 2 || kinds.size() != 4)
        return false;
    if (branch.folds[0].side * branch.folds[1].side != -1)
        return false;
    // cyclic adjacency: the two transitions neighbor each other
    bool adjacent = false;
    for (int r = 0; r < 4; ++r)
        if (kinds[r] == MarkerKind::transition_index12 &&
            kinds[(r + 1) % 4] == MarkerKind::transition_index12)
            adjacent = true;
    if (!adjacent)
        return false;
    bool has_index2 = false;
    for (const Solution& s : branch.points) {
        if (s.spectrum.morse_index > 2)
            return false;
        if (s.spectrum.morse_index == 2)
            has_index2 = true;
    }
    return has_index2;
}

DeltaSearch find_delta_above_lambda2(const Problem& problem, const StepConfig& step) {
    DeltaSearch out;
    double delta = 0.05 * (problem.lambda3 - problem.lambda2);
    for (int k = 0; k < 12; ++k) {
        try {
            Branch br = trace_branch(problem, problem.lambda2 + delta, step);
            if (has_upper_structure(br)) {
                out.delta = delta;
                out.halvings = k;
                out.branch = std::move(br);
                return out;
            }
        } catch (const std::exception&) {
            // fall through to halving
        }
        delta *= 0.5;
    }
    throw std::runtime_error("no admissible delta above lambda2 found");
}

} // namespace hbif
