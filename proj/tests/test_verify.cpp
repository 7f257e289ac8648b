#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hbif/verify.hpp"

using namespace hbif;

namespace {

Problem make_problem_m(double M, std::vector<std::pair<int, double>> modes = {{2, -1.0}},
                       int n = 99) {
    Grid g = make_grid(n);
    HarvestTerm h = build_harvest(g, modes);
    return make_problem(std::move(g), make_competition_term(M, 1.0, 3), std::move(h));
}

const CheckResult* find_check(const VerificationReport& rep, const std::string& id) {
    for (const CheckResult& c : rep.checks)
        if (c.id == id)
            return &c;
    return nullptr;
}

} // namespace

TEST_CASE("nodal domain counting") {
    const Grid g = make_grid(99);
    const GridFunction phi = discrete_eigenpair(g, 1).vector;
    const GridFunction psi = discrete_eigenpair(g, 2).vector;
    CHECK(count_nodal_domains(phi, 1e-8) == 1);
    CHECK(count_nodal_domains(psi, 1e-8) == 2);
    CHECK(count_nodal_domains(GridFunction(g.n, 0.0), 1e-8) == 0);
    CHECK(count_nodal_domains(discrete_eigenpair(g, 3).vector, 1e-8) == 3);

    // runs separated by a near-zero plateau
    GridFunction v(g.n, 1.0);
    for (int i = 40; i < 60; ++i)
        v[i] = 1e-12;
    CHECK(count_nodal_domains(v, 1e-8) == 2);
}

TEST_CASE("smoke suite passes on the default problem") {
    const Problem pr = make_problem_m(1.0);
    SuiteConfig suite;
    suite.level = "smoke";
    const VerificationReport rep = run_suite(pr, suite);
    for (const CheckResult& c : rep.checks)
        CHECK_MESSAGE(c.status != CheckStatus::fail, c.id, ": ", c.measured);
    CHECK(rep.all_passed());
    CHECK(find_check(rep, "grid.eigen-residual"));
    CHECK(find_check(rep, "sec2.sinalt-identity"));
    // smoke level skips the expensive structure checks
    CHECK(!find_check(rep, "sec5.thm5.2-structure"));
}

TEST_CASE("suite determinism: identical config and seed give identical verdicts") {
    const Problem pr = make_problem_m(1.0);
    SuiteConfig suite;
    suite.level = "smoke";
    suite.seed = 777;
    const VerificationReport r1 = run_suite(pr, suite);
    const VerificationReport r2 = run_suite(pr, suite);
    REQUIRE(r1.checks.size() == r2.checks.size());
    for (std::size_t i = 0; i < r1.checks.size(); ++i) {
        CHECK(r1.checks[i].id == r2.checks[i].id);
        CHECK(r1.checks[i].status == r2.checks[i].status);
        CHECK(r1.checks[i].measured == r2.checks[i].measured);
    }
}

TEST_CASE("fault injection: an unprojected h fails the bijection check") {
    Grid g = make_grid(99);
    HarvestTerm bad = build_harvest(g, {{2, -1.0}});
    const GridFunction phi = discrete_eigenpair(g, 1).vector;
    for (int i = 0; i < g.n; ++i)
        bad.values[i] += 0.02 * phi[i]; // destroy hypothesis (b)
    const Problem broken = make_problem(std::move(g), make_competition_term(1.0, 1.0, 3), bad);
    SuiteConfig suite;
    suite.level = "smoke";
    const VerificationReport rep = run_suite(broken, suite);
    CHECK(!rep.all_passed());
    const CheckResult* bij = find_check(rep, "lambda1.bijection");
    const CheckResult* hyp = find_check(rep, "model.hypotheses");
    REQUIRE(bij);
    REQUIRE(hyp);
    const bool caught =
        bij->status == CheckStatus::fail || hyp->status == CheckStatus::fail;
    CHECK(caught);
}

TEST_CASE("stable solution walk reaches the requested c") {
    const Problem pr = make_problem_m(1.0);
    const double a = pr.lambda1 + 0.3 * (pr.lambda2 - pr.lambda1);
    const Solution s = stable_solution_at(pr, a, -20.0);
    CHECK(s.c == doctest::Approx(-20.0));
    CHECK(s.spectrum.morse_index == 0);
    CHECK(s.residual_norm <= 1e-10);
}

TEST_CASE("two-nodal-domain witness search near lambda2") {
    const Problem pr = make_problem_m(1.0);
    const double delta = 0.05 * (pr.lambda3 - pr.lambda2);
    const auto witness = stable_two_nodal_search(
        pr, {pr.lambda2 - 0.2 * (pr.lambda2 - pr.lambda1), pr.lambda2 + delta}, {-1e9, 1e9});
    // the paper expects such examples to exist in 1d; verify the witness when found
    REQUIRE(witness.has_value());
    CHECK(witness->solution.spectrum.morse_index == 0);
    CHECK(witness->domains >= 2);
    CHECK(witness->solution.residual_norm <= 1e-10);

    // no witness on the trivial solution below lambda1
    const auto none = stable_two_nodal_search(pr, {0.4 * pr.lambda1, 0.6 * pr.lambda1},
                                              {-1e-6, 1e-6});
    CHECK(!none.has_value());
}

TEST_CASE("report formatting carries one line per check") {
    const Problem pr = make_problem_m(1.0);
    SuiteConfig suite;
    suite.level = "smoke";
    suite.config_digest = "deadbeef";
    const VerificationReport rep = run_suite(pr, suite);
    const std::string text = format_report(rep);
    CHECK(text.find("deadbeef") != std::string::npos);
    std::size_t lines = 0;
    for (char ch : text)
        if (ch == '\n')
            ++lines;
    CHECK(lines == rep.checks.size() + 2); // header + checks + verdict
}
