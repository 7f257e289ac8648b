#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hbif/linalg.hpp"
#include "hbif/solver.hpp"
#include "hbif/spectrum.hpp"
#include "oracles.hpp"

using namespace hbif;

namespace {

Problem default_problem(int n = 99) {
    Grid g = make_grid(n);
    HarvestTerm h = build_harvest(g, {{2, -1.0}});
    return make_problem(std::move(g), make_competition_term(1.0, 1.0, 3), std::move(h));
}

TridiagonalOperator neg_laplacian(const Grid& g) {
    TridiagonalOperator op = laplacian_operator(g, 0.0);
    for (double& d : op.diagonal)
        d = -d;
    for (double& e : op.off_diagonal)
        e = -e;
    return op;
}

} // namespace

TEST_CASE("inertia of the negative laplacian") {
    const Grid g = make_grid(99);
    const TridiagonalOperator op = neg_laplacian(g);
    const double l1 = discrete_eigenpair(g, 1).value;
    const double l2 = discrete_eigenpair(g, 2).value;

    Inertia in = inertia(op, 0.5 * (l1 + l2));
    CHECK(in.negatives == 1);
    in = inertia(op, 0.0);
    CHECK(in.negatives == 0);
    CHECK(in.positives == g.n);
    in = inertia(op, l1, 1e-8 * l1);
    CHECK(in.negatives == 0);
    CHECK(in.zeros == 1);
}

TEST_CASE("inertia against sorted diagonal and dense oracle") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uni(-5, 5);

    // random diagonal matrix: counts follow from sorting
    TridiagonalOperator d;
    d.diagonal.resize(31);
    d.off_diagonal.assign(30, 0.0);
    for (double& v : d.diagonal)
        v = uni(rng);
    for (int trial = 0; trial < 10; ++trial) {
        const double shift = uni(rng);
        int below = 0;
        for (double v : d.diagonal)
            if (v < shift)
                ++below;
        CHECK(inertia(d, shift).negatives == below);
    }

    // random symmetric tridiagonal vs dense Jacobi eigenvalues
    for (int trial = 0; trial < 5; ++trial) {
        TridiagonalOperator op;
        const int n = 20 + 5 * trial;
        op.diagonal.resize(n);
        op.off_diagonal.resize(n - 1);
        for (double& v : op.diagonal)
            v = uni(rng);
        for (double& v : op.off_diagonal)
            v = uni(rng);
        const std::vector<double> ev = oracle::dense_eigenvalues(op);
        for (int k = 0; k < 6; ++k) {
            const double shift = uni(rng);
            int below = 0;
            for (double v : ev)
                if (v < shift)
                    ++below;
            CHECK(sturm_count_below(op, shift) == below);
        }
    }
}

TEST_CASE("smallest eigenpair matches the dense oracle") {
    const Grid g = make_grid(39);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> uni(-3, 3);
    for (int trial = 0; trial < 8; ++trial) {
        TridiagonalOperator op;
        op.diagonal.resize(g.n);
        op.off_diagonal.resize(g.n - 1);
        for (double& v : op.diagonal)
            v = uni(rng);
        for (double& v : op.off_diagonal)
            v = uni(rng);
        const Eigenpair ep = smallest_eigenpair(g, op);
        const std::vector<double> ev = oracle::dense_eigenvalues(op);
        CHECK(ep.value == doctest::Approx(ev.front()).epsilon(1e-10));
        // residual of the pair
        std::vector<double> r = tridiagonal_apply(op, ep.vector);
        axpy(-ep.value, ep.vector, r);
        CHECK(norm_inf(r) < 1e-9 * std::max(1.0, std::abs(ep.value)));
    }
}

TEST_CASE("smallest eigenpair of the negative laplacian is (lambda1, phi)") {
    const Grid g = make_grid(99);
    const Eigenpair ep = smallest_eigenpair(g, neg_laplacian(g));
    const Eigenpair ref = discrete_eigenpair(g, 1);
    CHECK(ep.value == doctest::Approx(ref.value).epsilon(1e-12));
    // eigenvector is phi up to the <w,w> = <phi,phi> normalization
    const double scale = ep.vector[g.n / 2] / ref.vector[g.n / 2];
    for (int i = 0; i < g.n; i += 7)
        CHECK(ep.vector[i] == doctest::Approx(scale * ref.vector[i]).epsilon(1e-9));
    CHECK(inner_product(g, ep.vector, ep.vector) ==
          doctest::Approx(inner_product(g, ref.vector, ref.vector)).epsilon(1e-12));
}

TEST_CASE("inertia counts are monotone in the shift") {
    const Grid g = make_grid(39);
    const TridiagonalOperator op = neg_laplacian(g);
    int prev = -1;
    for (double shift = 0; shift < 400; shift += 13.7) {
        const int below = sturm_count_below(op, shift);
        CHECK(below >= prev);
        prev = below;
    }
}

TEST_CASE("morse classification at reference points") {
    const Problem pr = default_problem();
    const GridFunction zero(pr.grid.n, 0.0);

    // below lambda1: index 0, not degenerate, eigenvalue gap >= lambda1 - a
    SpectrumReport rep = linearization_spectrum(pr, 0.6 * pr.lambda1, zero);
    CHECK(rep.morse_index == 0);
    CHECK(!rep.degenerate);
    CHECK(rep.smallest_eigenvalue >= (pr.lambda1 - 0.6 * pr.lambda1) - 1e-8);

    // between the eigenvalues: u = 0 has index 1, nondegenerate
    rep = linearization_spectrum(pr, 0.5 * (pr.lambda1 + pr.lambda2), zero);
    CHECK(rep.morse_index == 1);
    CHECK(!rep.degenerate);

    // at lambda2 on the segment: degenerate index 1 with kernel psi
    GridFunction tpsi(pr.grid.n);
    for (int i = 0; i < pr.grid.n; ++i)
        tpsi[i] = 0.4 * pr.psi[i];
    rep = linearization_spectrum(pr, pr.lambda2, tpsi);
    CHECK(rep.morse_index == 1);
    CHECK(rep.degenerate);
    REQUIRE(rep.kernel_vector.has_value());
    const GridFunction& w = *rep.kernel_vector;
    const double coef = inner_product(pr.grid, w, pr.psi) / pr.psi_psi;
    GridFunction off = w;
    axpy(-coef, pr.psi, off);
    CHECK(norm_inf(off) <= 1e-7 * norm_inf(w));
    CHECK(coef > 0); // sign normalization <w,psi> >= 0 when phi component vanishes

    // above lambda2: u = 0 has index 2
    rep = linearization_spectrum(pr, pr.lambda2 + 0.05 * (pr.lambda3 - pr.lambda2), zero);
    CHECK(rep.morse_index == 2);
}
