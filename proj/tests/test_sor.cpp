#include <doctest.h>

#include <random>

#include "lpvred/numerics.hpp"
#include "lpvred/sim.hpp"
#include "lpvred/sor.hpp"
#include "test_util.hpp"

using namespace lpvred;
using namespace lpvred::testutil;

namespace {

// All generalized Markov parameters C_{i} A_{w} B_{j} with up to `depth`
// A-factors, enumerated brute force.
std::vector<MatrixXd> markov_words(const AffineLpvSs& m, int depth) {
    const int np = m.n_p();
    std::vector<MatrixXd> reach;  // words applied to the B blocks
    for (int i = 0; i <= np; ++i) reach.push_back(m.B_block(i));
    std::vector<MatrixXd> out;
    std::vector<MatrixXd> frontier = reach;
    for (int d = 0; d <= depth; ++d) {
        for (const auto& r : frontier)
            for (int i = 0; i <= np; ++i) out.push_back(m.C_block(i) * r);
        if (d == depth) break;
        std::vector<MatrixXd> next;
        for (const auto& r : frontier)
            for (int i = 0; i <= np; ++i) next.push_back(m.A_block(i) * r);
        frontier = std::move(next);
    }
    return out;
}

AffineLpvSs lti_only(const LtiSs& m) {
    const int n = m.n_x();
    std::vector<MatrixXd> basis{MatrixXd::Zero(n + m.n_y(), n + m.n_u())};
    basis[0].topLeftCorner(n, n) = m.A;
    basis[0].topRightCorner(n, m.n_u()) = m.B;
    basis[0].bottomLeftCorner(m.n_y(), n) = m.C;
    basis[0].bottomRightCorner(m.n_y(), m.n_u()) = m.D;
    return AffineLpvSs(n, m.n_u(), m.n_y(), std::move(basis), {});
}

}  // namespace

TEST_CASE("ltibr on an LTI-only model is classical balanced truncation") {
    std::mt19937_64 rng(41);
    const LtiSs m = random_stable_ss(7, 2, 2, rng);
    const auto bt = balanced_truncation(m, 3);
    const SorResult res = ltibr(lti_only(m), 3);
    CHECK(max_principal_angle(res.V, bt.V) < 1e-8);
    CHECK(max_principal_angle(res.W, bt.W) < 1e-8);
}

TEST_CASE("lpvbr on an LTI-only model retains the balanced subspace") {
    std::mt19937_64 rng(42);
    const LtiSs m = random_stable_ss(5, 1, 1, rng);
    const auto bt = balanced_truncation(m, 2);
    const SorResult res = lpvbr(lti_only(m), 2, {VectorXd(0)});
    CHECK(max_principal_angle(res.V, bt.V) < 1e-3);
    CHECK(max_principal_angle(res.W, bt.W) < 1e-3);
}

TEST_CASE("moment matching preserves all short-word Markov parameters") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 8; ++trial) {
        const int nx = 4 + static_cast<int>(rng() % 3);
        const int np = 1 + static_cast<int>(rng() % 2);
        const AffineLpvSs model = random_stable_affine(nx, 1, 1, np, rng, 0.5);
        const int N = 3;
        const SorResult res = moment_match(model, N);
        const auto full = markov_words(model, N - 1);
        const auto red = markov_words(res.reduced, N - 1);
        REQUIRE(full.size() == red.size());
        double scale = 1e-300;
        for (const auto& h : full) scale = std::max(scale, h.cwiseAbs().maxCoeff());
        for (size_t k = 0; k < full.size(); ++k)
            CHECK((full[k] - red[k]).cwiseAbs().maxCoeff() < 1e-8 * scale);
    }
}

TEST_CASE("projections are oblique: W^T V = I") {
    std::mt19937_64 rng(44);
    const AffineLpvSs model = random_stable_affine(6, 1, 1, 2, rng);
    for (const SorResult& res :
         {ltibr(model, 3), moment_match(model, 2, 3), lpvbr(model, 3, {VectorXd::Zero(2)})}) {
        const int r = static_cast<int>(res.V.cols());
        CHECK((res.W.transpose() * res.V - MatrixXd::Identity(r, r)).norm() < 1e-6);
    }
}

TEST_CASE("pvop on a single LTI grid point is classical balanced truncation") {
    std::mt19937_64 rng(45);
    const LtiSs m = random_stable_ss(6, 1, 1, rng);
    const auto bt = balanced_truncation(m, 3);
    const SorResult res = pvop(lti_only(m), 3, {VectorXd(0)});
    CHECK(max_principal_angle(res.V, bt.V) < 1e-8);
    const VectorXd p0(0);
    const LtiSs red = res.reduced.eval(p0);
    CHECK(hinf_norm(m.error_system(red)) ==
          doctest::Approx(hinf_norm(m.error_system(bt.reduced))).epsilon(1e-6));
}

TEST_CASE("pvop rejects unstable grid points") {
    std::mt19937_64 rng(46);
    std::vector<MatrixXd> basis(2, MatrixXd::Zero(3, 3));
    basis[0].topLeftCorner(2, 2) = random_stable_A(2, rng, 0.2);
    basis[0](0, 2) = 1.0;
    basis[0](2, 0) = 1.0;
    basis[1].topLeftCorner(2, 2) = 5.0 * MatrixXd::Identity(2, 2);
    const AffineLpvSs model(2, 1, 1, std::move(basis), {{0.0, 1.0}});
    VectorXd bad(1);
    bad << 1.0;
    CHECK_THROWS_AS((void)pvop(model, 1, {bad}), std::runtime_error);
}

TEST_CASE("full-order reduction is a similarity transform for every method") {
    std::mt19937_64 rng(47);
    const AffineLpvSs model = random_stable_affine(4, 1, 1, 2, rng, 0.4);
    std::vector<VectorXd> grid;
    for (int k = 0; k < 4; ++k) grid.push_back(random_matrix(2, 1, rng, 0.5));
    std::vector<SorResult> results{ltibr(model, 4), lpvbr(model, 4, grid),
                                   moment_match(model, 6, 4), pvop(model, 4, grid)};
    for (const auto& res : results) {
        const MetricReport rep = local_errors(model, res.reduced, grid, {}, {true, true});
        CHECK(rep.n_unstable == 0);
        CHECK(rep.max2 < 1e-6);
        CHECK(rep.maxinf < 1e-6);
    }
}

TEST_CASE("lfrbr with no scheduling channels is classical balanced truncation") {
    std::mt19937_64 rng(48);
    const LtiSs m = random_stable_ss(6, 1, 1, rng);
    const auto bt = balanced_truncation(m, 3);
    const SorResult res = lfrbr(lti_only(m), 3);
    CHECK(max_principal_angle(res.V, bt.V) < 1e-6);
    CHECK(max_principal_angle(res.W, bt.W) < 1e-6);
}

TEST_CASE("lfrbr reports inapplicability on affine scheduling channels") {
    // The extended block of an affine model has a zero feedthrough between the
    // channel input and output, so the structured gramian inequality has an
    // identically zero diagonal block and cannot hold strictly. The method
    // must say so instead of returning a bogus reduction.
    std::mt19937_64 rng(49);
    const AffineLpvSs model = random_stable_affine(4, 1, 1, 1, rng, 0.4);
    CHECK_THROWS_AS((void)lfrbr(model, 3), NotApplicableError);
}
