#include <doctest.h>

#include <random>

#include "lpvred/numerics.hpp"
#include "test_util.hpp"

using namespace lpvred;
using namespace lpvred::testutil;

TEST_CASE("lyapunov solve has small residual on random stable systems") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 9);
        const MatrixXd A = random_stable_A(n, rng);
        const MatrixXd B = random_matrix(n, 2, rng);
        const MatrixXd W = B * B.transpose();
        const MatrixXd P = solve_lyapunov(A, W);
        const double res = (A * P + P * A.transpose() + W).norm() / std::max(1.0, P.norm());
        CHECK(res < 1e-9);
        CHECK((P - P.transpose()).norm() < 1e-10 * std::max(1.0, P.norm()));
    }
}

TEST_CASE("lyapunov solve rejects unstable A") {
    MatrixXd A = MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(solve_lyapunov(A, MatrixXd::Identity(3, 3)), std::runtime_error);
}

TEST_CASE("gramians satisfy both Lyapunov equations") {
    std::mt19937_64 rng(12);
    const LtiSs m = random_stable_ss(6, 2, 2, rng);
    const GramianPair g = gramians(m);
    CHECK((m.A * g.P + g.P * m.A.transpose() + m.B * m.B.transpose()).norm() < 1e-9 * g.P.norm());
    CHECK((m.A.transpose() * g.Q + g.Q * m.A + m.C.transpose() * m.C).norm() < 1e-9 * g.Q.norm());
}

TEST_CASE("balancing transform diagonalizes both gramians") {
    std::mt19937_64 rng(13);
    const LtiSs m = random_stable_ss(7, 2, 3, rng);
    const GramianPair g = gramians(m);
    const BalancingTransform bt = balance(g.P, g.Q);
    const MatrixXd Pb = bt.T * g.P * bt.T.transpose();
    const MatrixXd Qb = bt.T_inv.transpose() * g.Q * bt.T_inv;
    const MatrixXd H = MatrixXd(bt.hsv.asDiagonal());
    CHECK((Pb - H).norm() < 1e-8 * bt.hsv(0));
    CHECK((Qb - H).norm() < 1e-8 * bt.hsv(0));
    for (int i = 1; i < bt.hsv.size(); ++i) CHECK(bt.hsv(i) <= bt.hsv(i - 1) + 1e-14);
}

TEST_CASE("h2 norm matches first-order closed form") {
    // G(s) = cb/(s+a): ||G||_2 = |cb| / sqrt(2a).
    MatrixXd A(1, 1), B(1, 1), C(1, 1), D = MatrixXd::Zero(1, 1);
    A << -3.0;
    B << 2.0;
    C << 5.0;
    const double h2 = h2_norm(LtiSs(A, B, C, D));
    CHECK(h2 == doctest::Approx(10.0 / std::sqrt(6.0)).epsilon(1e-10));
}

TEST_CASE("h2 norm matches frequency quadrature") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 5; ++trial) {
        const LtiSs m = random_stable_ss(5, 2, 2, rng);
        const double h2 = h2_norm(m);
        const double oracle = h2_quadrature(m);
        CHECK(h2 == doctest::Approx(oracle).epsilon(1e-3));
    }
}

TEST_CASE("h2 norm is infinite for nonzero D or unstable A") {
    std::mt19937_64 rng(15);
    const LtiSs m = random_stable_ss(3, 1, 1, rng, /*with_d=*/true);
    CHECK(std::isinf(h2_norm(m)));
    LtiSs u = random_stable_ss(3, 1, 1, rng);
    u.A = -u.A;
    CHECK(std::isinf(h2_norm(u)));
}

TEST_CASE("hinf norm matches dense frequency sampling") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 5; ++trial) {
        const LtiSs m = random_stable_ss(5, 2, 2, rng, /*with_d=*/true);
        const double hinf = hinf_norm(m);
        const double lower = hinf_sampled(m);
        CHECK(hinf >= lower - 1e-6 * lower);
        CHECK(hinf <= lower * (1.0 + 1e-3));
    }
}

TEST_CASE("balanced truncation satisfies the twice-tail error bound") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 5);
        const int r = 1 + static_cast<int>(rng() % (n - 1));
        const LtiSs m = random_stable_ss(n, 2, 2, rng);
        const auto bt = balanced_truncation(m, r);
        double bound = 0.0;
        for (int i = r; i < bt.hsv.size(); ++i) bound += 2.0 * bt.hsv(i);
        const double err = hinf_norm(m.error_system(bt.reduced));
        CHECK(err <= bound * (1.0 + 1e-6) + 1e-12);
        CHECK((bt.W.transpose() * bt.V - MatrixXd::Identity(r, r)).norm() < 1e-8);
    }
}
