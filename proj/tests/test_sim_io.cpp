#include <doctest.h>

#include <filesystem>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "lpvred/io.hpp"
#include "lpvred/sim.hpp"
#include "test_util.hpp"

using namespace lpvred;
using namespace lpvred::testutil;

namespace {
std::filesystem::path tmp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lpvred_test_" + name);
}
}  // namespace

TEST_CASE("rk4 lpv simulation matches the matrix exponential on an LTI system") {
    std::mt19937_64 rng(61);
    const int n = 4;
    const LtiSs m = random_stable_ss(n, 1, 1, rng);
    std::vector<MatrixXd> basis{MatrixXd::Zero(n + 1, n + 1)};
    basis[0].topLeftCorner(n, n) = m.A;
    basis[0].topRightCorner(n, 1) = m.B;
    basis[0].bottomLeftCorner(1, n) = m.C;
    const AffineLpvSs model(n, 1, 1, std::move(basis), {});

    const double t_s = 0.01;
    const int N = 200;
    const MatrixXd u = MatrixXd::Zero(1, N);  // free response from x0
    const VectorXd x0 = random_matrix(n, 1, rng);
    SchedulingMap sched{0, [](const VectorXd&, const VectorXd&) { return VectorXd(0); }};
    const Trajectory traj = simulate_lpv(model, sched, u, x0, t_s);
    const MatrixXd Phi = (m.A * (t_s * (N - 1))).exp();
    const VectorXd x_exact = Phi * x0;
    CHECK((traj.x.col(N - 1) - x_exact).norm() < 1e-8 * std::max(1.0, x_exact.norm()));
}

TEST_CASE("nrmse basics") {
    MatrixXd ref(1, 4), test(1, 4);
    ref << 1, 2, 3, 4;
    test = ref;
    CHECK(nrmse(ref, test) == 0.0);
    test(0, 3) += 1.0;
    const double denom = std::sqrt(1.5 * 1.5 + 0.5 * 0.5 + 0.5 * 0.5 + 1.5 * 1.5);
    CHECK(nrmse(ref, test) == doctest::Approx(100.0 / denom));
    CHECK(std::isinf(nrmse(ref, test, /*test_diverged=*/true)));
    MatrixXd constant = MatrixXd::Ones(1, 4);
    CHECK_THROWS_AS((void)nrmse(constant, constant), std::domain_error);
}

TEST_CASE("local error summary excludes unstable points and is recomputable") {
    // A(p) = -1 + 2p: unstable for p > 0.5, by construction.
    std::vector<MatrixXd> basis(2, MatrixXd::Zero(2, 2));
    basis[0](0, 0) = -1.0;
    basis[0](0, 1) = 1.0;
    basis[0](1, 0) = 1.0;
    basis[1](0, 0) = 2.0;
    const AffineLpvSs model(1, 1, 1, std::move(basis), {{0.0, 1.0}});
    std::vector<MatrixXd> rbasis(2, MatrixXd::Zero(2, 2));
    rbasis[0](0, 0) = -1.1;
    rbasis[0](0, 1) = 1.0;
    rbasis[0](1, 0) = 1.0;
    rbasis[1](0, 0) = 2.0;
    const AffineLpvSs reduced(1, 1, 1, std::move(rbasis), {{0.0, 1.0}});

    std::vector<VectorXd> grid;
    for (int k = 0; k <= 10; ++k) {
        VectorXd p(1);
        p << 0.1 * k;
        grid.push_back(p);
    }
    const MetricReport rep = local_errors(model, reduced, grid);
    CHECK(rep.n_unstable == 6);  // p in {0.5 .. 1.0}: A(0.5) = 0 is not Hurwitz either
    CHECK(rep.n_stable == 5);
    MetricReport manual;
    manual.points = rep.points;
    manual.summarize();
    CHECK(manual.mean2 == rep.mean2);
    CHECK(manual.max2 == rep.max2);
    CHECK(manual.std2 == rep.std2);
    CHECK(manual.unstable_ratio == rep.unstable_ratio);
}

TEST_CASE("double formatting round-trips exactly") {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int k = 0; k < 200; ++k) {
        const double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
        CHECK(parse_double(fmt_double(v)) == v);
    }
    CHECK(std::isinf(parse_double(fmt_double(std::numeric_limits<double>::infinity()))));
}

TEST_CASE("model json round-trip is exact") {
    std::mt19937_64 rng(63);
    const AffineLpvSs model = random_stable_affine(4, 2, 1, 2, rng);
    const AffineLpvSs back = model_from_json(model_to_json(model));
    REQUIRE(back.n_p() == model.n_p());
    for (int i = 0; i <= model.n_p(); ++i)
        CHECK((back.basis(i) - model.basis(i)).norm() == 0.0);
    CHECK(back.bounds() == model.bounds());
}

TEST_CASE("trajectory and matrix csv round-trips are exact") {
    std::mt19937_64 rng(64);
    Trajectory traj;
    traj.t_s = 0.01;
    traj.u = random_matrix(1, 30, rng);
    traj.x = random_matrix(3, 30, rng);
    traj.y = random_matrix(2, 30, rng);
    traj.p = random_matrix(2, 30, rng);
    const auto pt = tmp_file("traj.csv");
    write_trajectory_csv(pt, traj);
    const Trajectory back = read_trajectory_csv(pt);
    CHECK((back.u - traj.u).norm() == 0.0);
    CHECK((back.x - traj.x).norm() == 0.0);
    CHECK((back.y - traj.y).norm() == 0.0);
    CHECK((back.p - traj.p).norm() == 0.0);

    const MatrixXd M = random_matrix(3, 7, rng);
    const auto pm = tmp_file("mat.csv");
    write_matrix_csv(pm, "a,b,c", M);
    std::string header;
    const MatrixXd Mb = read_matrix_csv(pm, &header);
    CHECK(header == "a,b,c");
    CHECK((Mb - M).norm() == 0.0);
    std::filesystem::remove(pt);
    std::filesystem::remove(pm);
}

TEST_CASE("sor result json round-trip preserves the reduced model") {
    std::mt19937_64 rng(65);
    const AffineLpvSs model = random_stable_affine(5, 1, 1, 2, rng);
    SorResult res;
    res.method = "mm";
    res.reduced = model;
    res.V = random_matrix(5, 2, rng);
    res.W = random_matrix(5, 2, rng);
    res.hsv = random_matrix(2, 1, rng).cwiseAbs();
    res.matched_rank = 2;
    const ReductionRecord rec = reduction_from_json(sor_result_to_json(res, 1.25));
    REQUIRE(rec.kind == "sor");
    CHECK(rec.cpu_seconds == 1.25);
    CHECK((rec.sor->V - res.V).norm() == 0.0);
    CHECK((rec.sor->reduced.basis(1) - model.basis(1)).norm() == 0.0);
}
