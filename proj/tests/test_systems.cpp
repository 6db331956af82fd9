#include <doctest.h>

#include <random>

#include "lpvred/sim.hpp"
#include "lpvred/systems.hpp"

using namespace lpvred;

TEST_CASE("benchmark registry") {
    for (const auto& name : benchmark_names()) {
        const BenchmarkBundle b = build_benchmark(name);
        CHECK(b.name == name);
        CHECK(b.lpv.n_x() == b.nl.n_x);
        CHECK(b.lpv.n_p() == b.eta.n_p);
        CHECK(b.lpv.bounds().size() == static_cast<size_t>(b.lpv.n_p()));
    }
    CHECK_THROWS_AS((void)build_benchmark("nope"), std::invalid_argument);
}

TEST_CASE("msd network dimensions follow the configuration") {
    const BenchmarkBundle m1 = build_benchmark("msd1");
    CHECK(m1.lpv.n_x() == 10);
    CHECK(m1.lpv.n_p() == 9);
    const BenchmarkBundle m2 = build_benchmark("msd2");
    CHECK(m2.lpv.n_x() == 100);
    CHECK(m2.lpv.n_p() == 3);
    const BenchmarkBundle m3 = build_benchmark("msd3");
    CHECK(m3.lpv.n_x() == 100);
    CHECK(m3.lpv.n_p() == 99);
    const BenchmarkBundle rm = build_benchmark("rm");
    CHECK(rm.lpv.n_x() == 4);
}

TEST_CASE("lpv embedding reproduces the nonlinear vector field pointwise") {
    for (const auto& name : benchmark_names()) {
        const BenchmarkBundle b = build_benchmark(name);
        std::mt19937_64 rng(101);
        std::normal_distribution<double> dist(0.0, 0.3);
        for (int trial = 0; trial < 20; ++trial) {
            VectorXd x(b.nl.n_x), u(b.nl.n_u);
            for (int i = 0; i < x.size(); ++i) x(i) = dist(rng);
            for (int i = 0; i < u.size(); ++i) u(i) = dist(rng);
            const VectorXd p = b.eta(x, u);
            VectorXd xu(x.size() + u.size());
            xu << x, u;
            const VectorXd lpv_rhs = b.lpv.joined(p) * xu;
            const VectorXd f = b.nl.f(x, u);
            const VectorXd h = b.nl.h(x, u);
            CHECK((lpv_rhs.head(x.size()) - f).norm() < 1e-10 * std::max(1.0, f.norm()));
            CHECK((lpv_rhs.tail(h.size()) - h).norm() < 1e-10 * std::max(1.0, h.norm()));
        }
    }
}

TEST_CASE("input design respects the amplitude bands") {
    const BenchmarkBundle b = build_benchmark("msd1");
    const SignalSet sig = design_inputs(b, 5);
    const double A1 = b.amp_train, A2 = b.amp_val;
    CHECK(sig.u_train.cwiseAbs().maxCoeff() <= 0.95 * A1 + 1e-12);
    CHECK(sig.u_in.cwiseAbs().minCoeff() >= 1.05 * A1 - 1e-12);
    CHECK(sig.u_in.cwiseAbs().maxCoeff() <= A2 + 1e-12);
    CHECK(sig.u_out.cwiseAbs().maxCoeff() == doctest::Approx(1.3 * A2));
}

TEST_CASE("grid design stays inside the boxes") {
    const BenchmarkBundle b = build_benchmark("msd1");
    const GridSet g = design_grids(b, 5);
    CHECK(g.train.size() == 12);
    const auto& bounds = b.lpv.bounds();
    for (const auto& p : g.train)
        for (int i = 0; i < p.size(); ++i) {
            CHECK(p(i) >= bounds[static_cast<size_t>(i)].first - 1e-12);
            CHECK(p(i) <= bounds[static_cast<size_t>(i)].second + 1e-12);
        }
    bool outside = false;
    for (const auto& p : g.out)
        for (int i = 0; i < p.size(); ++i)
            if (p(i) > bounds[static_cast<size_t>(i)].second) outside = true;
    CHECK(outside);  // the extrapolation grid must leave the training box
}

TEST_CASE("designs are deterministic in the seed") {
    const BenchmarkBundle b = build_benchmark("msd1");
    const SignalSet s1 = design_inputs(b, 9), s2 = design_inputs(b, 9), s3 = design_inputs(b, 10);
    CHECK((s1.u_out - s2.u_out).norm() == 0.0);
    CHECK((s1.u_out - s3.u_out).norm() != 0.0);
    const GridSet g1 = design_grids(b, 9), g2 = design_grids(b, 9);
    for (size_t k = 0; k < g1.out.size(); ++k) CHECK((g1.out[k] - g2.out[k]).norm() == 0.0);
}

TEST_CASE("halton points are low-discrepancy in the unit box") {
    const MatrixXd H = halton_points(3, 100, 7);
    CHECK(H.minCoeff() >= 0.0);
    CHECK(H.maxCoeff() <= 1.0);
    // distinct consecutive points
    CHECK((H.col(0) - H.col(1)).norm() > 1e-6);
}
