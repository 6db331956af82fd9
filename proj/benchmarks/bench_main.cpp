#include <benchmark/benchmark.h>

#include <random>

#include "lpvred/lfr.hpp"
#include "lpvred/numerics.hpp"
#include "lpvred/sdr.hpp"
#include "lpvred/sim.hpp"
#include "lpvred/sor.hpp"
#include "lpvred/systems.hpp"

using namespace lpvred;

namespace {

MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = dist(rng);
    return M;
}

LtiSs random_stable_ss(int n, std::mt19937_64& rng) {
    MatrixXd A = random_matrix(n, n, rng);
    A -= (is_hurwitz(A).spectral_abscissa + 0.5) * MatrixXd::Identity(n, n);
    return LtiSs(A, random_matrix(n, 1, rng), random_matrix(1, n, rng), MatrixXd::Zero(1, 1));
}

const BenchmarkBundle& msd1() {
    static const BenchmarkBundle b = build_benchmark("msd1");
    return b;
}

void bm_simulate_lpv(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    const SignalSet sig = design_inputs(b, 1, {.horizon = 5.0});
    const VectorXd x0 = VectorXd::Zero(b.lpv.n_x());
    for (auto _ : state) {
        Trajectory t = simulate_lpv(b.lpv, b.eta, sig.u_train, x0, sig.t_s);
        benchmark::DoNotOptimize(t.y);
    }
}
BENCHMARK(bm_simulate_lpv)->Unit(benchmark::kMillisecond);

void bm_simulate_nonlinear(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    const SignalSet sig = design_inputs(b, 1, {.horizon = 5.0});
    const VectorXd x0 = VectorXd::Zero(b.nl.n_x);
    for (auto _ : state) {
        Trajectory t = simulate_nonlinear(b.nl, sig.u_train, x0, sig.t_s);
        benchmark::DoNotOptimize(t.y);
    }
}
BENCHMARK(bm_simulate_nonlinear)->Unit(benchmark::kMillisecond);

void bm_to_lfr(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    for (auto _ : state) {
        LfrModel lfr = to_lfr(b.lpv);
        benchmark::DoNotOptimize(lfr.n_z());
    }
}
BENCHMARK(bm_to_lfr);

void bm_balanced_truncation(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const LtiSs m = random_stable_ss(static_cast<int>(state.range(0)), rng);
    for (auto _ : state) {
        auto bt = balanced_truncation(m, 5);
        benchmark::DoNotOptimize(bt.hsv);
    }
}
BENCHMARK(bm_balanced_truncation)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_h2_norm(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const LtiSs m = random_stable_ss(static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(h2_norm(m));
}
BENCHMARK(bm_h2_norm)->Arg(20)->Arg(100);

void bm_hinf_norm(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const LtiSs m = random_stable_ss(static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(hinf_norm(m));
}
BENCHMARK(bm_hinf_norm)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_ltibr_msd1(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    for (auto _ : state) {
        SorResult res = ltibr(b.lpv, 5);
        benchmark::DoNotOptimize(res.V);
    }
}
BENCHMARK(bm_ltibr_msd1)->Unit(benchmark::kMillisecond);

void bm_moment_match_msd1(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    for (auto _ : state) {
        SorResult res = moment_match(b.lpv, 3, 5);
        benchmark::DoNotOptimize(res.V);
    }
}
BENCHMARK(bm_moment_match_msd1)->Unit(benchmark::kMillisecond);

void bm_pca_reduce(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    const SignalSet sig = design_inputs(b, 1, {.horizon = 10.0});
    const Trajectory traj =
        simulate_lpv(b.lpv, b.eta, sig.u_train, VectorXd::Zero(b.lpv.n_x()), sig.t_s);
    const SchedulingData data = collect_scheduling(traj, b.lpv);
    for (auto _ : state) {
        SdrResult res = pca_reduce(data, b.lpv, 2);
        benchmark::DoNotOptimize(res.reduced.n_p());
    }
}
BENCHMARK(bm_pca_reduce)->Unit(benchmark::kMillisecond);

void bm_tpca_reduce(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    const SignalSet sig = design_inputs(b, 1, {.horizon = 10.0});
    const Trajectory traj =
        simulate_lpv(b.lpv, b.eta, sig.u_train, VectorXd::Zero(b.lpv.n_x()), sig.t_s);
    const SchedulingData data = collect_scheduling(traj, b.lpv);
    for (auto _ : state) {
        SdrResult res = tpca_reduce(data, b.lpv, 2);
        benchmark::DoNotOptimize(res.reduced.n_p());
    }
}
BENCHMARK(bm_tpca_reduce)->Unit(benchmark::kMillisecond);

void bm_halton(benchmark::State& state) {
    for (auto _ : state) {
        MatrixXd H = halton_points(9, 1000, 1);
        benchmark::DoNotOptimize(H);
    }
}
BENCHMARK(bm_halton);

void bm_affine_eval(benchmark::State& state) {
    const BenchmarkBundle& b = msd1();
    AffineApplyCache cache(b.lpv);
    VectorXd p = VectorXd::Constant(b.lpv.n_p(), 0.1);
    VectorXd x = VectorXd::Ones(b.lpv.n_x());
    VectorXd u = VectorXd::Ones(b.lpv.n_u());
    for (auto _ : state) {
        benchmark::DoNotOptimize(cache.apply(p, x, u));
        p(0) += 1e-9;  // defeat caching of a constant argument
    }
}
BENCHMARK(bm_affine_eval);

}  // namespace

BENCHMARK_MAIN();
