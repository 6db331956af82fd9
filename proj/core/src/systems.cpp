#include "lpvred/systems.hpp"

#include "lpvred/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lpvred {

namespace {

constexpr double kMass = 1.0, kLin = 0.5, kCub = 1.0, kDamp = 1.0;

struct Spring {
    int a, b;  // connects mass a to mass b (b = -1: wall)
};

// Each block is a mass anchored to the rigid wall by its own spring/damper
// (springs 0..n_m-1); adjacent blocks are coupled by further spring/damper
// pairs (springs n_m..2n_m-2).
std::vector<Spring> msd_springs(int n_m) {
    std::vector<Spring> s;
    for (int j = 0; j < n_m; ++j) s.push_back({j, -1});
    for (int i = 0; i + 1 < n_m; ++i) s.push_back({i + 1, i});
    return s;
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

int nth_prime_table_size(int n) {
    // Upper bound for the n-th prime (n >= 6), Rosser's theorem.
    if (n < 6) return 15;
    const double nn = static_cast<double>(n);
    return static_cast<int>(nn * (std::log(nn) + std::log(std::log(nn)))) + 2;
}

std::vector<int> first_primes(int n) {
    const int limit = nth_prime_table_size(n);
    std::vector<bool> sieve(static_cast<size_t>(limit) + 1, true);
    std::vector<int> primes;
    for (int i = 2; i <= limit && static_cast<int>(primes.size()) < n; ++i) {
        if (!sieve[static_cast<size_t>(i)]) continue;
        primes.push_back(i);
        for (long j = static_cast<long>(i) * i; j <= limit; j += i) sieve[static_cast<size_t>(j)] = false;
    }
    if (static_cast<int>(primes.size()) < n) throw std::logic_error("prime sieve undersized");
    return primes;
}

double radical_inverse(long idx, int base) {
    double result = 0.0, f = 1.0 / base;
    while (idx > 0) {
        result += f * static_cast<double>(idx % base);
        idx /= base;
        f /= base;
    }
    return result;
}

}  // namespace

MatrixXd halton_points(int dim, int count, int start) {
    const std::vector<int> primes = first_primes(dim);
    MatrixXd P(dim, count);
    for (int k = 0; k < count; ++k)
        for (int d = 0; d < dim; ++d)
            P(d, k) = radical_inverse(start + k, primes[static_cast<size_t>(d)]);
    return P;
}

MsdConfig msd1_config() {
    MsdConfig c;
    c.n_m = 5;
    for (int j = 0; j < 9; ++j) c.cubic_springs.push_back(j);
    c.amp_train = 0.8;
    c.amp_val = 1.6;
    return c;
}

MsdConfig msd2_config() {
    MsdConfig c;
    c.n_m = 50;
    // Only the wall springs of the last three blocks are nonlinear, so the
    // dynamics are dominated by the linear network; stronger excitation is
    // needed before the cubic terms matter.
    c.cubic_springs = {47, 48, 49};
    c.amp_train = 1.0;
    c.amp_val = 2.0;
    return c;
}

MsdConfig msd3_config() {
    MsdConfig c;
    c.n_m = 50;
    for (int j = 0; j < 99; ++j) c.cubic_springs.push_back(j);
    return c;
}

namespace {

/// Zero-mean multisine with unit peak, from seeded random phases.
VectorXd multisine(int n_samples, double t_s, int harmonics, double horizon, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> phases(static_cast<size_t>(harmonics));
    for (auto& ph : phases) ph = phase(rng);
    VectorXd s = VectorXd::Zero(n_samples);
    const double f0 = 1.0 / horizon;
    for (int k = 0; k < n_samples; ++k) {
        const double t = k * t_s;
        for (int hidx = 1; hidx <= harmonics; ++hidx)
            s(k) += std::cos(2.0 * std::numbers::pi * f0 * hidx * t + phases[static_cast<size_t>(hidx - 1)]);
    }
    return s / s.cwiseAbs().maxCoeff();
}

/// Per-channel scheduling box observed along a training-amplitude excitation
/// (fixed internal seed, so the box is independent of the user seed), widened
/// by a 10% margin per side.
std::vector<std::pair<double, double>> calibrate_bounds(const NonlinearModel& nl,
                                                        const SchedulingMap& eta, double amp) {
    const double t_s = 0.01, horizon = 60.0;
    const int N = static_cast<int>(std::lround(horizon / t_s));
    std::mt19937_64 rng(0x5eedc0deULL);
    MatrixXd u(nl.n_u, N);
    for (int ch = 0; ch < nl.n_u; ++ch)
        u.row(ch) = (0.95 * amp) * multisine(N, t_s, 25, horizon, rng).transpose();
    const Trajectory tr = simulate_nonlinear(nl, u, VectorXd::Zero(nl.n_x), t_s, &eta);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> bounds(static_cast<size_t>(eta.n_p), {inf, -inf});
    for (int k = 0; k < tr.p.cols(); ++k)
        for (int i = 0; i < eta.n_p; ++i) {
            auto& [blo, bhi] = bounds[static_cast<size_t>(i)];
            blo = std::min(blo, tr.p(i, k));
            bhi = std::max(bhi, tr.p(i, k));
        }
    for (auto& [blo, bhi] : bounds) {
        const double observed_lo = blo;
        const double w = std::max(bhi - blo, 1e-9);
        blo -= 0.1 * w;
        bhi += 0.1 * w;
        // Sign-definite channels keep a sign-definite box.
        if (observed_lo >= 0.0 && blo < 0.0) blo = 0.0;
    }
    return bounds;
}

}  // namespace

BenchmarkBundle build_msd(const MsdConfig& cfg) {
    if (cfg.n_m < 1) throw std::invalid_argument("build_msd: need at least one mass");
    const int n_m = cfg.n_m;
    const auto springs = msd_springs(n_m);
    const int n_s = static_cast<int>(springs.size());
    for (int j : cfg.cubic_springs)
        if (j < 0 || j >= n_s) throw std::invalid_argument("build_msd: cubic spring index out of range");
    const int n_x = 2 * n_m, n_p = static_cast<int>(cfg.cubic_springs.size());

    // Joined basis matrices: L_0 carries the linear springs/dampers, input
    // and output; each L_j adds the cubic restoring force of one spring,
    // linearized through p_j = (relative displacement)^2.
    std::vector<MatrixXd> basis(static_cast<size_t>(n_p) + 1,
                                MatrixXd::Zero(n_x + 1, n_x + 1));
    MatrixXd& L0 = basis[0];
    for (int i = 0; i < n_m; ++i) L0(i, n_m + i) = 1.0;  // qdot = v
    auto add_force = [&](MatrixXd& L, const Spring& s, double k, bool damper) {
        // Force -k*(q_a - q_b) (and optionally -b*(v_a - v_b)) on mass a,
        // reaction on mass b.
        const int row_a = n_m + s.a;
        L(row_a, s.a) -= k / kMass;
        if (s.b >= 0) L(row_a, s.b) += k / kMass;
        if (damper) {
            L(row_a, n_m + s.a) -= kDamp / kMass;
            if (s.b >= 0) L(row_a, n_m + s.b) += kDamp / kMass;
        }
        if (s.b >= 0) {
            const int row_b = n_m + s.b;
            L(row_b, s.a) += k / kMass;
            L(row_b, s.b) -= k / kMass;
            if (damper) {
                L(row_b, n_m + s.a) += kDamp / kMass;
                L(row_b, n_m + s.b) -= kDamp / kMass;
            }
        }
    };
    for (const Spring& s : springs) add_force(L0, s, kLin, true);
    L0(2 * n_m - 1, n_x) = 1.0 / kMass;  // input force on the last mass
    L0(n_x, n_m - 1) = 1.0;              // output: last mass position
    for (int j = 0; j < n_p; ++j)
        add_force(basis[static_cast<size_t>(j) + 1], springs[static_cast<size_t>(cfg.cubic_springs[static_cast<size_t>(j)])],
                  kCub, false);

    NonlinearModel nl;
    nl.n_x = n_x;
    nl.n_u = 1;
    nl.n_y = 1;
    std::vector<char> cubic(static_cast<size_t>(n_s), 0);
    for (int j : cfg.cubic_springs) cubic[static_cast<size_t>(j)] = 1;
    nl.f = [n_m, springs, cubic](const VectorXd& x, const VectorXd& u) {
        VectorXd dx = VectorXd::Zero(2 * n_m);
        dx.head(n_m) = x.segment(n_m, n_m);
        for (size_t si = 0; si < springs.size(); ++si) {
            const Spring& s = springs[si];
            const double qb = s.b >= 0 ? x(s.b) : 0.0;
            const double vb = s.b >= 0 ? x(n_m + s.b) : 0.0;
            const double dq = x(s.a) - qb, dv = x(n_m + s.a) - vb;
            double force = kLin * dq + kDamp * dv;
            if (cubic[si]) force += kCub * dq * dq * dq;
            dx(n_m + s.a) -= force / kMass;
            if (s.b >= 0) dx(n_m + s.b) += force / kMass;
        }
        dx(2 * n_m - 1) += u(0) / kMass;
        return dx;
    };
    nl.h = [n_m](const VectorXd& x, const VectorXd&) {
        VectorXd y(1);
        y(0) = x(n_m - 1);
        return y;
    };

    SchedulingMap eta;
    eta.n_p = n_p;
    std::vector<Spring> masked;
    for (int j : cfg.cubic_springs) masked.push_back(springs[static_cast<size_t>(j)]);
    eta.eta = [masked](const VectorXd& x, const VectorXd&) {
        VectorXd p(masked.size());
        for (size_t j = 0; j < masked.size(); ++j) {
            const double qb = masked[j].b >= 0 ? x(masked[j].b) : 0.0;
            const double dq = x(masked[j].a) - qb;
            p(static_cast<Eigen::Index>(j)) = dq * dq;
        }
        return p;
    };

    std::vector<std::pair<double, double>> bounds = calibrate_bounds(nl, eta, cfg.amp_train);
    AffineLpvSs lpv(n_x, 1, 1, std::move(basis), std::move(bounds));

    BenchmarkBundle bundle;
    bundle.nl = std::move(nl);
    bundle.lpv = std::move(lpv);
    bundle.eta = std::move(eta);
    bundle.amp_train = cfg.amp_train;
    bundle.amp_val = cfg.amp_val;
    return bundle;
}

BenchmarkBundle build_robot_manipulator() {
    // Two-link manipulator; inertia/Coriolis/gravity written so the affine
    // rho-dependent model below is an exact embedding.
    const double a = 5.6794, b = 1.473, c = 1.7985, d = 0.4, e = 0.4, f = 2.0, n = 1.0;

    NonlinearModel nl;
    nl.n_x = 4;
    nl.n_u = 2;
    nl.n_y = 2;
    nl.f = [=](const VectorXd& x, const VectorXd& u) {
        const double q1 = x(0), q2 = x(1), dq1 = x(2), dq2 = x(3);
        const double cd = std::cos(q1 - q2), sd = std::sin(q1 - q2);
        const double h = a * c - b * b * cd * cd;
        const double C1 = b * sd * dq2 * dq2 + f * dq1;
        const double C2 = -b * sd * dq1 * dq1 + f * (dq2 - dq1);
        const double w1 = n * u(0) - C1 + d * std::sin(q1);
        const double w2 = n * u(1) - C2 + e * std::sin(q2);
        VectorXd dx(4);
        dx(0) = dq1;
        dx(1) = dq2;
        dx(2) = (c * w1 - b * cd * w2) / h;
        dx(3) = (-b * cd * w1 + a * w2) / h;
        return dx;
    };
    nl.h = [](const VectorXd& x, const VectorXd&) { return VectorXd(x.head(2)); };

    SchedulingMap eta;
    eta.n_p = 10;
    eta.eta = [=](const VectorXd& x, const VectorXd&) {
        const double q1 = x(0), q2 = x(1), dq1 = x(2), dq2 = x(3);
        const double cd = std::cos(q1 - q2), sd = std::sin(q1 - q2);
        const double h = a * c - b * b * cd * cd;
        VectorXd r(10);
        r(0) = 1.0 / h;
        r(1) = cd / h;
        r(2) = sinc(q1) / h;
        r(3) = cd * sinc(q2) / h;
        r(4) = -(b * b * sd * cd * dq1 + (c + b * cd) * f) / h;
        r(5) = (cd * f - c * sd * dq2) / h;
        r(6) = cd * sinc(q1) / h;
        r(7) = sinc(q2) / h;
        r(8) = (a * b * sd * dq1 + f * (a + b * cd)) / h;
        r(9) = (b * b * sd * cd * dq2 - a * f) / h;
        return r;
    };

    // A(rho), B(rho) affine in rho; joined layout (4+2) x (4+2).
    std::vector<MatrixXd> basis(11, MatrixXd::Zero(6, 6));
    basis[0](0, 2) = 1.0;
    basis[0](1, 3) = 1.0;
    basis[0](4, 0) = 1.0;  // C = [I2 0]
    basis[0](5, 1) = 1.0;
    basis[1](2, 4) = c * n;
    basis[1](3, 5) = a * n;
    basis[2](2, 5) = -b * n;
    basis[2](3, 4) = -b * n;
    basis[3](2, 0) = c * d;
    basis[4](2, 1) = -b * e;
    basis[5](2, 2) = 1.0;
    basis[6](2, 3) = b;
    basis[7](3, 0) = -b * d;
    basis[8](3, 1) = a * e;
    basis[9](3, 2) = 1.0;
    basis[10](3, 3) = 1.0;

    // Empirical scheduling box: sample eta over the operating range
    // |q_i| <= 1.2 rad, |qdot_i| <= 1.5 rad/s, add a 10% margin.
    const MatrixXd H = halton_points(4, 2000);
    std::vector<std::pair<double, double>> bounds(
        10, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    const VectorXd lo = (VectorXd(4) << -1.2, -1.2, -1.5, -1.5).finished();
    const VectorXd hi = -lo;
    for (int k = 0; k < H.cols(); ++k) {
        const VectorXd x = lo + (hi - lo).cwiseProduct(H.col(k));
        const VectorXd r = eta(x, VectorXd::Zero(2));
        for (int i = 0; i < 10; ++i) {
            bounds[static_cast<size_t>(i)].first = std::min(bounds[static_cast<size_t>(i)].first, r(i));
            bounds[static_cast<size_t>(i)].second = std::max(bounds[static_cast<size_t>(i)].second, r(i));
        }
    }
    for (auto& [blo, bhi] : bounds) {
        const double w = std::max(bhi - blo, 1e-6);
        blo -= 0.1 * w;
        bhi += 0.1 * w;
    }

    BenchmarkBundle bundle;
    bundle.name = "rm";
    bundle.nl = std::move(nl);
    bundle.lpv = AffineLpvSs(4, 2, 2, std::move(basis), std::move(bounds));
    bundle.eta = std::move(eta);
    bundle.amp_train = 0.5;
    bundle.amp_val = 1.0;
    return bundle;
}

BenchmarkBundle build_benchmark(const std::string& name) {
    BenchmarkBundle b;
    if (name == "msd1")
        b = build_msd(msd1_config());
    else if (name == "msd2")
        b = build_msd(msd2_config());
    else if (name == "msd3")
        b = build_msd(msd3_config());
    else if (name == "rm")
        return build_robot_manipulator();
    else
        throw std::invalid_argument("unknown benchmark: " + name);
    b.name = name;
    return b;
}

std::vector<std::string> benchmark_names() { return {"msd1", "msd2", "msd3", "rm"}; }

SignalSet design_inputs(const BenchmarkBundle& bundle, std::uint64_t seed, const InputOptions& opts) {
    const int N = static_cast<int>(std::lround(opts.horizon / opts.t_s));
    const int n_u = bundle.nl.n_u;
    const double A1 = bundle.amp_train, A2 = bundle.amp_val;
    std::mt19937_64 rng(seed);

    SignalSet sig;
    sig.t_s = opts.t_s;
    sig.u_train.resize(n_u, N);
    sig.u_in.resize(n_u, N);
    sig.u_out.resize(n_u, N);
    for (int ch = 0; ch < n_u; ++ch) {
        const VectorXd m1 = multisine(N, opts.t_s, opts.harmonics, opts.horizon, rng);
        const VectorXd m2 = multisine(N, opts.t_s, opts.harmonics, opts.horizon, rng);
        const VectorXd m3 = multisine(N, opts.t_s, opts.harmonics, opts.horizon, rng);
        sig.u_train.row(ch) = (0.95 * A1) * m1.transpose();
        // Validation band (A1, A2]: offset the magnitude away from zero.
        for (int k = 0; k < N; ++k) {
            const double mag = 1.05 * A1 + (A2 - 1.05 * A1) * std::abs(m2(k));
            sig.u_in(ch, k) = (m2(k) >= 0.0 ? 1.0 : -1.0) * mag;
        }
        sig.u_out.row(ch) = (1.3 * A2) * m3.transpose();
    }
    return sig;
}

GridSet design_grids(const BenchmarkBundle& bundle, std::uint64_t seed) {
    const int n_p = bundle.lpv.n_p();
    const auto& bounds = bundle.lpv.bounds();
    const int start = 1 + static_cast<int>(seed % 1000) * 571;

    auto scale_into = [&](const MatrixXd& H, double extend) {
        std::vector<VectorXd> pts;
        for (int k = 0; k < H.cols(); ++k) {
            VectorXd p(n_p);
            for (int i = 0; i < n_p; ++i) {
                const auto& [lo, hi] = bounds[static_cast<size_t>(i)];
                p(i) = lo + (hi - lo) * (1.0 + extend) * H(i, k);
            }
            pts.push_back(std::move(p));
        }
        return pts;
    };

    GridSet g;
    g.train = scale_into(halton_points(n_p, 12, start), 0.0);
    g.in = scale_into(halton_points(n_p, 21, start + 100), 0.0);
    g.out = scale_into(halton_points(n_p, 20, start + 300), 0.3);
    // Guarantee at least one point strictly outside the scheduling box.
    VectorXd corner(n_p);
    for (int i = 0; i < n_p; ++i) {
        const auto& [lo, hi] = bounds[static_cast<size_t>(i)];
        corner(i) = hi + 0.25 * (hi - lo);
    }
    g.out.push_back(std::move(corner));
    return g;
}

}  // namespace lpvred
