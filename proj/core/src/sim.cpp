#include "lpvred/sim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpvred/lti.hpp"
#include "lpvred/numerics.hpp"

namespace lpvred {

namespace {

constexpr double kDivergenceNorm = 1e9;

/// Generic RK4 driver; deriv(x, u) gives xdot, out(x, u) the output and
/// sched (optional) the recorded scheduling signal.
Trajectory rk4_drive(int n_x, int n_y, int n_p, const MatrixXd& u, const VectorXd& x0, double t_s,
                     const std::function<VectorXd(const VectorXd&, const VectorXd&)>& deriv,
                     const std::function<VectorXd(const VectorXd&, const VectorXd&)>& out,
                     const std::function<VectorXd(const VectorXd&, const VectorXd&)>& sched) {
    if (t_s <= 0.0) throw std::invalid_argument("simulate: t_s must be positive");
    if (x0.size() != n_x) throw std::invalid_argument("simulate: x0 size mismatch");
    const int N = static_cast<int>(u.cols());
    if (N > 0 && !deriv(x0, u.col(0)).allFinite())
        throw std::invalid_argument("simulate: non-finite dynamics at the initial state");

    Trajectory traj;
    traj.t_s = t_s;
    traj.u.resize(u.rows(), N);
    traj.x.resize(n_x, N);
    traj.y.resize(n_y, N);
    traj.p.resize(n_p, N);

    VectorXd x = x0;
    int k = 0;
    for (; k < N; ++k) {
        if (!x.allFinite() || x.norm() > kDivergenceNorm) {
            traj.diverged = true;
            break;
        }
        const VectorXd uk = u.col(k);
        traj.u.col(k) = uk;
        traj.x.col(k) = x;
        traj.y.col(k) = out(x, uk);
        if (n_p > 0) traj.p.col(k) = sched(x, uk);

        const VectorXd k1 = deriv(x, uk);
        const VectorXd k2 = deriv(x + 0.5 * t_s * k1, uk);
        const VectorXd k3 = deriv(x + 0.5 * t_s * k2, uk);
        const VectorXd k4 = deriv(x + t_s * k3, uk);
        x += (t_s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (k < N) {  // truncate to the samples actually produced
        traj.u.conservativeResize(Eigen::NoChange, k);
        traj.x.conservativeResize(Eigen::NoChange, k);
        traj.y.conservativeResize(Eigen::NoChange, k);
        traj.p.conservativeResize(Eigen::NoChange, k);
    }
    return traj;
}

}  // namespace

Trajectory simulate_nonlinear(const NonlinearModel& model, const MatrixXd& u, const VectorXd& x0,
                              double t_s, const SchedulingMap* eta) {
    if (u.rows() != model.n_u) throw std::invalid_argument("simulate: input dimension mismatch");
    const int n_p = eta ? eta->n_p : 0;
    return rk4_drive(model.n_x, model.n_y, n_p, u, x0, t_s, model.f, model.h,
                     eta ? eta->eta : std::function<VectorXd(const VectorXd&, const VectorXd&)>{});
}

Trajectory simulate_lpv(const AffineLpvSs& model, const SchedulingMap& sched, const MatrixXd& u,
                        const VectorXd& x0, double t_s) {
    if (u.rows() != model.n_u()) throw std::invalid_argument("simulate: input dimension mismatch");
    if (sched.n_p != model.n_p()) throw std::invalid_argument("simulate: scheduling dimension mismatch");
    const AffineApplyCache cache(model);
    const int n_x = model.n_x();
    auto deriv = [&](const VectorXd& x, const VectorXd& uk) {
        return VectorXd(cache.apply(sched(x, uk), x, uk).head(n_x));
    };
    auto out = [&](const VectorXd& x, const VectorXd& uk) {
        return VectorXd(cache.apply(sched(x, uk), x, uk).tail(model.n_y()));
    };
    return rk4_drive(n_x, model.n_y(), model.n_p(), u, x0, t_s, deriv, out, sched.eta);
}

double nrmse(const MatrixXd& y_ref, const MatrixXd& y_test, bool test_diverged) {
    if (test_diverged || y_test.cols() != y_ref.cols() || !y_test.allFinite())
        return std::numeric_limits<double>::infinity();
    if (y_test.rows() != y_ref.rows()) throw std::invalid_argument("nrmse: channel count mismatch");
    const VectorXd mean = y_ref.rowwise().mean();
    const double denom = (y_ref.colwise() - mean).norm();
    if (denom <= 0.0) throw std::domain_error("nrmse: constant reference signal");
    return (y_test - y_ref).norm() / denom * 100.0;
}

double nrmse(const Trajectory& ref, const Trajectory& test) {
    return nrmse(ref.y, test.y, test.diverged);
}

void MetricReport::summarize() {
    n_stable = 0;
    n_unstable = 0;
    double s2 = 0.0, sinf = 0.0, ss2 = 0.0, ssinf = 0.0;
    max2 = 0.0;
    maxinf = 0.0;
    for (const auto& pt : points) {
        if (!pt.stable) {
            ++n_unstable;
            continue;
        }
        ++n_stable;
        s2 += pt.lambda2;
        sinf += pt.lambdainf;
        max2 = std::max(max2, pt.lambda2);
        maxinf = std::max(maxinf, pt.lambdainf);
    }
    if (n_stable > 0) {
        mean2 = s2 / n_stable;
        meaninf = sinf / n_stable;
        for (const auto& pt : points) {
            if (!pt.stable) continue;
            ss2 += (pt.lambda2 - mean2) * (pt.lambda2 - mean2);
            ssinf += (pt.lambdainf - meaninf) * (pt.lambdainf - meaninf);
        }
        std2 = std::sqrt(ss2 / n_stable);
        stdinf = std::sqrt(ssinf / n_stable);
    } else {
        mean2 = meaninf = std2 = stdinf = 0.0;
    }
    unstable_ratio = n_stable > 0 ? 100.0 * n_unstable / n_stable
                                  : (n_unstable > 0 ? std::numeric_limits<double>::infinity() : 0.0);
}

MetricReport local_errors(const AffineLpvSs& full, const AffineLpvSs& reduced,
                          const std::vector<VectorXd>& grid,
                          const std::function<VectorXd(const VectorXd&)>& phi_map,
                          const LocalErrorOptions& opts) {
    if (grid.empty()) throw std::invalid_argument("local_errors: empty grid");
    MetricReport rep;
    for (const VectorXd& p : grid) {
        LocalErrorPoint pt;
        pt.p = p;
        const LtiSs G = full.eval(p);
        const LtiSs Gr = reduced.eval(phi_map ? phi_map(p) : p);
        pt.stable = is_hurwitz(G.A).hurwitz && is_hurwitz(Gr.A).hurwitz;
        if (pt.stable) {
            const LtiSs err = G.error_system(Gr);
            if (opts.compute_h2) pt.lambda2 = h2_norm(err);
            if (opts.compute_hinf) pt.lambdainf = hinf_norm(err);
        }
        rep.points.push_back(std::move(pt));
    }
    rep.summarize();
    return rep;
}

}  // namespace lpvred
