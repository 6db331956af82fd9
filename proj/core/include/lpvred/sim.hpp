#pragma once

#include <functional>
#include <vector>

#include "lpvred/affine.hpp"
#include "lpvred/systems.hpp"
#include "lpvred/trajectory.hpp"

namespace lpvred {

/// Fixed-step RK4 simulation of a nonlinear model under a sampled input
/// (zero-order hold). If `eta` is given the scheduling signal is recorded
/// alongside the trajectory. Divergence (||x|| > 1e9) truncates the
/// trajectory and sets the flag.
Trajectory simulate_nonlinear(const NonlinearModel& model, const MatrixXd& u, const VectorXd& x0,
                              double t_s, const SchedulingMap* eta = nullptr);

/// Self-scheduled LPV simulation: p = sched(x, u) is re-evaluated at every
/// RK4 stage. Use a composed map (eta followed by an encoder) to simulate
/// reduced models.
Trajectory simulate_lpv(const AffineLpvSs& model, const SchedulingMap& sched, const MatrixXd& u,
                        const VectorXd& x0, double t_s);

/// Normalized root-mean-square error in percent: ||y - y_hat||_F over
/// ||y - y_mean||_F with the per-channel temporal mean of the reference.
/// A diverged test trajectory yields +inf. Throws std::domain_error when the
/// reference is constant.
double nrmse(const MatrixXd& y_ref, const MatrixXd& y_test, bool test_diverged = false);
double nrmse(const Trajectory& ref, const Trajectory& test);

struct LocalErrorPoint {
    VectorXd p;            // grid point (full scheduling coordinates)
    double lambda2 = 0.0;  // H2 norm of the frozen error system
    double lambdainf = 0.0;
    bool stable = true;    // both frozen models Hurwitz
};

struct MetricReport {
    std::vector<LocalErrorPoint> points;
    double mean2 = 0.0, max2 = 0.0, std2 = 0.0;
    double meaninf = 0.0, maxinf = 0.0, stdinf = 0.0;
    int n_stable = 0, n_unstable = 0;
    double unstable_ratio = 0.0;  // 100 * unstable / stable

    /// Recompute the summary fields from `points` (stable points only).
    void summarize();
};

struct LocalErrorOptions {
    bool compute_h2 = true;
    bool compute_hinf = true;
};

/// Frozen local error norms over a scheduling grid. `phi_map` translates a
/// full-model grid point into the reduced model's scheduling coordinates
/// (identity when null).
MetricReport local_errors(const AffineLpvSs& full, const AffineLpvSs& reduced,
                          const std::vector<VectorXd>& grid,
                          const std::function<VectorXd(const VectorXd&)>& phi_map = {},
                          const LocalErrorOptions& opts = {});

}  // namespace lpvred
