#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpvred/affine.hpp"

namespace lpvred {

/// General nonlinear state-space model xdot = f(x,u), y = h(x,u).
struct NonlinearModel {
    int n_x = 0, n_u = 0, n_y = 0;
    std::function<VectorXd(const VectorXd& x, const VectorXd& u)> f;
    std::function<VectorXd(const VectorXd& x, const VectorXd& u)> h;
};

/// A benchmark system: the nonlinear plant, its exact LPV embedding and the
/// scheduling map tying them together (p = eta(x, u)).
struct BenchmarkBundle {
    std::string name;
    NonlinearModel nl;
    AffineLpvSs lpv;
    SchedulingMap eta;
    double amp_train = 1.0;  // A1: training input amplitude bound
    double amp_val = 1.5;    // A2: validation amplitude bound
};

/// Mass-spring-damper network configuration. N_m masses; springs 0..N_m-1
/// anchor each mass to the rigid wall, springs N_m..2N_m-2 couple adjacent
/// masses. `cubic_springs` lists the spring indices with a nonzero cubic
/// coefficient; each contributes one scheduling variable
/// p_j = (relative displacement)^2.
struct MsdConfig {
    int n_m = 5;
    std::vector<int> cubic_springs;
    double amp_train = 0.2;
    double amp_val = 1.0;
};

MsdConfig msd1_config();
MsdConfig msd2_config();
MsdConfig msd3_config();

BenchmarkBundle build_msd(const MsdConfig& cfg);
BenchmarkBundle build_robot_manipulator();

/// Registry lookup by name: msd1, msd2, msd3, rm. Throws
/// std::invalid_argument on unknown names.
BenchmarkBundle build_benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

/// Three amplitude-banded multisine input sequences (columns are samples):
/// u_train within [0, 0.95 A1], u_in within (1.05 A1, A2], u_out reaching
/// 1.3 A2 so it leaves both bands.
struct SignalSet {
    double t_s = 0.01;
    MatrixXd u_train, u_in, u_out;
};

struct InputOptions {
    double t_s = 0.01;
    double horizon = 60.0;
    int harmonics = 25;
};
SignalSet design_inputs(const BenchmarkBundle& bundle, std::uint64_t seed,
                        const InputOptions& opts = {});

/// Scattered scheduling grids: 12 training points inside the box, 21
/// validation points inside the box, 21 extrapolation points drawn from a
/// box extended 30% beyond the upper bounds.
struct GridSet {
    std::vector<VectorXd> train, in, out;
};
GridSet design_grids(const BenchmarkBundle& bundle, std::uint64_t seed);

/// Low-discrepancy points in [0,1]^dim (Halton sequence), starting from
/// index `start` (>= 1).
MatrixXd halton_points(int dim, int count, int start = 1);

}  // namespace lpvred
