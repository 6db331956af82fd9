#pragma once

#include <Eigen/Dense>

namespace lpvred {

/// Time-sampled signals; columns are samples. Diverged simulations are
/// truncated and flagged rather than padded with non-finite values.
struct Trajectory {
    double t_s = 0.0;
    Eigen::MatrixXd u, x, y, p;
    bool diverged = false;

    int length() const { return static_cast<int>(y.cols()); }
};

}  // namespace lpvred
