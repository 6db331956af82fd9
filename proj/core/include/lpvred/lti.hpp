#pragma once

#include <Eigen/Dense>
#include <optional>

namespace lpvred {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Continuous-time LTI state-space model (A,B,C,D).
struct LtiSs {
    MatrixXd A, B, C, D;

    LtiSs() = default;
    LtiSs(MatrixXd A_, MatrixXd B_, MatrixXd C_, MatrixXd D_);

    int n_x() const { return static_cast<int>(A.rows()); }
    int n_u() const { return static_cast<int>(B.cols()); }
    int n_y() const { return static_cast<int>(C.rows()); }

    /// Frequency response C (jwI - A)^{-1} B + D.
    Eigen::MatrixXcd freq_response(double omega) const;

    /// Parallel difference G - other: stacked states, subtracted outputs.
    LtiSs error_system(const LtiSs& other) const;
};

struct StabilityInfo {
    bool hurwitz;
    double spectral_abscissa;  // max Re(eig)
};

/// Stability test by eigenvalue computation; empty A counts as stable.
StabilityInfo is_hurwitz(const MatrixXd& A);

}  // namespace lpvred
