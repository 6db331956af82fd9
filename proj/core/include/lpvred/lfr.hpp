#pragma once

#include <vector>

#include "lpvred/affine.hpp"

namespace lpvred {

/// Linear fractional representation: LTI core with the scheduling
/// dependence pulled into a diagonal feedback block
/// Delta(p) = diag(p_{i_1} I_{m_1}, ..., p_{i_k} I_{m_k}).
struct LfrModel {
    // Core partition: rows [xdot; z; y], cols [x; w; u].
    MatrixXd A, B_d, B_u;
    MatrixXd C_d, D_dd, D_du;
    MatrixXd C_y, D_yd, D_yu;

    /// (scheduling index, multiplicity) pairs; sum of multiplicities = n_w = n_z.
    std::vector<std::pair<int, int>> delta_structure;

    int n_x() const { return static_cast<int>(A.rows()); }
    int n_u() const { return static_cast<int>(B_u.cols()); }
    int n_y() const { return static_cast<int>(C_y.rows()); }
    int n_w() const { return static_cast<int>(B_d.cols()); }
    int n_z() const { return static_cast<int>(C_d.rows()); }

    MatrixXd delta(const VectorXd& p) const;
};

/// Pull the affine scheduling dependence into an LFR via per-basis SVD rank
/// factorizations L_i = U_i V_i^T. Singular values below rank_tol * sigma_max
/// are treated as zero; zero basis matrices contribute no channel.
LfrModel to_lfr(const AffineLpvSs& model, double rank_tol = 1e-10);

/// Close the Delta loop at a fixed p. Throws std::runtime_error when
/// I - D_dd Delta(p) is singular (algebraic loop).
LtiSs close_lfr(const LfrModel& lfr, const VectorXd& p);

}  // namespace lpvred
