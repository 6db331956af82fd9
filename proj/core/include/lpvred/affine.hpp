#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "lpvred/lti.hpp"

namespace lpvred {

/// Scheduling map p = eta(x, u).
struct SchedulingMap {
    int n_p = 0;
    std::function<VectorXd(const VectorXd& x, const VectorXd& u)> eta;

    VectorXd operator()(const VectorXd& x, const VectorXd& u) const { return eta(x, u); }
};

/// LPV state-space model with affine scheduling dependence, stored as joined
/// (n_x+n_y) x (n_x+n_u) basis matrices L_0..L_{n_p} with
/// L(p) = L_0 + sum_i p_i L_i.
class AffineLpvSs {
  public:
    AffineLpvSs() = default;
    AffineLpvSs(int n_x, int n_u, int n_y, std::vector<MatrixXd> basis,
                std::vector<std::pair<double, double>> bounds);

    int n_x() const { return n_x_; }
    int n_u() const { return n_u_; }
    int n_y() const { return n_y_; }
    int n_p() const { return static_cast<int>(basis_.size()) - 1; }

    const std::vector<MatrixXd>& basis() const { return basis_; }
    const MatrixXd& basis(int i) const { return basis_[static_cast<size_t>(i)]; }
    const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }

    /// Joined matrix L(p).
    MatrixXd joined(const VectorXd& p) const;

    /// Frozen LTI model at scheduling value p.
    LtiSs eval(const VectorXd& p) const;

    // Block views of a single basis matrix.
    MatrixXd A_block(int i) const { return basis_[static_cast<size_t>(i)].topLeftCorner(n_x_, n_x_); }
    MatrixXd B_block(int i) const { return basis_[static_cast<size_t>(i)].topRightCorner(n_x_, n_u_); }
    MatrixXd C_block(int i) const { return basis_[static_cast<size_t>(i)].bottomLeftCorner(n_y_, n_x_); }
    MatrixXd D_block(int i) const { return basis_[static_cast<size_t>(i)].bottomRightCorner(n_y_, n_u_); }

  private:
    int n_x_ = 0, n_u_ = 0, n_y_ = 0;
    std::vector<MatrixXd> basis_;
    std::vector<std::pair<double, double>> bounds_;
};

/// Sparse evaluation cache for repeated L(p)*[x;u] products during
/// simulation. Benchmark basis matrices are very sparse (a handful of
/// nonzeros each), so a sparse apply avoids O(n^2 n_p) per step.
class AffineApplyCache {
  public:
    explicit AffineApplyCache(const AffineLpvSs& model);

    /// Returns [xdot; y] = L(p) * [x; u].
    VectorXd apply(const VectorXd& p, const VectorXd& x, const VectorXd& u) const;

  private:
    int n_x_, n_u_, n_y_;
    std::vector<Eigen::SparseMatrix<double>> sparse_basis_;
};

}  // namespace lpvred
