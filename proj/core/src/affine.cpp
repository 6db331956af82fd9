#include "lpvred/affine.hpp"

#include <stdexcept>

namespace lpvred {

AffineLpvSs::AffineLpvSs(int n_x, int n_u, int n_y, std::vector<MatrixXd> basis,
                         std::vector<std::pair<double, double>> bounds)
    : n_x_(n_x), n_u_(n_u), n_y_(n_y), basis_(std::move(basis)), bounds_(std::move(bounds)) {
    if (basis_.empty()) throw std::invalid_argument("AffineLpvSs: basis must contain L_0");
    const auto rows = n_x_ + n_y_;
    const auto cols = n_x_ + n_u_;
    for (const auto& L : basis_) {
        if (L.rows() != rows || L.cols() != cols)
            throw std::invalid_argument("AffineLpvSs: basis matrix shape mismatch");
    }
    if (static_cast<int>(bounds_.size()) != n_p())
        throw std::invalid_argument("AffineLpvSs: bounds length must equal n_p");
}

MatrixXd AffineLpvSs::joined(const VectorXd& p) const {
    if (p.size() != n_p()) throw std::invalid_argument("AffineLpvSs::joined: p dimension mismatch");
    MatrixXd L = basis_[0];
    for (int i = 0; i < n_p(); ++i) L += p(i) * basis_[static_cast<size_t>(i + 1)];
    return L;
}

LtiSs AffineLpvSs::eval(const VectorXd& p) const {
    const MatrixXd L = joined(p);
    return LtiSs(L.topLeftCorner(n_x_, n_x_), L.topRightCorner(n_x_, n_u_),
                 L.bottomLeftCorner(n_y_, n_x_), L.bottomRightCorner(n_y_, n_u_));
}

AffineApplyCache::AffineApplyCache(const AffineLpvSs& model)
    : n_x_(model.n_x()), n_u_(model.n_u()), n_y_(model.n_y()) {
    sparse_basis_.reserve(model.basis().size());
    for (const auto& L : model.basis()) {
        Eigen::SparseMatrix<double> S = L.sparseView();
        S.makeCompressed();
        sparse_basis_.push_back(std::move(S));
    }
}

VectorXd AffineApplyCache::apply(const VectorXd& p, const VectorXd& x, const VectorXd& u) const {
    VectorXd xu(n_x_ + n_u_);
    xu << x, u;
    VectorXd out = sparse_basis_[0] * xu;
    for (int i = 0; i + 1 < static_cast<int>(sparse_basis_.size()); ++i) {
        if (p(i) != 0.0) out += p(i) * (sparse_basis_[static_cast<size_t>(i + 1)] * xu);
    }
    return out;
}

}  // namespace lpvred
