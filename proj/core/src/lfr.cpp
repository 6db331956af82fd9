#include "lpvred/lfr.hpp"

#include <stdexcept>

namespace lpvred {

MatrixXd LfrModel::delta(const VectorXd& p) const {
    MatrixXd D = MatrixXd::Zero(n_w(), n_z());
    int off = 0;
    for (const auto& [idx, mult] : delta_structure) {
        for (int j = 0; j < mult; ++j) D(off + j, off + j) = p(idx);
        off += mult;
    }
    return D;
}

LfrModel to_lfr(const AffineLpvSs& model, double rank_tol) {
    const int nx = model.n_x(), nu = model.n_u(), ny = model.n_y(), np = model.n_p();

    struct Channel {
        int idx;
        MatrixXd U;   // (nx+ny) x m
        MatrixXd Vt;  // m x (nx+nu)
    };
    std::vector<Channel> channels;
    int total = 0;
    for (int i = 1; i <= np; ++i) {
        const MatrixXd& L = model.basis(i);
        Eigen::JacobiSVD<MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv.size() == 0 || sv(0) == 0.0) continue;
        int m = 0;
        while (m < sv.size() && sv(m) > rank_tol * sv(0)) ++m;
        if (m == 0) continue;
        MatrixXd U = svd.matrixU().leftCols(m);
        MatrixXd Vt = svd.matrixV().leftCols(m).transpose();
        for (int j = 0; j < m; ++j) {
            const double s = std::sqrt(sv(j));
            U.col(j) *= s;
            Vt.row(j) *= sv(j) / s;
        }
        channels.push_back({i - 1, std::move(U), std::move(Vt)});
        total += m;
    }

    LfrModel lfr;
    const MatrixXd& L0 = model.basis(0);
    lfr.A = L0.topLeftCorner(nx, nx);
    lfr.B_u = L0.topRightCorner(nx, nu);
    lfr.C_y = L0.bottomLeftCorner(ny, nx);
    lfr.D_yu = L0.bottomRightCorner(ny, nu);

    lfr.B_d = MatrixXd::Zero(nx, total);
    lfr.D_yd = MatrixXd::Zero(ny, total);
    lfr.C_d = MatrixXd::Zero(total, nx);
    lfr.D_du = MatrixXd::Zero(total, nu);
    lfr.D_dd = MatrixXd::Zero(total, total);

    int off = 0;
    for (const auto& ch : channels) {
        const int m = static_cast<int>(ch.U.cols());
        lfr.B_d.middleCols(off, m) = ch.U.topRows(nx);
        lfr.D_yd.middleCols(off, m) = ch.U.bottomRows(ny);
        lfr.C_d.middleRows(off, m) = ch.Vt.leftCols(nx);
        lfr.D_du.middleRows(off, m) = ch.Vt.rightCols(nu);
        lfr.delta_structure.emplace_back(ch.idx, m);
        off += m;
    }
    return lfr;
}

LtiSs close_lfr(const LfrModel& lfr, const VectorXd& p) {
    const int nw = lfr.n_w();
    if (nw == 0) return LtiSs(lfr.A, lfr.B_u, lfr.C_y, lfr.D_yu);
    const MatrixXd Dl = lfr.delta(p);
    MatrixXd I_DDdd = MatrixXd::Identity(nw, nw) - Dl * lfr.D_dd;
    Eigen::FullPivLU<MatrixXd> lu(I_DDdd);
    if (!lu.isInvertible()) throw std::runtime_error("close_lfr: ill-posed algebraic loop");
    // w = (I - Delta D_dd)^{-1} Delta (C_d x + D_du u)
    MatrixXd M = lu.solve(Dl);
    MatrixXd Acl = lfr.A + lfr.B_d * M * lfr.C_d;
    MatrixXd Bcl = lfr.B_u + lfr.B_d * M * lfr.D_du;
    MatrixXd Ccl = lfr.C_y + lfr.D_yd * M * lfr.C_d;
    MatrixXd Dcl = lfr.D_yu + lfr.D_yd * M * lfr.D_du;
    return LtiSs(Acl, Bcl, Ccl, Dcl);
}

}  // namespace lpvred
