#include "lpvred/sor.hpp"

#include <Eigen/QR>
#include <sstream>

#include "lpvred/lfr.hpp"
#include "lpvred/numerics.hpp"

namespace lpvred {

namespace {

AffineLpvSs project_basis(const AffineLpvSs& model, const MatrixXd& V, const MatrixXd& W) {
    const int r = static_cast<int>(V.cols());
    const int nu = model.n_u(), ny = model.n_y();
    std::vector<MatrixXd> basis;
    basis.reserve(model.basis().size());
    for (int i = 0; i <= model.n_p(); ++i) {
        MatrixXd L(r + ny, r + nu);
        L.topLeftCorner(r, r) = W.transpose() * model.A_block(i) * V;
        L.topRightCorner(r, nu) = W.transpose() * model.B_block(i);
        L.bottomLeftCorner(ny, r) = model.C_block(i) * V;
        L.bottomRightCorner(ny, nu) = model.D_block(i);
        basis.push_back(std::move(L));
    }
    return AffineLpvSs(r, nu, ny, std::move(basis), model.bounds());
}

// Accumulating orthonormal basis with rank-tolerance deflation.
class OrthoBasis {
  public:
    explicit OrthoBasis(int n) : Q_(n, 0) {}

    // Returns the newly added orthonormal columns.
    MatrixXd add(const MatrixXd& cols, double tol) {
        if (cols.cols() == 0) return MatrixXd(Q_.rows(), 0);
        MatrixXd M = cols;
        const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
        for (int pass = 0; pass < 2; ++pass)
            if (Q_.cols() > 0) M -= Q_ * (Q_.transpose() * M);
        Eigen::ColPivHouseholderQR<MatrixXd> qr(M);
        qr.setThreshold(tol);
        const int rank = static_cast<int>(qr.rank());
        if (rank == 0) return MatrixXd(Q_.rows(), 0);
        MatrixXd Qnew = MatrixXd(qr.householderQ()).leftCols(rank);
        // Tiny residual components along Q_ can survive QR; re-orthogonalize.
        if (Q_.cols() > 0) {
            Qnew -= Q_ * (Q_.transpose() * Qnew);
            Eigen::HouseholderQR<MatrixXd> qr2(Qnew);
            Qnew = MatrixXd(qr2.householderQ()).leftCols(rank);
        }
        MatrixXd Qext(Q_.rows(), Q_.cols() + rank);
        Qext << Q_, Qnew;
        Q_ = std::move(Qext);
        (void)scale;
        return Qnew;
    }

    const MatrixXd& matrix() const { return Q_; }

  private:
    MatrixXd Q_;
};

int kalman_rank(const MatrixXd& A, const MatrixXd& B, double tol) {
    const int n = static_cast<int>(A.rows());
    MatrixXd K(n, n * B.cols());
    MatrixXd blk = B;
    for (int i = 0; i < n; ++i) {
        K.middleCols(i * B.cols(), B.cols()) = blk;
        blk = A * blk;
    }
    Eigen::JacobiSVD<MatrixXd> svd(K);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int r = 0;
    while (r < sv.size() && sv(r) > tol * sv(0)) ++r;
    return r;
}

}  // namespace

SorResult ltibr(const AffineLpvSs& model, int r_x) {
    if (r_x < 0 || r_x > model.n_x()) throw std::invalid_argument("ltibr: bad target order");
    // Balance around the scheduling box center with unit-radius parameters, so
    // each latent channel is weighted by how far p actually travels; without
    // this the truncation splits energy independently of the box size.
    std::vector<MatrixXd> nb = model.basis();
    std::vector<std::pair<double, double>> unit_box;
    for (int i = 0; i < model.n_p(); ++i) {
        const auto& [lo, hi] = model.bounds()[static_cast<size_t>(i)];
        const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
        nb[0] += c * nb[static_cast<size_t>(i) + 1];
        nb[static_cast<size_t>(i) + 1] *= r;
        unit_box.emplace_back(-1.0, 1.0);
    }
    const AffineLpvSs centered(model.n_x(), model.n_u(), model.n_y(), std::move(nb),
                               std::move(unit_box));
    const LfrModel lfr = to_lfr(centered);
    if (!is_hurwitz(lfr.A).hurwitz)
        throw std::runtime_error("ltibr: LTI core of the LFR is not Hurwitz");

    const int nw = lfr.n_w();
    MatrixXd B_ext(model.n_x(), model.n_u() + nw);
    B_ext << lfr.B_u, lfr.B_d;
    MatrixXd C_ext(model.n_y() + nw, model.n_x());
    C_ext << lfr.C_y, lfr.C_d;
    MatrixXd D_ext(model.n_y() + nw, model.n_u() + nw);
    D_ext << lfr.D_yu, lfr.D_yd, lfr.D_du, lfr.D_dd;

    const auto bt = balanced_truncation(LtiSs(lfr.A, B_ext, C_ext, D_ext), r_x);
    SorResult res;
    res.V = bt.V;
    res.W = bt.W;
    res.hsv = bt.hsv;
    res.method = "ltibr";
    res.reduced = project_basis(model, res.V, res.W);
    return res;
}

SorResult lpvbr(const AffineLpvSs& model, int r_x, const std::vector<VectorXd>& grid,
                const LmiOptions& lmi_opts) {
    if (r_x < 0 || r_x > model.n_x()) throw std::invalid_argument("lpvbr: bad target order");
    const GramianPair g = static_gramians(model, grid, lmi_opts);
    const auto bt = balance(g.P, g.Q);
    SorResult res;
    res.V = bt.T_inv.leftCols(r_x);
    res.W = bt.T.topRows(r_x).transpose();
    res.hsv = bt.hsv;
    res.method = "lpvbr";
    res.reduced = project_basis(model, res.V, res.W);
    return res;
}

SorResult moment_match(const AffineLpvSs& model, int N, std::optional<int> r_x) {
    if (N < 1) throw std::invalid_argument("moment_match: N must be >= 1");
    const int nx = model.n_x(), np = model.n_p();
    const double tol = 1e-10;

    // N-partial reachability space: columns of all A_{i_k}...A_{i_1} B_{i_0}
    // words with up to N-1 A-factors. The frontier is compressed depth-wise
    // by a scale-preserving SVD (U*Sigma) so that the retained directions are
    // weighted by the magnitude of the generalized Markov parameters they
    // carry — plain orthonormalization would let negligible words dominate
    // the truncation step below.
    auto build_space = [&](bool dual) {
        const int blk = dual ? model.n_y() : model.n_u();
        MatrixXd frontier(nx, blk * (np + 1));
        for (int i = 0; i <= np; ++i)
            frontier.middleCols(i * blk, blk) =
                dual ? MatrixXd(model.C_block(i).transpose()) : model.B_block(i);
        std::vector<MatrixXd> blocks{frontier};
        Eigen::Index total = frontier.cols();
        for (int depth = 1; depth < N && frontier.cols() > 0; ++depth) {
            MatrixXd next(nx, frontier.cols() * (np + 1));
            for (int i = 0; i <= np; ++i)
                next.middleCols(i * frontier.cols(), frontier.cols()) =
                    dual ? MatrixXd(model.A_block(i).transpose() * frontier)
                         : MatrixXd(model.A_block(i) * frontier);
            Eigen::BDCSVD<MatrixXd> svd(next, Eigen::ComputeThinU);
            const VectorXd& sv = svd.singularValues();
            int rank = 0;
            while (rank < sv.size() && sv(rank) > 1e-14 * std::max(sv(0), 1e-300)) ++rank;
            frontier = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal();
            if (rank == 0) break;
            blocks.push_back(frontier);
            total += rank;
        }
        MatrixXd M(nx, total);
        Eigen::Index c = 0;
        for (const auto& b : blocks) {
            M.middleCols(c, b.cols()) = b;
            c += b.cols();
        }
        return M;
    };
    const MatrixXd Vr = build_space(false);
    const MatrixXd Wo = build_space(true);
    SorResult res;
    res.method = "mm";

    if (Vr.cols() == 0 || Wo.cols() == 0) {
        res.matched_rank = 0;
        res.V = MatrixXd(nx, 0);
        res.W = MatrixXd(nx, 0);
        res.reduced = project_basis(model, res.V, res.W);
        return res;
    }

    Eigen::JacobiSVD<MatrixXd> svd(Wo.transpose() * Vr, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv(rank) > tol * sv(0)) ++rank;
    res.matched_rank = rank;
    int r = rank;
    if (r_x) {
        if (*r_x < 0) throw std::invalid_argument("moment_match: bad r_x");
        r = std::min(r, *r_x);
    }
    res.hsv = sv.head(rank);

    if (r == rank) {
        // Exact case: V spans the full matched reachability space, W the
        // observability space; all generalized Markov parameters up to word
        // length N are preserved.
        const VectorXd sinv = sv.head(r).cwiseSqrt().cwiseInverse();
        res.V = Vr * svd.matrixV().leftCols(r) * sinv.asDiagonal();
        res.W = Wo * svd.matrixU().leftCols(r) * sinv.asDiagonal();
        res.reduced = project_basis(model, res.V, res.W);
        return res;
    }

    // Truncation below the matched rank: exact matching is impossible, so
    // pick the retained directions inside the matched reachability span by
    // balanced truncation of the frozen model at the nominal scheduling
    // point (continuous-time word magnitudes are a poor energy proxy).
    Eigen::HouseholderQR<MatrixXd> qr(Vr);
    MatrixXd U = MatrixXd(qr.householderQ()).leftCols(std::min<Eigen::Index>(Vr.cols(), nx));
    {
        // Trim to numerical rank of Vr.
        Eigen::BDCSVD<MatrixXd> rsvd(Vr);
        const VectorXd& rs = rsvd.singularValues();
        int vrank = 0;
        while (vrank < rs.size() && rs(vrank) > 1e-12 * rs(0)) ++vrank;
        Eigen::BDCSVD<MatrixXd> usvd(Vr, Eigen::ComputeThinU);
        U = usvd.matrixU().leftCols(vrank);
    }
    VectorXd p_nom(np);
    for (int i = 0; i < np; ++i) {
        const auto& [lo, hi] = model.bounds()[static_cast<size_t>(i)];
        p_nom(i) = std::clamp(0.0, lo, hi);
    }
    const LtiSs nominal = model.eval(p_nom);
    const LtiSs restricted(U.transpose() * nominal.A * U, U.transpose() * nominal.B,
                           nominal.C * U, nominal.D);
    if (is_hurwitz(restricted.A).hurwitz && r <= restricted.A.rows()) {
        const auto bt = balanced_truncation(restricted, r);
        res.V = U * bt.V;
        res.W = U * bt.W;
    } else {
        const VectorXd sinv = sv.head(r).cwiseSqrt().cwiseInverse();
        res.V = Vr * svd.matrixV().leftCols(r) * sinv.asDiagonal();
        res.W = Wo * svd.matrixU().leftCols(r) * sinv.asDiagonal();
    }
    res.reduced = project_basis(model, res.V, res.W);
    return res;
}

SorResult pvop(const AffineLpvSs& model, int r_x, const std::vector<VectorXd>& grid) {
    if (grid.empty()) throw std::invalid_argument("pvop: empty grid");
    if (r_x < 0 || r_x > model.n_x()) throw std::invalid_argument("pvop: bad target order");

    std::vector<LtiSs> frozen;
    std::ostringstream offenders;
    bool any_unstable = false;
    for (const auto& p : grid) {
        LtiSs m = model.eval(p);
        if (!is_hurwitz(m.A).hurwitz) {
            any_unstable = true;
            offenders << " [" << p.transpose() << "]";
        }
        frozen.push_back(std::move(m));
    }
    if (any_unstable)
        throw std::runtime_error("pvop: non-Hurwitz frozen models at grid points:" + offenders.str());

    std::vector<MatrixXd> Vs, Ws;
    for (const auto& m : frozen) {
        const auto bt = balanced_truncation(m, r_x);
        Vs.push_back(bt.V);
        Ws.push_back(bt.W);
    }

    // Local balancing bases are arbitrary per point; align each to the first
    // grid point before interpolating. The alignment is the least-squares
    // invertible change of local coordinates X = argmin ||V_k X - V_0||_F
    // (W_k follows as X^-T to keep W^T V = I); when X is near singular fall
    // back to orthogonal Procrustes.
    for (size_t k = 1; k < Vs.size(); ++k) {
        const MatrixXd G = Vs[k].transpose() * Vs[k];
        MatrixXd X = G.ldlt().solve(Vs[k].transpose() * Vs[0]);
        Eigen::FullPivLU<MatrixXd> lu(X);
        if (!lu.isInvertible() || lu.rcond() < 1e-10) {
            Eigen::JacobiSVD<MatrixXd> svd(Vs[k].transpose() * Vs[0],
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
            X = svd.matrixU() * svd.matrixV().transpose();
        }
        Vs[k] = Vs[k] * X;
        Ws[k] = Ws[k] * X.inverse().transpose();
    }

    // Entrywise affine least-squares fit of the local reduced joined matrices.
    const int ny = model.n_y(), nu = model.n_u();
    const int nL = (r_x + ny) * (r_x + nu);
    const int ng = static_cast<int>(grid.size());
    MatrixXd X(ng, model.n_p() + 1);
    MatrixXd Y(ng, nL);
    for (int k = 0; k < ng; ++k) {
        X(k, 0) = 1.0;
        X.row(k).tail(model.n_p()) = grid[static_cast<size_t>(k)].transpose();
        MatrixXd L(r_x + ny, r_x + nu);
        L.topLeftCorner(r_x, r_x) = Ws[static_cast<size_t>(k)].transpose() *
                                    frozen[static_cast<size_t>(k)].A * Vs[static_cast<size_t>(k)];
        L.topRightCorner(r_x, nu) =
            Ws[static_cast<size_t>(k)].transpose() * frozen[static_cast<size_t>(k)].B;
        L.bottomLeftCorner(ny, r_x) = frozen[static_cast<size_t>(k)].C * Vs[static_cast<size_t>(k)];
        L.bottomRightCorner(ny, nu) = frozen[static_cast<size_t>(k)].D;
        Y.row(k) = Eigen::Map<VectorXd>(L.data(), nL).transpose();
    }
    Eigen::BDCSVD<MatrixXd> lsq(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    MatrixXd coeff = lsq.solve(Y);  // (n_p+1) x nL, minimum-norm when rank-deficient

    std::vector<MatrixXd> basis;
    for (int i = 0; i <= model.n_p(); ++i) {
        VectorXd v = coeff.row(i).transpose();
        basis.push_back(Eigen::Map<MatrixXd>(v.data(), r_x + ny, r_x + nu));
    }

    SorResult res;
    res.method = "pvop";
    res.V = Vs[0];
    res.W = Ws[0];
    res.reduced = AffineLpvSs(r_x, nu, ny, std::move(basis), model.bounds());
    return res;
}

SorResult lfrbr(const AffineLpvSs& model, int r_x, const LmiOptions& lmi_opts) {
    if (r_x < 0 || r_x > model.n_x()) throw std::invalid_argument("lfrbr: bad target order");
    const LfrModel lfr = to_lfr(model);
    const int nx = model.n_x(), nz = lfr.n_z();

    if (nz == 0) {
        // Empty Delta partition: plain balanced truncation.
        const LtiSs core(lfr.A, lfr.B_u, lfr.C_y, lfr.D_yu);
        if (!is_hurwitz(core.A).hurwitz) throw std::runtime_error("lfrbr: core not Hurwitz");
        const auto bt = balanced_truncation(core, r_x);
        SorResult res;
        res.method = "lfrbr";
        res.V = bt.V;
        res.W = bt.W;
        res.hsv = bt.hsv;
        res.reduced = project_basis(model, res.V, res.W);
        return res;
    }

    const int ne = nx + nz;
    MatrixXd At(ne, ne), Bt(ne, model.n_u()), Ct(model.n_y(), ne);
    At << lfr.A, lfr.B_d, lfr.C_d, lfr.D_dd;
    Bt << lfr.B_u, lfr.D_du;
    Ct << lfr.C_y, lfr.D_yd;

    const double rank_tol = 1e-8;
    if (kalman_rank(At, Bt, rank_tol) < ne)
        throw NotApplicableError("lfrbr: extended LTI block is not controllable");
    if (kalman_rank(At.transpose(), Ct.transpose(), rank_tol) < ne)
        throw NotApplicableError("lfrbr: extended LTI block is not observable");

    // Structured gramians P = diag(P_x, P_d1, ...), one block per partition.
    auto structured = [&](const MatrixXd& Am, const MatrixXd& Wm) {
        LmiProgram prog;
        std::vector<std::pair<int, int>> blocks;  // (offset, dim)
        blocks.emplace_back(0, nx);
        int off = nx;
        for (const auto& [idx, mult] : lfr.delta_structure) {
            blocks.emplace_back(off, mult);
            off += mult;
        }
        std::vector<int> vars;
        for (const auto& [o, d] : blocks) vars.push_back(prog.add_variable(d));

        const double eps = 1e-8 * std::max(1.0, Am.cwiseAbs().maxCoeff());
        LmiProgram::Constraint lyap;
        lyap.constant = 0.5 * (Wm + Wm.transpose()) + eps * MatrixXd::Identity(ne, ne);
        for (size_t b = 0; b < blocks.size(); ++b) {
            const auto& [o, d] = blocks[b];
            MatrixXd E = MatrixXd::Zero(ne, d);
            E.middleRows(o, d) = MatrixXd::Identity(d, d);
            lyap.terms.push_back({vars[b], Am * E, E.transpose()});
        }
        prog.add_constraint(std::move(lyap));
        for (size_t b = 0; b < blocks.size(); ++b) {
            const auto& [o, d] = blocks[b];
            LmiProgram::Constraint pd;
            pd.constant = 1e-6 * MatrixXd::Identity(d, d);
            pd.terms.push_back({vars[b], -0.5 * MatrixXd::Identity(d, d), MatrixXd::Identity(d, d)});
            prog.add_constraint(std::move(pd));
        }
        std::vector<MatrixXd> cost;
        for (const auto& [o, d] : blocks) cost.push_back(MatrixXd::Identity(d, d));
        prog.set_objective(cost);
        LmiSolution s = solve_lmi(prog, lmi_opts);
        if (s.status == LmiStatus::infeasible)
            throw NotApplicableError("lfrbr: structured gramian LMI infeasible");
        MatrixXd P = MatrixXd::Zero(ne, ne);
        for (size_t b = 0; b < blocks.size(); ++b) {
            const auto& [o, d] = blocks[b];
            P.block(o, o, d, d) = s.vars[b];
        }
        return P;
    };

    const MatrixXd P = structured(At, Bt * Bt.transpose());
    const MatrixXd Q = structured(At.transpose(), Ct.transpose() * Ct);

    // Balance and truncate the state partition only.
    const auto bt = balance(P.topLeftCorner(nx, nx), Q.topLeftCorner(nx, nx));
    SorResult res;
    res.method = "lfrbr";
    res.V = bt.T_inv.leftCols(r_x);
    res.W = bt.T.topRows(r_x).transpose();
    res.hsv = bt.hsv;
    res.reduced = project_basis(model, res.V, res.W);
    return res;
}

}  // namespace lpvred
