#include "lpvred/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lpvred {

namespace {

// Block sizes of an upper quasi-triangular Schur factor.
std::vector<int> schur_blocks(const MatrixXd& T) {
    const int n = static_cast<int>(T.rows());
    std::vector<int> sizes;
    int i = 0;
    while (i < n) {
        if (i + 1 < n && T(i + 1, i) != 0.0) {
            sizes.push_back(2);
            i += 2;
        } else {
            sizes.push_back(1);
            i += 1;
        }
    }
    return sizes;
}

// Solve T Y + Y T^T = C for upper quasi-triangular T.
MatrixXd quasi_triangular_lyap(const MatrixXd& T, const MatrixXd& C) {
    const int n = static_cast<int>(T.rows());
    const auto sizes = schur_blocks(T);
    const int nb = static_cast<int>(sizes.size());
    std::vector<int> offs(static_cast<size_t>(nb));
    for (int b = 0, o = 0; b < nb; ++b) {
        offs[static_cast<size_t>(b)] = o;
        o += sizes[static_cast<size_t>(b)];
    }
    MatrixXd Y = MatrixXd::Zero(n, n);
    for (int j = nb - 1; j >= 0; --j) {
        for (int i = nb - 1; i >= 0; --i) {
            const int oi = offs[static_cast<size_t>(i)], si = sizes[static_cast<size_t>(i)];
            const int oj = offs[static_cast<size_t>(j)], sj = sizes[static_cast<size_t>(j)];
            MatrixXd rhs = C.block(oi, oj, si, sj);
            for (int k = i + 1; k < nb; ++k) {
                const int ok = offs[static_cast<size_t>(k)], sk = sizes[static_cast<size_t>(k)];
                rhs -= T.block(oi, ok, si, sk) * Y.block(ok, oj, sk, sj);
            }
            for (int k = j + 1; k < nb; ++k) {
                const int ok = offs[static_cast<size_t>(k)], sk = sizes[static_cast<size_t>(k)];
                rhs -= Y.block(oi, ok, si, sk) * T.block(oj, ok, sj, sk).transpose();
            }
            // (I (x) T_ii + T_jj (x) I) vec(Y_ij) = vec(rhs)
            MatrixXd K = MatrixXd::Zero(si * sj, si * sj);
            const MatrixXd Tii = T.block(oi, oi, si, si);
            const MatrixXd Tjj = T.block(oj, oj, sj, sj);
            for (int c = 0; c < sj; ++c) K.block(c * si, c * si, si, si) += Tii;
            for (int r = 0; r < sj; ++r)
                for (int c = 0; c < sj; ++c)
                    K.block(r * si, c * si, si, si) += Tjj(r, c) * MatrixXd::Identity(si, si);
            Eigen::Map<VectorXd> rv(rhs.data(), si * sj);
            VectorXd yv = K.partialPivLu().solve(rv);
            Y.block(oi, oj, si, sj) = Eigen::Map<MatrixXd>(yv.data(), si, sj);
        }
    }
    return Y;
}

// Symmetric PSD square-root factor P = R R^T with negative eigenvalues clamped.
MatrixXd psd_factor(const MatrixXd& P) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (P + P.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("psd_factor: eigendecomposition failed");
    VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

bool has_imaginary_eigenvalue(const MatrixXd& H, double tol) {
    Eigen::EigenSolver<MatrixXd> es(H, false);
    const auto& ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i).real()) < tol * (1.0 + std::abs(ev(i).imag()))) return true;
    }
    return false;
}

}  // namespace

MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& W) {
    if (A.rows() != A.cols() || W.rows() != W.cols() || A.rows() != W.rows())
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");
    const int n = static_cast<int>(A.rows());
    if (n == 0) return MatrixXd(0, 0);
    const auto st = is_hurwitz(A);
    if (!st.hurwitz) throw std::runtime_error("solve_lyapunov: A is not Hurwitz");
    Eigen::RealSchur<MatrixXd> schur(A);
    if (schur.info() != Eigen::Success) throw std::runtime_error("solve_lyapunov: Schur failure");
    const MatrixXd U = schur.matrixU();
    const MatrixXd T = schur.matrixT();
    const MatrixXd Wt = U.transpose() * W * U;
    MatrixXd Y = quasi_triangular_lyap(T, -Wt);
    MatrixXd P = U * Y * U.transpose();
    return 0.5 * (P + P.transpose());
}

GramianPair gramians(const LtiSs& m) {
    GramianPair g;
    g.P = solve_lyapunov(m.A, m.B * m.B.transpose());
    g.Q = solve_lyapunov(m.A.transpose(), m.C.transpose() * m.C);
    return g;
}

BalancingTransform balance(const MatrixXd& P, const MatrixXd& Q, double rank_tol) {
    const int n = static_cast<int>(P.rows());
    BalancingTransform bt;
    if (n == 0) {
        bt.T = bt.T_inv = MatrixXd(0, 0);
        bt.hsv = VectorXd(0);
        bt.regular_dim = 0;
        return bt;
    }
    const MatrixXd R = psd_factor(P);
    const MatrixXd L = psd_factor(Q);
    Eigen::JacobiSVD<MatrixXd> svd(L.transpose() * R, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int k = 0;
    while (k < n && sv(k) > rank_tol * smax && sv(k) > 0.0) ++k;

    bt.hsv = sv;
    bt.regular_dim = k;

    if (k == n) {
        const VectorXd sinv = sv.cwiseSqrt().cwiseInverse();
        bt.T = sinv.asDiagonal() * svd.matrixU().transpose() * L.transpose();
        bt.T_inv = R * svd.matrixV() * sinv.asDiagonal();
        return bt;
    }

    // Regular subspace only; complete to an invertible transform so the
    // caller can still form full-size coordinates.
    const VectorXd sk = sv.head(k).cwiseSqrt().cwiseInverse();
    MatrixXd Tinv_k = R * svd.matrixV().leftCols(k) * sk.asDiagonal();
    Eigen::HouseholderQR<MatrixXd> qr(Tinv_k);
    MatrixXd Qfull = qr.householderQ();
    MatrixXd T_inv(n, n);
    T_inv.leftCols(k) = Tinv_k;
    T_inv.rightCols(n - k) = Qfull.rightCols(n - k);
    bt.T_inv = T_inv;
    bt.T = T_inv.partialPivLu().inverse();
    return bt;
}

double h2_norm(const LtiSs& m) {
    const double inf = std::numeric_limits<double>::infinity();
    // Numerically-zero feedthrough counts as zero.
    if (m.D.size() > 0 && m.D.cwiseAbs().maxCoeff() > 1e-12) return inf;
    if (m.n_x() == 0) return 0.0;
    if (!is_hurwitz(m.A).hurwitz) return inf;
    const MatrixXd P = solve_lyapunov(m.A, m.B * m.B.transpose());
    const double t = (m.C * P * m.C.transpose()).trace();
    return std::sqrt(std::max(0.0, t));
}

double hinf_norm(const LtiSs& m, double tol) {
    const double inf = std::numeric_limits<double>::infinity();
    const double sig_d = m.D.size() > 0 ? m.D.jacobiSvd().singularValues()(0) : 0.0;
    if (m.n_x() == 0) return sig_d;
    if (!is_hurwitz(m.A).hurwitz) return inf;

    // Bracket from a coarse log-spaced frequency sweep.
    double lo = sig_d;
    const int n_grid = 200;
    for (int i = 0; i < n_grid; ++i) {
        const double w = std::pow(10.0, -3.0 + 6.0 * i / (n_grid - 1));
        const double s = m.freq_response(w).jacobiSvd().singularValues()(0);
        lo = std::max(lo, s);
    }
    lo = std::max(lo, m.freq_response(0.0).jacobiSvd().singularValues()(0));
    if (lo == 0.0) return 0.0;

    const int n = m.n_x();
    const double h_scale = std::max(1.0, m.A.cwiseAbs().maxCoeff());
    const double imag_tol = 1e-8 * h_scale;
    auto gamma_exceeded = [&](double gamma) {
        // true if ||G||_inf >= gamma (Hamiltonian has imaginary eigenvalues)
        const int nu = m.n_u();
        MatrixXd Rg = gamma * gamma * MatrixXd::Identity(nu, nu) - m.D.transpose() * m.D;
        Eigen::LLT<MatrixXd> llt(Rg);
        if (llt.info() != Eigen::Success) return true;  // gamma <= sigma_max(D)
        MatrixXd Rinv = llt.solve(MatrixXd::Identity(nu, nu));
        MatrixXd Abar = m.A + m.B * Rinv * m.D.transpose() * m.C;
        MatrixXd H(2 * n, 2 * n);
        H.topLeftCorner(n, n) = Abar;
        H.topRightCorner(n, n) = m.B * Rinv * m.B.transpose();
        H.bottomLeftCorner(n, n) =
            -m.C.transpose() * (MatrixXd::Identity(m.n_y(), m.n_y()) + m.D * Rinv * m.D.transpose()) * m.C;
        H.bottomRightCorner(n, n) = -Abar.transpose();
        return has_imaginary_eigenvalue(H, imag_tol);
    };

    double hi = 2.0 * lo;
    int guard = 0;
    while (gamma_exceeded(hi) && guard++ < 60) hi *= 2.0;
    double lob = lo * (1.0 - 1e-12);
    while ((hi - lob) > tol * lob) {
        const double mid = 0.5 * (hi + lob);
        if (gamma_exceeded(mid))
            lob = mid;
        else
            hi = mid;
    }
    return 0.5 * (hi + lob);
}

BalredResult balanced_truncation(const LtiSs& m, int r) {
    if (r < 0 || r > m.n_x()) throw std::invalid_argument("balanced_truncation: bad order");
    const auto g = gramians(m);
    const auto bt = balance(g.P, g.Q);
    BalredResult res;
    res.hsv = bt.hsv;
    res.V = bt.T_inv.leftCols(r);
    res.W = bt.T.topRows(r).transpose();
    res.reduced = LtiSs(res.W.transpose() * m.A * res.V, res.W.transpose() * m.B, m.C * res.V, m.D);
    return res;
}

}  // namespace lpvred
