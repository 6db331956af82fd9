#include "lpvred/sdr.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "lpvred/numerics.hpp"

namespace lpvred {

namespace {

VectorXd vec_of(const MatrixXd& M) {
    return Eigen::Map<const VectorXd>(M.data(), M.size());
}

MatrixXd unvec(const VectorXd& v, int rows, int cols) {
    return Eigen::Map<const MatrixXd>(v.data(), rows, cols);
}

std::vector<std::pair<double, double>> bounds_from_scores(const MatrixXd& phi, double margin = 0.1) {
    std::vector<std::pair<double, double>> b;
    for (int j = 0; j < phi.rows(); ++j) {
        double lo = phi.row(j).minCoeff(), hi = phi.row(j).maxCoeff();
        const double w = std::max(hi - lo, 1e-9);
        b.emplace_back(lo - margin * w, hi + margin * w);
    }
    return b;
}

SchedulingCoder affine_coder(MatrixXd lin, VectorXd off) {
    SchedulingCoder c;
    c.kind = SchedulingCoder::Kind::affine;
    c.lin = std::move(lin);
    c.off = std::move(off);
    return c;
}

SdrResult identity_reduction(const AffineLpvSs& model, const std::string& method) {
    SdrResult res;
    res.method = method;
    res.reduced = model;
    const int np = model.n_p();
    res.mu = affine_coder(MatrixXd::Identity(np, np), VectorXd::Zero(np));
    res.mu_inv = res.mu;
    res.diagnostics["identity"] = 1.0;
    return res;
}

// Reduced affine model from an affine decoder p_bar(phi) = off + Dec * phi.
AffineLpvSs substitute_affine(const AffineLpvSs& model, const MatrixXd& dec, const VectorXd& off,
                              std::vector<std::pair<double, double>> phi_bounds) {
    const int n_phi = static_cast<int>(dec.cols());
    std::vector<MatrixXd> basis;
    MatrixXd L0 = model.basis(0);
    for (int i = 0; i < model.n_p(); ++i) L0 += off(i) * model.basis(i + 1);
    basis.push_back(std::move(L0));
    for (int j = 0; j < n_phi; ++j) {
        MatrixXd Lj = MatrixXd::Zero(model.basis(0).rows(), model.basis(0).cols());
        for (int i = 0; i < model.n_p(); ++i) Lj += dec(i, j) * model.basis(i + 1);
        basis.push_back(std::move(Lj));
    }
    return AffineLpvSs(model.n_x(), model.n_u(), model.n_y(), std::move(basis),
                       std::move(phi_bounds));
}

MatrixXd subsample_cols(const MatrixXd& M, int max_cols, std::vector<int>* picked = nullptr) {
    const int N = static_cast<int>(M.cols());
    if (N <= max_cols) {
        if (picked)
            for (int k = 0; k < N; ++k) picked->push_back(k);
        return M;
    }
    const int stride = (N + max_cols - 1) / max_cols;
    const int n = (N + stride - 1) / stride;
    MatrixXd out(M.rows(), n);
    for (int k = 0, c = 0; k < N; k += stride, ++c) {
        out.col(c) = M.col(k);
        if (picked) picked->push_back(k);
    }
    return out;
}

}  // namespace

VectorXd SchedulingData::normalize(const VectorXd& p) const {
    return (p - p_mean).cwiseQuotient(p_scale);
}

VectorXd SchedulingData::denormalize(const VectorXd& g) const {
    return p_mean + p_scale.cwiseProduct(g);
}

VectorXd SchedulingData::gamma_m_col(int k) const {
    return (vec_basis * (p_raw.col(k) - p_mean)).cwiseQuotient(m_scale);
}

SchedulingData collect_scheduling(const Trajectory& traj, const AffineLpvSs& model) {
    if (traj.p.cols() < 2) throw std::invalid_argument("collect_scheduling: need at least 2 samples");
    if (traj.p.rows() != model.n_p())
        throw std::invalid_argument("collect_scheduling: scheduling dimension mismatch");
    SchedulingData d;
    d.p_raw = traj.p;
    d.p_mean = d.p_raw.rowwise().mean();
    MatrixXd centered = d.p_raw.colwise() - d.p_mean;
    d.p_scale = centered.cwiseAbs().rowwise().maxCoeff();
    for (int i = 0; i < d.p_scale.size(); ++i)
        if (d.p_scale(i) <= 0.0) d.p_scale(i) = 1.0;
    d.gamma = d.p_scale.cwiseInverse().asDiagonal() * centered;

    const int nL = static_cast<int>(model.basis(0).size());
    d.vec_basis = MatrixXd(nL, model.n_p());
    for (int i = 0; i < model.n_p(); ++i) d.vec_basis.col(i) = vec_of(model.basis(i + 1));
    d.vec_mean = vec_of(model.joined(d.p_mean));
    VectorXd scale = VectorXd::Zero(nL);
    for (int k = 0; k < centered.cols(); ++k)
        scale = scale.cwiseMax((d.vec_basis * centered.col(k)).cwiseAbs());
    for (int r = 0; r < nL; ++r)
        if (scale(r) <= 0.0) scale(r) = 1.0;
    d.m_scale = scale;
    return d;
}

VectorXd SchedulingCoder::operator()(const VectorXd& p) const {
    switch (kind) {
        case Kind::affine:
            return lin * p + off;
        case Kind::kernel: {
            const VectorXd x = (p - in_mean).cwiseQuotient(in_scale);
            const int N = static_cast<int>(train_samples.cols());
            VectorXd k(N);
            for (int i = 0; i < N; ++i)
                k(i) = std::pow(x.dot(train_samples.col(i)) + 1.0, degree);
            const double km = k.mean();
            VectorXd kc = k.array() - km - k_row_mean.array() + k_total_mean;
            return alphas.transpose() * kc;
        }
        case Kind::mlp: {
            VectorXd z = net.forward((p - in_mean).cwiseQuotient(in_scale));
            return out_mean + out_scale.cwiseProduct(z);
        }
    }
    throw std::logic_error("SchedulingCoder: bad kind");
}

SdrResult pca_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi) {
    const int np = model.n_p();
    if (n_phi < 1 || n_phi > np) throw std::invalid_argument("pca_reduce: bad n_phi");
    Eigen::BDCSVD<MatrixXd> svd(data.gamma, Eigen::ComputeThinU);
    const MatrixXd Us = svd.matrixU().leftCols(n_phi);
    const VectorXd sv = svd.singularValues();

    SdrResult res;
    res.method = "pca";
    // phi = Us^T N(p) folded into one affine map on raw p.
    MatrixXd enc_lin = Us.transpose() * data.p_scale.cwiseInverse().asDiagonal();
    VectorXd enc_off = -enc_lin * data.p_mean;
    res.mu = affine_coder(enc_lin, enc_off);
    MatrixXd dec_lin = data.p_scale.asDiagonal() * Us;
    res.mu_inv = affine_coder(dec_lin, data.p_mean);

    const MatrixXd scores = Us.transpose() * data.gamma;
    res.reduced = substitute_affine(model, dec_lin, data.p_mean, bounds_from_scores(scores));
    double discarded = 0.0;
    for (int i = n_phi; i < sv.size(); ++i) discarded += sv(i) * sv(i);
    res.diagnostics["discarded_energy"] = discarded;
    return res;
}

SdrResult tpca_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi) {
    const int np = model.n_p();
    if (n_phi < 1 || n_phi > np) throw std::invalid_argument("tpca_reduce: bad n_phi");
    // Gamma_m = Q R C with thin QR of the scaled vectorized basis; the SVD is
    // done on the small R C factor.
    const MatrixXd Bn = data.m_scale.cwiseInverse().asDiagonal() * data.vec_basis;
    Eigen::HouseholderQR<MatrixXd> qr(Bn);
    const MatrixXd Q = MatrixXd(qr.householderQ()).leftCols(np);
    const MatrixXd R = qr.matrixQR().topRows(np).triangularView<Eigen::Upper>();
    const MatrixXd centered = data.p_raw.colwise() - data.p_mean;
    Eigen::BDCSVD<MatrixXd> svd(R * centered, Eigen::ComputeThinU);
    const MatrixXd Us_small = svd.matrixU().leftCols(n_phi);
    const MatrixXd U = Q * Us_small;  // n_L x n_phi left singular vectors of Gamma_m

    const int rows = static_cast<int>(model.basis(0).rows());
    const int cols = static_cast<int>(model.basis(0).cols());
    std::vector<MatrixXd> basis;
    basis.push_back(unvec(data.vec_mean, rows, cols));
    for (int j = 0; j < n_phi; ++j)
        basis.push_back(unvec(data.m_scale.cwiseProduct(U.col(j)), rows, cols));

    MatrixXd enc_lin = Us_small.transpose() * R;  // phi = U^T Gamma_m(p)
    VectorXd enc_off = -enc_lin * data.p_mean;
    const MatrixXd scores = enc_lin * data.p_raw + enc_off.replicate(1, data.n_samples());

    SdrResult res;
    res.method = "tpca";
    res.mu = affine_coder(std::move(enc_lin), std::move(enc_off));
    res.reduced = AffineLpvSs(model.n_x(), model.n_u(), model.n_y(), std::move(basis),
                              bounds_from_scores(scores));
    const VectorXd sv = svd.singularValues();
    double discarded = 0.0;
    for (int i = n_phi; i < sv.size(); ++i) discarded += sv(i) * sv(i);
    res.diagnostics["discarded_energy"] = discarded;
    return res;
}

SdrResult kpca_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi,
                      const KpcaOptions& opts) {
    const int np = model.n_p();
    if (n_phi < 1 || n_phi > np) throw std::invalid_argument("kpca_reduce: bad n_phi");
    if (n_phi == np) return identity_reduction(model, "kpca");

    std::vector<int> picked;
    const MatrixXd X = subsample_cols(data.gamma, opts.max_samples, &picked);
    const int N = static_cast<int>(X.cols());
    if (N > opts.hard_limit)
        throw std::runtime_error("kpca_reduce: Gram matrix exceeds the sample limit");

    MatrixXd K(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
            const double v = std::pow(X.col(i).dot(X.col(j)) + 1.0, opts.degree);
            K(i, j) = v;
            K(j, i) = v;
        }
    const VectorXd row_mean = K.rowwise().mean();
    const double total_mean = row_mean.mean();
    MatrixXd Kc = K;
    Kc.colwise() -= row_mean;
    Kc.rowwise() -= row_mean.transpose();
    Kc.array() += total_mean;

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Kc);
    if (es.info() != Eigen::Success) throw std::runtime_error("kpca_reduce: eigendecomposition failed");
    MatrixXd alphas(N, n_phi);
    for (int c = 0; c < n_phi; ++c) {
        const int idx = N - 1 - c;  // eigenvalues ascending
        const double lam = es.eigenvalues()(idx);
        if (lam <= 1e-12 * std::abs(es.eigenvalues()(N - 1)))
            throw std::runtime_error("kpca_reduce: requested component has negligible variance");
        alphas.col(c) = es.eigenvectors().col(idx) / std::sqrt(lam);
    }

    SdrResult res;
    res.method = "kpca";
    res.mu.kind = SchedulingCoder::Kind::kernel;
    res.mu.train_samples = X;
    res.mu.alphas = alphas;
    res.mu.degree = opts.degree;
    res.mu.k_row_mean = row_mean;
    res.mu.k_total_mean = total_mean;
    res.mu.in_mean = data.p_mean;
    res.mu.in_scale = data.p_scale;

    // Training scores and matrix fit on the subsampled trajectory.
    MatrixXd phi = (Kc * alphas).transpose();  // n_phi x N
    MatrixXd p_sub(np, N);
    for (int k = 0; k < N; ++k) p_sub.col(k) = data.p_raw.col(picked[static_cast<size_t>(k)]);
    FitResult fit = fit_reduced_matrices(model, phi, p_sub, bounds_from_scores(phi));
    res.reduced = fit.model;
    res.diagnostics["fit_residual"] = fit.residual;
    res.diagnostics["train_samples"] = static_cast<double>(N);
    return res;
}

SdrResult sdrbr_reduce(const AffineLpvSs& model, int n_phi, const SdrbrOptions& opts) {
    // Center and scale the scheduling channels to [-1, 1] so the balancing
    // weighs each latent channel by its actual travel; the scaling is folded
    // back into the affine encoder afterwards.
    const int np_raw = model.n_p();
    std::vector<MatrixXd> nb = model.basis();
    VectorXd box_c = VectorXd::Zero(np_raw), box_r = VectorXd::Ones(np_raw);
    std::vector<std::pair<double, double>> unit_box;
    for (int i = 0; i < np_raw; ++i) {
        const auto& [lo, hi] = model.bounds()[static_cast<size_t>(i)];
        box_c(i) = 0.5 * (lo + hi);
        box_r(i) = std::max(0.5 * (hi - lo), 1e-12);
        nb[0] += box_c(i) * nb[static_cast<size_t>(i) + 1];
        nb[static_cast<size_t>(i) + 1] *= box_r(i);
        unit_box.emplace_back(-1.0, 1.0);
    }
    const AffineLpvSs scaled(model.n_x(), model.n_u(), model.n_y(), std::move(nb),
                             std::move(unit_box));
    const LfrModel lfr = to_lfr(scaled);
    const int nz = lfr.n_z();
    if (n_phi < 0 || n_phi > nz) throw std::invalid_argument("sdrbr_reduce: bad n_phi");
    if (n_phi == nz) return identity_reduction(model, "sdrbr");

    // Swapped system: the latent channel state z is balanced instead of x.
    MatrixXd A_sw = lfr.D_dd - opts.epsilon_shift * MatrixXd::Identity(nz, nz);
    if (!is_hurwitz(A_sw).hurwitz)
        throw NotApplicableError("sdrbr_reduce: swapped system unstable after regularization");
    MatrixXd B_sw(nz, model.n_x() + model.n_u());
    B_sw << lfr.C_d, lfr.D_du;
    MatrixXd C_sw(model.n_x() + model.n_y(), nz);
    C_sw << lfr.B_d, lfr.D_yd;
    MatrixXd D_sw(model.n_x() + model.n_y(), model.n_x() + model.n_u());
    D_sw << lfr.A, lfr.B_u, lfr.C_y, lfr.D_yu;

    const auto bt = balanced_truncation(LtiSs(A_sw, B_sw, C_sw, D_sw), n_phi);
    const MatrixXd& V = bt.V;  // n_z x n_phi
    const MatrixXd& W = bt.W;

    // Reduced Delta: Delta_bar(delta) = W^T Delta(delta) V; its diagonal
    // defines the reduced scheduling phi_j = Delta_bar_jj(delta), affine in
    // the centered scheduling delta = (p - c) / r.
    MatrixXd enc_lin = MatrixXd::Zero(n_phi, np_raw);
    int off = 0;
    double offdiag = 0.0;
    for (const auto& [idx, mult] : lfr.delta_structure) {
        MatrixXd Db = W.middleRows(off, mult).transpose() * V.middleRows(off, mult);
        for (int j = 0; j < n_phi; ++j) enc_lin(j, idx) += Db(j, j);
        Db.diagonal().setZero();
        offdiag += Db.squaredNorm();
        off += mult;
    }

    MatrixXd UB(model.n_x() + model.n_y(), n_phi);
    UB << lfr.B_d * V, lfr.D_yd * V;
    MatrixXd VC(n_phi, model.n_x() + model.n_u());
    VC << W.transpose() * lfr.C_d, W.transpose() * lfr.D_du;

    std::vector<MatrixXd> basis;
    basis.push_back(scaled.basis(0));
    for (int j = 0; j < n_phi; ++j) basis.push_back(UB.col(j) * VC.row(j));

    // phi box by interval arithmetic through the encoder over delta in
    // [-1, 1]; then fold the centering into an encoder on the raw p.
    std::vector<std::pair<double, double>> phi_bounds;
    for (int j = 0; j < n_phi; ++j) {
        const double w = enc_lin.row(j).cwiseAbs().sum();
        phi_bounds.emplace_back(-w, w);
    }
    MatrixXd enc_raw = enc_lin * box_r.cwiseInverse().asDiagonal();
    VectorXd enc_off = -enc_raw * box_c;

    SdrResult res;
    res.method = "sdrbr";
    res.reduced = AffineLpvSs(model.n_x(), model.n_u(), model.n_y(), std::move(basis),
                              std::move(phi_bounds));
    // Minimum-norm right inverse in delta coordinates as the decoding map:
    // p = c + r .* pinv(enc_lin) phi.
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(enc_lin);
    res.mu_inv = affine_coder(box_r.asDiagonal() * cod.pseudoInverse(), box_c);
    res.mu = affine_coder(std::move(enc_raw), std::move(enc_off));
    res.diagnostics["epsilon_shift"] = opts.epsilon_shift;
    res.diagnostics["offdiag_residual"] = std::sqrt(offdiag);
    double tail = 0.0;
    for (int i = n_phi; i < bt.hsv.size(); ++i) tail += bt.hsv(i);
    res.diagnostics["hsv_tail"] = tail;
    return res;
}

FitResult fit_reduced_matrices(const AffineLpvSs& model, const MatrixXd& phi_traj,
                               const MatrixXd& p_traj,
                               const std::vector<std::pair<double, double>>& phi_bounds) {
    const int N = static_cast<int>(phi_traj.cols());
    const int n_phi = static_cast<int>(phi_traj.rows());
    if (p_traj.cols() != N) throw std::invalid_argument("fit_reduced_matrices: trajectory mismatch");
    if (N < n_phi + 1) throw std::invalid_argument("fit_reduced_matrices: too few samples");

    const int rows = static_cast<int>(model.basis(0).rows());
    const int cols = static_cast<int>(model.basis(0).cols());
    const int nL = rows * cols;
    const int nq = n_phi + 1;

    const VectorXd vb0 = vec_of(model.basis(0));
    MatrixXd Vb(nL, model.n_p());
    for (int i = 0; i < model.n_p(); ++i) Vb.col(i) = vec_of(model.basis(i + 1));

    // Streaming normal equations: G = sum x x^T, Rm = sum x vecL(p_k)^T,
    // using vecL(p) = vb0 + Vb p so the n_L x N target is never formed.
    MatrixXd G = MatrixXd::Zero(nq, nq);
    VectorXd sum_x = VectorXd::Zero(nq);
    MatrixXd sum_xp = MatrixXd::Zero(nq, model.n_p());
    VectorXd sum_p = VectorXd::Zero(model.n_p());
    MatrixXd sum_pp = MatrixXd::Zero(model.n_p(), model.n_p());
    for (int k = 0; k < N; ++k) {
        VectorXd x(nq);
        x(0) = 1.0;
        x.tail(n_phi) = phi_traj.col(k);
        G.noalias() += x * x.transpose();
        sum_x += x;
        sum_xp.noalias() += x * p_traj.col(k).transpose();
        sum_p += p_traj.col(k);
        sum_pp.noalias() += p_traj.col(k) * p_traj.col(k).transpose();
    }
    MatrixXd Rm = sum_x * vb0.transpose() + sum_xp * Vb.transpose();  // nq x nL

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
    const VectorXd ev = es.eigenvalues();
    const double emax = ev.maxCoeff();
    FitResult out;
    VectorXd inv_ev = VectorXd::Zero(nq);
    for (int i = 0; i < nq; ++i) {
        if (ev(i) > 1e-12 * emax)
            inv_ev(i) = 1.0 / ev(i);
        else
            out.rank_deficient = true;
    }
    const MatrixXd Ginv = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
    const MatrixXd C = Ginv * Rm;  // nq x nL

    // Residual sum: ||targets||^2 - 2 tr(C^T Rm) + tr(C^T G C).
    const double t2 = static_cast<double>(N) * vb0.squaredNorm() + 2.0 * vb0.dot(Vb * sum_p) +
                      (Vb.transpose() * Vb).cwiseProduct(sum_pp).sum();
    out.residual = std::max(0.0, t2 - 2.0 * C.cwiseProduct(Rm).sum() + (C.transpose() * G * C).trace());

    std::vector<MatrixXd> basis;
    for (int q = 0; q < nq; ++q) basis.push_back(unvec(C.row(q).transpose(), rows, cols));
    out.model = AffineLpvSs(model.n_x(), model.n_u(), model.n_y(), std::move(basis), phi_bounds);
    return out;
}

namespace {

Mlp slice_mlp(const Mlp& net, int first, int last) {
    std::vector<int> widths(net.widths().begin() + first, net.widths().begin() + last + 2);
    std::vector<Mlp::Act> acts(net.acts().begin() + first, net.acts().begin() + last + 1);
    Mlp out(widths, acts, 0);
    for (int l = first; l <= last; ++l) {
        out.weights()[static_cast<size_t>(l - first)] = net.weights()[static_cast<size_t>(l)];
        out.biases()[static_cast<size_t>(l - first)] = net.biases()[static_cast<size_t>(l)];
    }
    return out;
}

SchedulingCoder mlp_coder(Mlp net, VectorXd in_mean, VectorXd in_scale, VectorXd out_mean,
                          VectorXd out_scale) {
    SchedulingCoder c;
    c.kind = SchedulingCoder::Kind::mlp;
    c.net = std::move(net);
    c.in_mean = std::move(in_mean);
    c.in_scale = std::move(in_scale);
    c.out_mean = std::move(out_mean);
    c.out_scale = std::move(out_scale);
    return c;
}

}  // namespace

SdrResult ae_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi,
                    const NnOptions& opts) {
    const int np = model.n_p();
    if (n_phi < 1 || n_phi > np) throw std::invalid_argument("ae_reduce: bad n_phi");
    if (n_phi == np) return identity_reduction(model, "ae");
    if (data.n_samples() == 0) throw std::invalid_argument("ae_reduce: empty data");

    const int h = opts.hidden > 0 ? opts.hidden : 2 * np;
    const MatrixXd X = subsample_cols(data.gamma, opts.max_samples);
    const Mlp::Act ha = opts.linear ? Mlp::Act::identity : Mlp::Act::tanh;
    Mlp net({np, h, n_phi, h, np}, {ha, Mlp::Act::identity, ha, Mlp::Act::identity},
            opts.train.seed);
    const TrainReport rep = train_mlp(net, X, X, opts.train);

    const Mlp enc = slice_mlp(net, 0, 1);
    const Mlp dec = slice_mlp(net, 2, 3);

    SdrResult res;
    res.method = "ae";
    res.mu = mlp_coder(enc, data.p_mean, data.p_scale, VectorXd::Zero(n_phi),
                       VectorXd::Ones(n_phi));
    res.mu_inv = mlp_coder(dec, VectorXd::Zero(n_phi), VectorXd::Ones(n_phi), data.p_mean,
                           data.p_scale);

    const MatrixXd phi = enc.forward_batch(data.gamma);
    FitResult fit = fit_reduced_matrices(model, phi, data.p_raw, bounds_from_scores(phi));
    res.reduced = fit.model;
    res.diagnostics["train_loss"] = rep.final_loss;
    res.diagnostics["epochs"] = static_cast<double>(rep.loss_curve.size());
    res.diagnostics["fit_residual"] = fit.residual;
    return res;
}

SdrResult dnn_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi,
                     const NnOptions& opts) {
    const int np = model.n_p();
    if (n_phi < 1 || n_phi > np) throw std::invalid_argument("dnn_reduce: bad n_phi");
    if (n_phi == np) return identity_reduction(model, "dnn");
    if (data.n_samples() == 0) throw std::invalid_argument("dnn_reduce: empty data");

    const int nL = static_cast<int>(data.vec_mean.size());
    int max_samples = opts.max_samples;
    // Keep the dense target matrix within a sane memory budget.
    while (max_samples > 64 && static_cast<long>(nL) * max_samples > 20'000'000) max_samples /= 2;

    std::vector<int> picked;
    const MatrixXd X = subsample_cols(data.gamma, max_samples, &picked);
    const int N = static_cast<int>(X.cols());
    MatrixXd T(nL, N);
    for (int k = 0; k < N; ++k) T.col(k) = data.gamma_m_col(picked[static_cast<size_t>(k)]);

    const int h = opts.hidden > 0 ? opts.hidden : 2 * np;
    const Mlp::Act ha = opts.linear ? Mlp::Act::identity : Mlp::Act::tanh;
    Mlp net({np, h, n_phi, nL}, {ha, Mlp::Act::identity, Mlp::Act::identity}, opts.train.seed);
    const TrainReport rep = train_mlp(net, X, T, opts.train);

    // Final linear layer is the affine decoder in phi; undo the Gamma_m
    // normalization to recover the joined-matrix basis.
    const int rows = static_cast<int>(model.basis(0).rows());
    const int cols = static_cast<int>(model.basis(0).cols());
    const MatrixXd& Wf = net.weights().back();
    const VectorXd& bf = net.biases().back();
    std::vector<MatrixXd> basis;
    basis.push_back(unvec(data.m_scale.cwiseProduct(bf) + data.vec_mean, rows, cols));
    for (int j = 0; j < n_phi; ++j)
        basis.push_back(unvec(data.m_scale.cwiseProduct(Wf.col(j)), rows, cols));

    const Mlp enc = slice_mlp(net, 0, 1);
    const MatrixXd phi = enc.forward_batch(data.gamma);

    SdrResult res;
    res.method = "dnn";
    res.mu = mlp_coder(enc, data.p_mean, data.p_scale, VectorXd::Zero(n_phi),
                       VectorXd::Ones(n_phi));
    res.reduced = AffineLpvSs(model.n_x(), model.n_u(), model.n_y(), std::move(basis),
                              bounds_from_scores(phi));
    res.diagnostics["train_loss"] = rep.final_loss;
    res.diagnostics["epochs"] = static_cast<double>(rep.loss_curve.size());
    return res;
}

}  // namespace lpvred
