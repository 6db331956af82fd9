#pragma once

#include <map>
#include <optional>
#include <string>

#include "lpvred/affine.hpp"
#include "lpvred/lfr.hpp"
#include "lpvred/mlp.hpp"
#include "lpvred/sor.hpp"
#include "lpvred/trajectory.hpp"

namespace lpvred {

/// Centered/normalized scheduling data. Gamma_m (vectorized joined matrices
/// along the trajectory) is held in factored form: the model is affine in p,
/// so vec L(p_k) = vec L(p_mean) + vec_basis * (p_k - p_mean) and only the
/// n_L x n_p factor plus per-row scales are stored.
struct SchedulingData {
    MatrixXd p_raw;      // n_p x N raw samples
    VectorXd p_mean;     // centering offsets
    VectorXd p_scale;    // max-abs scales (1 where the row is constant)
    MatrixXd gamma;      // n_p x N centered/normalized

    MatrixXd vec_basis;  // n_L x n_p, columns vec(L_i)
    VectorXd vec_mean;   // n_L, vec L(p_mean)
    VectorXd m_scale;    // n_L row scales of Gamma_m

    int n_samples() const { return static_cast<int>(p_raw.cols()); }
    int n_p() const { return static_cast<int>(p_raw.rows()); }

    VectorXd normalize(const VectorXd& p) const;
    VectorXd denormalize(const VectorXd& g) const;
    /// Column k of the (logical) Gamma_m matrix.
    VectorXd gamma_m_col(int k) const;
};

/// Serializable scheduling encoder/decoder map.
struct SchedulingCoder {
    enum class Kind { affine, kernel, mlp };
    Kind kind = Kind::affine;

    // affine: out = lin * p + off
    MatrixXd lin;
    VectorXd off;

    // kernel (polynomial KPCA with Nystrom out-of-sample projection)
    MatrixXd train_samples;  // normalized, n_p x N
    MatrixXd alphas;         // N x n_phi, eigenvector / sqrt(eigenvalue)
    double degree = 1.0;
    VectorXd k_row_mean;     // per-training-sample mean of the Gram matrix
    double k_total_mean = 0.0;
    VectorXd in_mean, in_scale;  // input normalization

    // mlp (operates on normalized input; out_* undo output normalization)
    Mlp net;
    VectorXd out_mean, out_scale;

    VectorXd operator()(const VectorXd& p) const;
};

struct SdrResult {
    AffineLpvSs reduced;  // scheduled by phi
    SchedulingCoder mu;
    std::optional<SchedulingCoder> mu_inv;
    std::string method;
    std::map<std::string, double> diagnostics;
};

/// Gather centered/normalized scheduling data from a simulated trajectory.
SchedulingData collect_scheduling(const Trajectory& traj, const AffineLpvSs& model);

SdrResult pca_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi);
SdrResult tpca_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi);

struct KpcaOptions {
    double degree = 8.0;
    int max_samples = 600;   // uniform subsampling before the N x N eigenproblem
    int hard_limit = 4000;   // resource guard on the Gram matrix size
};
SdrResult kpca_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi,
                      const KpcaOptions& opts = {});

/// Balanced truncation of the role-swapped LFR system; reduces the Delta
/// block to n_phi channels. The zero D_dd of affine models is shifted to
/// -epsilon_shift I before balancing.
struct SdrbrOptions {
    double epsilon_shift = 1e-3;
};
SdrResult sdrbr_reduce(const AffineLpvSs& model, int n_phi, const SdrbrOptions& opts = {});

/// Affine least-squares fit of the joined matrices against an encoded
/// trajectory: min sum_k || Mbar(phi_k) - L(p_k) ||_F^2.
struct FitResult {
    AffineLpvSs model;
    double residual = 0.0;       // sum of squared residuals
    bool rank_deficient = false;
};
FitResult fit_reduced_matrices(const AffineLpvSs& model, const MatrixXd& phi_traj,
                               const MatrixXd& p_traj,
                               const std::vector<std::pair<double, double>>& phi_bounds);

struct NnOptions {
    int hidden = 0;        // 0: default 2 * n_p
    bool linear = false;   // identity activations throughout (AE only)
    int max_samples = 2000;
    TrainOptions train;
};
SdrResult ae_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi,
                    const NnOptions& opts = {});
SdrResult dnn_reduce(const SchedulingData& data, const AffineLpvSs& model, int n_phi,
                     const NnOptions& opts = {});

}  // namespace lpvred
