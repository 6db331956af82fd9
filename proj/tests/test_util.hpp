#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lpvred/affine.hpp"
#include "lpvred/lti.hpp"

namespace lpvred::testutil {

inline MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = dist(rng);
    return M;
}

/// Random Hurwitz A: shift a random matrix left of the imaginary axis.
inline MatrixXd random_stable_A(int n, std::mt19937_64& rng, double margin = 0.5) {
    MatrixXd A = random_matrix(n, n, rng);
    const double alpha = is_hurwitz(A).spectral_abscissa;
    A -= (alpha + margin) * MatrixXd::Identity(n, n);
    return A;
}

inline LtiSs random_stable_ss(int n, int m, int p, std::mt19937_64& rng, bool with_d = false) {
    return LtiSs(random_stable_A(n, rng), random_matrix(n, m, rng), random_matrix(p, n, rng),
                 with_d ? random_matrix(p, m, rng) : MatrixXd::Zero(p, m));
}

/// Random affine model that stays Hurwitz over the whole box: a stable
/// nominal plus basis perturbations shrunk until every box corner is stable.
inline AffineLpvSs random_stable_affine(int n_x, int n_u, int n_y, int n_p, std::mt19937_64& rng,
                                        double pert = 0.1) {
    std::vector<MatrixXd> basis;
    MatrixXd L0 = random_matrix(n_x + n_y, n_x + n_u, rng);
    L0.topLeftCorner(n_x, n_x) = random_stable_A(n_x, rng, 1.0);
    basis.push_back(L0);
    std::vector<std::pair<double, double>> bounds;
    for (int i = 0; i < n_p; ++i) {
        basis.push_back(random_matrix(n_x + n_y, n_x + n_u, rng, pert / n_p));
        bounds.emplace_back(-1.0, 1.0);
    }
    for (int shrink = 0; shrink < 60; ++shrink) {
        bool ok = true;
        for (int corner = 0; corner < (1 << n_p); ++corner) {
            MatrixXd A = basis[0].topLeftCorner(n_x, n_x);
            for (int i = 0; i < n_p; ++i)
                A += ((corner >> i) & 1 ? 1.0 : -1.0) * basis[static_cast<size_t>(i) + 1].topLeftCorner(n_x, n_x);
            if (is_hurwitz(A).spectral_abscissa > -0.05) {
                ok = false;
                break;
            }
        }
        if (ok) break;
        for (int i = 1; i <= n_p; ++i) basis[static_cast<size_t>(i)] *= 0.5;
    }
    return AffineLpvSs(n_x, n_u, n_y, std::move(basis), std::move(bounds));
}

/// H2 norm by trapezoidal quadrature of the frequency response, independent
/// of the Lyapunov-based implementation.
inline double h2_quadrature(const LtiSs& m, double w_max = 1e4, int n_pts = 200000) {
    double acc = 0.0;
    double prev = m.freq_response(0.0).squaredNorm();
    const double logw0 = -4.0, logw1 = std::log10(w_max);
    double w_prev = 0.0;
    for (int k = 0; k <= n_pts; ++k) {
        const double w = std::pow(10.0, logw0 + (logw1 - logw0) * k / n_pts);
        const double cur = m.freq_response(w).squaredNorm();
        acc += 0.5 * (prev + cur) * (w - w_prev);
        prev = cur;
        w_prev = w;
    }
    return std::sqrt(acc / std::numbers::pi);
}

/// H-infinity lower bound by dense logarithmic frequency sampling.
inline double hinf_sampled(const LtiSs& m, double w_max = 1e4, int n_pts = 20000) {
    double best = m.freq_response(0.0).operatorNorm();
    for (int k = 0; k <= n_pts; ++k) {
        const double w = std::pow(10.0, -4.0 + (std::log10(w_max) + 4.0) * k / n_pts);
        best = std::max(best, m.freq_response(w).operatorNorm());
    }
    return best;
}

/// Sine of the largest principal angle between the column spans, computed
/// from the projection residual (stable near zero, unlike acos of a cosine).
inline double max_principal_angle(const MatrixXd& X, const MatrixXd& Y) {
    Eigen::HouseholderQR<MatrixXd> qx(X), qy(Y);
    MatrixXd Qx = MatrixXd(qx.householderQ()).leftCols(X.cols());
    MatrixXd Qy = MatrixXd(qy.householderQ()).leftCols(Y.cols());
    const MatrixXd R = Qx - Qy * (Qy.transpose() * Qx);
    Eigen::JacobiSVD<MatrixXd> svd(R);
    return svd.singularValues().maxCoeff();
}

}  // namespace lpvred::testutil
