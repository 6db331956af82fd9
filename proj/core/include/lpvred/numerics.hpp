#pragma once

#include "lpvred/lti.hpp"

namespace lpvred {

struct GramianPair {
    MatrixXd P;  // controllability
    MatrixXd Q;  // observability
};

struct BalancingTransform {
    MatrixXd T;      // x_bal = T x
    MatrixXd T_inv;  // x = T_inv x_bal
    VectorXd hsv;    // nonincreasing Hankel singular values
    int regular_dim; // number of numerically regular directions (== hsv size)
};

/// Solve A P + P A^T + W = 0 (Bartels-Stewart via real Schur).
/// Throws std::runtime_error if A is not Hurwitz.
MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& W);

/// Controllability/observability gramians of a stable LTI model.
GramianPair gramians(const LtiSs& m);

/// Balancing transform from a gramian pair: T P T^T = T^-T Q T^-1 = diag(hsv).
/// Computed via symmetric square-root factors and SVD of the cross factor.
/// Numerically rank-deficient directions (hsv below rank_tol * hsv_max) are
/// kept in the transform but reported through regular_dim.
BalancingTransform balance(const MatrixXd& P, const MatrixXd& Q, double rank_tol = 1e-12);

/// H2 norm; returns +inf for D != 0 or unstable A.
double h2_norm(const LtiSs& m);

/// H-infinity norm by Hamiltonian bisection; returns +inf for unstable A.
double hinf_norm(const LtiSs& m, double tol = 1e-6);

/// Classical balanced truncation of a stable LTI model to order r.
/// Also returns the projections used: reduced = W^T (A,B,C) V.
struct BalredResult {
    LtiSs reduced;
    MatrixXd V, W;  // n x r, W^T V = I
    VectorXd hsv;
};
BalredResult balanced_truncation(const LtiSs& m, int r);

}  // namespace lpvred
