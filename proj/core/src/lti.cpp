#include "lpvred/lti.hpp"

#include <stdexcept>

namespace lpvred {

LtiSs::LtiSs(MatrixXd A_, MatrixXd B_, MatrixXd C_, MatrixXd D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("LtiSs: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("LtiSs: B row mismatch");
    if (C.cols() != A.cols()) throw std::invalid_argument("LtiSs: C column mismatch");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw std::invalid_argument("LtiSs: D shape mismatch");
}

Eigen::MatrixXcd LtiSs::freq_response(double omega) const {
    using namespace std::complex_literals;
    const int n = n_x();
    if (n == 0) return D.cast<std::complex<double>>();
    Eigen::MatrixXcd M = (1i * omega * Eigen::MatrixXcd::Identity(n, n)) - A.cast<std::complex<double>>();
    return C.cast<std::complex<double>>() * M.lu().solve(B.cast<std::complex<double>>()) +
           D.cast<std::complex<double>>();
}

LtiSs LtiSs::error_system(const LtiSs& other) const {
    if (n_u() != other.n_u() || n_y() != other.n_y())
        throw std::invalid_argument("error_system: i/o dimension mismatch");
    const int n1 = n_x(), n2 = other.n_x();
    MatrixXd Ae = MatrixXd::Zero(n1 + n2, n1 + n2);
    Ae.topLeftCorner(n1, n1) = A;
    Ae.bottomRightCorner(n2, n2) = other.A;
    MatrixXd Be(n1 + n2, n_u());
    Be.topRows(n1) = B;
    Be.bottomRows(n2) = other.B;
    MatrixXd Ce(n_y(), n1 + n2);
    Ce.leftCols(n1) = C;
    Ce.rightCols(n2) = -other.C;
    return LtiSs(Ae, Be, Ce, D - other.D);
}

StabilityInfo is_hurwitz(const MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("is_hurwitz: A must be square");
    if (A.rows() == 0) return {true, -std::numeric_limits<double>::infinity()};
    Eigen::EigenSolver<MatrixXd> es(A, /*computeEigenvectors=*/false);
    const double abscissa = es.eigenvalues().real().maxCoeff();
    return {abscissa < 0.0, abscissa};
}

}  // namespace lpvred
