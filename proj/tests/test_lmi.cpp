#include <doctest.h>

#include <random>

#include "lpvred/lmi.hpp"
#include "test_util.hpp"

using namespace lpvred;
using namespace lpvred::testutil;

namespace {

// min trace(P) s.t. A^T P + P A + C^T C < 0, P > pd_eps I.
LmiProgram observability_program(const MatrixXd& A, const MatrixXd& C, double pd_eps = 1e-6) {
    const int n = static_cast<int>(A.rows());
    LmiProgram prog;
    const int v = prog.add_variable(n);
    LmiProgram::Constraint lyap;
    lyap.constant = C.transpose() * C;
    lyap.terms.push_back({v, A.transpose(), MatrixXd::Identity(n, n)});
    prog.add_constraint(std::move(lyap));
    LmiProgram::Constraint pd;
    pd.constant = pd_eps * MatrixXd::Identity(n, n);
    pd.terms.push_back({v, -0.5 * MatrixXd::Identity(n, n), MatrixXd::Identity(n, n)});
    prog.add_constraint(std::move(pd));
    prog.set_objective({MatrixXd::Identity(n, n)});
    return prog;
}

}  // namespace

TEST_CASE("lmi solver reaches the Lyapunov optimum") {
    // The minimum-trace solution of the strict observability LMI approaches
    // the Lyapunov gramian as the slack goes to zero.
    std::mt19937_64 rng(31);
    const LtiSs m = random_stable_ss(4, 1, 2, rng);
    const MatrixXd Q_star = solve_lyapunov(m.A.transpose(), m.C.transpose() * m.C);
    const LmiSolution sol = solve_lmi(observability_program(m.A, m.C));
    REQUIRE(sol.status == LmiStatus::optimal);
    const MatrixXd& Q = sol.vars[0];
    CHECK(sol.worst_margin < 0.0);
    CHECK(Q.trace() >= Q_star.trace() - 1e-6 * Q_star.trace());
    CHECK(Q.trace() <= Q_star.trace() * (1.0 + 1e-3));
    CHECK((Q - Q_star).norm() < 1e-2 * Q_star.norm());
}

TEST_CASE("lmi solver certifies infeasibility") {
    // X < -I and X > I cannot both hold.
    LmiProgram prog;
    const int v = prog.add_variable(3);
    LmiProgram::Constraint upper;  // X + I < 0
    upper.constant = MatrixXd::Identity(3, 3);
    upper.terms.push_back({v, 0.5 * MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3)});
    prog.add_constraint(std::move(upper));
    LmiProgram::Constraint lower;  // I - X < 0
    lower.constant = MatrixXd::Identity(3, 3);
    lower.terms.push_back({v, -0.5 * MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3)});
    prog.add_constraint(std::move(lower));
    const LmiSolution sol = solve_lmi(prog);
    CHECK(sol.status == LmiStatus::infeasible);
}

TEST_CASE("pure feasibility returns a strictly feasible point") {
    std::mt19937_64 rng(32);
    const MatrixXd A = random_stable_A(5, rng);
    LmiProgram prog;
    const int v = prog.add_variable(5);
    LmiProgram::Constraint lyap;  // A^T X + X A + I < 0
    lyap.constant = MatrixXd::Identity(5, 5);
    lyap.terms.push_back({v, A.transpose(), MatrixXd::Identity(5, 5)});
    prog.add_constraint(std::move(lyap));
    LmiProgram::Constraint pd;
    pd.constant = 1e-6 * MatrixXd::Identity(5, 5);
    pd.terms.push_back({v, -0.5 * MatrixXd::Identity(5, 5), MatrixXd::Identity(5, 5)});
    prog.add_constraint(std::move(pd));
    const LmiSolution sol = solve_lmi(prog);
    REQUIRE((sol.status == LmiStatus::optimal || sol.status == LmiStatus::feasible));
    CHECK(sol.worst_margin < 0.0);
}

TEST_CASE("static gramians on a single-point grid match the LTI gramians") {
    // With one grid point the static LMIs collapse to the classical Lyapunov
    // inequalities; the trace(PQ) optimum reproduces the Hankel structure.
    std::mt19937_64 rng(33);
    const int n = 4;
    LtiSs m = random_stable_ss(n, 1, 1, rng);
    std::vector<MatrixXd> basis{MatrixXd::Zero(n + 1, n + 1)};
    basis[0].topLeftCorner(n, n) = m.A;
    basis[0].topRightCorner(n, 1) = m.B;
    basis[0].bottomLeftCorner(1, n) = m.C;
    const AffineLpvSs model(n, 1, 1, std::move(basis), {});
    const GramianPair g = static_gramians(model, {VectorXd(0)});
    const GramianPair exact = gramians(m);
    const VectorXd hsv_static = balance(g.P, g.Q).hsv;
    const VectorXd hsv_exact = balance(exact.P, exact.Q).hsv;
    for (int i = 0; i < n; ++i)
        CHECK(hsv_static(i) == doctest::Approx(hsv_exact(i)).epsilon(0.05));
}

TEST_CASE("static gramians reject an unstable grid point") {
    std::mt19937_64 rng(34);
    const int n = 3;
    std::vector<MatrixXd> basis(2, MatrixXd::Zero(n + 1, n + 1));
    basis[0].topLeftCorner(n, n) = random_stable_A(n, rng, 0.2);
    basis[0].topRightCorner(n, 1) = VectorXd::Ones(n);
    basis[0].bottomLeftCorner(1, n) = VectorXd::Ones(n).transpose();
    basis[1].topLeftCorner(n, n) = 10.0 * MatrixXd::Identity(n, n);
    const AffineLpvSs model(n, 1, 1, std::move(basis), {{0.0, 1.0}});
    VectorXd bad(1);
    bad << 1.0;
    CHECK_THROWS_AS((void)static_gramians(model, {bad}), GramianInfeasible);
}
