#pragma once

#include <string>
#include <vector>

#include "lpvred/affine.hpp"
#include "lpvred/numerics.hpp"

namespace lpvred {

/// Small dense LMI program: symmetric matrix variables X_k, constraints that
/// are affine in the variables and required negative definite, and an
/// optional linear objective sum_k trace(Cobj_k X_k).
///
/// Each term contributes L X_k R + R^T X_k L^T to its constraint block, so
/// every constraint is symmetric by construction.
class LmiProgram {
  public:
    struct Term {
        int var;
        MatrixXd left;
        MatrixXd right;
    };
    struct Constraint {
        MatrixXd constant;
        std::vector<Term> terms;
    };

    int add_variable(int dim);
    void add_constraint(Constraint c);
    void set_objective(std::vector<MatrixXd> per_var_cost);

    int num_vars() const { return static_cast<int>(var_dims_.size()); }
    const std::vector<int>& var_dims() const { return var_dims_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<MatrixXd>& objective() const { return objective_; }

  private:
    std::vector<int> var_dims_;
    std::vector<Constraint> constraints_;
    std::vector<MatrixXd> objective_;
};

enum class LmiStatus { optimal, feasible, infeasible, max_iter };

struct LmiSolution {
    LmiStatus status = LmiStatus::max_iter;
    std::vector<MatrixXd> vars;
    double objective = 0.0;
    double worst_margin = 0.0;  // max over constraints of lambda_max(F_c)
};

struct LmiOptions {
    double mu_factor = 10.0;
    double gap_tol = 1e-6;
    double newton_tol = 1e-9;
    int max_newton = 400;
    double feas_eps = 1e-9;  // phase-I target slack, scaled by constraint size
};

/// Log-det barrier interior-point solve. Phase I minimizes the max-eigenvalue
/// slack to find a strictly feasible start; phase II follows the central path.
LmiSolution solve_lmi(const LmiProgram& prog, const LmiOptions& opts = {});

struct GramianInfeasible : std::runtime_error {
    explicit GramianInfeasible(const std::string& what) : std::runtime_error(what) {}
};

/// Static (p-independent) gramians over a scheduling grid: both Lyapunov LMI
/// families hold at every grid point. The bilinear trace(PQ) objective is
/// handled by cone-complementarity linearization, initialized from the convex
/// min trace(P+Q) surrogate.
GramianPair static_gramians(const AffineLpvSs& model, const std::vector<VectorXd>& grid,
                            const LmiOptions& opts = {});

}  // namespace lpvred
