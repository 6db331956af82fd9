#include "lpvred/lmi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <sstream>

namespace lpvred {

int LmiProgram::add_variable(int dim) {
    if (dim < 1) throw std::invalid_argument("LmiProgram: variable dim must be >= 1");
    var_dims_.push_back(dim);
    return static_cast<int>(var_dims_.size()) - 1;
}

void LmiProgram::add_constraint(Constraint c) {
    if (c.constant.rows() != c.constant.cols())
        throw std::invalid_argument("LmiProgram: constraint block must be square");
    if (!c.constant.isApprox(c.constant.transpose(), 1e-12))
        throw std::invalid_argument("LmiProgram: constraint constant must be symmetric");
    for (const auto& t : c.terms) {
        if (t.var < 0 || t.var >= num_vars()) throw std::invalid_argument("LmiProgram: bad var index");
        const int d = var_dims_[static_cast<size_t>(t.var)];
        if (t.left.rows() != c.constant.rows() || t.left.cols() != d ||
            t.right.rows() != d || t.right.cols() != c.constant.cols())
            throw std::invalid_argument("LmiProgram: term shape mismatch");
    }
    constraints_.push_back(std::move(c));
}

void LmiProgram::set_objective(std::vector<MatrixXd> per_var_cost) {
    if (static_cast<int>(per_var_cost.size()) != num_vars())
        throw std::invalid_argument("LmiProgram: objective size mismatch");
    objective_ = std::move(per_var_cost);
}

namespace {

// svec layout: for each variable, entries (a,b) with a <= b, column-major walk.
struct Layout {
    std::vector<int> var_offset;
    std::vector<std::vector<std::pair<int, int>>> var_entries;
    int total = 0;
};

Layout make_layout(const std::vector<int>& dims) {
    Layout lay;
    for (int d : dims) {
        lay.var_offset.push_back(lay.total);
        std::vector<std::pair<int, int>> ent;
        for (int b = 0; b < d; ++b)
            for (int a = 0; a <= b; ++a) ent.emplace_back(a, b);
        lay.total += static_cast<int>(ent.size());
        lay.var_entries.push_back(std::move(ent));
    }
    return lay;
}

std::vector<MatrixXd> unpack(const Layout& lay, const std::vector<int>& dims, const VectorXd& theta) {
    std::vector<MatrixXd> X;
    for (size_t k = 0; k < dims.size(); ++k) {
        MatrixXd M = MatrixXd::Zero(dims[k], dims[k]);
        const auto& ent = lay.var_entries[k];
        for (size_t j = 0; j < ent.size(); ++j) {
            const auto [a, b] = ent[j];
            const double v = theta(lay.var_offset[k] + static_cast<int>(j));
            M(a, b) = v;
            M(b, a) = v;
        }
        X.push_back(std::move(M));
    }
    return X;
}

// Precompiled constraint: F(theta) = F0 + sum_j theta_{idx[j]} * Fj[j].
struct CompiledConstraint {
    MatrixXd F0;
    std::vector<int> idx;
    std::vector<MatrixXd> Fj;
    int dim;
};

std::vector<CompiledConstraint> compile(const LmiProgram& prog, const Layout& lay) {
    std::vector<CompiledConstraint> out;
    for (const auto& con : prog.constraints()) {
        CompiledConstraint cc;
        cc.F0 = con.constant;
        cc.dim = static_cast<int>(con.constant.rows());
        // Group terms by variable, then expand over svec basis entries.
        for (int k = 0; k < prog.num_vars(); ++k) {
            std::vector<const LmiProgram::Term*> terms;
            for (const auto& t : con.terms)
                if (t.var == k) terms.push_back(&t);
            if (terms.empty()) continue;
            const auto& ent = lay.var_entries[static_cast<size_t>(k)];
            for (size_t j = 0; j < ent.size(); ++j) {
                const auto [a, b] = ent[j];
                MatrixXd F = MatrixXd::Zero(cc.dim, cc.dim);
                for (const auto* t : terms) {
                    // E_ab = e_a e_b^T (+ e_b e_a^T when a != b)
                    MatrixXd contrib = t->left.col(a) * t->right.row(b);
                    if (a != b) contrib += t->left.col(b) * t->right.row(a);
                    F += contrib + contrib.transpose();
                }
                if (F.cwiseAbs().maxCoeff() == 0.0) continue;
                cc.idx.push_back(lay.var_offset[static_cast<size_t>(k)] + static_cast<int>(j));
                cc.Fj.push_back(std::move(F));
            }
        }
        out.push_back(std::move(cc));
    }
    return out;
}

MatrixXd eval_constraint(const CompiledConstraint& cc, const VectorXd& theta) {
    MatrixXd F = cc.F0;
    for (size_t j = 0; j < cc.idx.size(); ++j) F += theta(cc.idx[j]) * cc.Fj[j];
    return F;
}

bool strictly_feasible(const std::vector<CompiledConstraint>& ccs, const VectorXd& theta) {
    for (const auto& cc : ccs) {
        Eigen::LLT<MatrixXd> llt(-eval_constraint(cc, theta));
        if (llt.info() != Eigen::Success) return false;
    }
    return true;
}

double barrier_value(const std::vector<CompiledConstraint>& ccs, const VectorXd& theta, bool* ok) {
    double phi = 0.0;
    *ok = true;
    for (const auto& cc : ccs) {
        Eigen::LLT<MatrixXd> llt(-eval_constraint(cc, theta));
        if (llt.info() != Eigen::Success) {
            *ok = false;
            return 0.0;
        }
        const MatrixXd& Lm = llt.matrixLLT();
        for (int i = 0; i < cc.dim; ++i) phi -= 2.0 * std::log(Lm(i, i));
    }
    return phi;
}

// Newton minimization of t * c^T theta + barrier(theta) from a strictly
// feasible start. Returns final theta. `stop_when` (optional) aborts the
// descent as soon as the current iterate satisfies it — used by phase I,
// whose feasible set is typically unbounded so that full centering would
// drift the variables to an arbitrarily large scale.
VectorXd newton_centering(const std::vector<CompiledConstraint>& ccs, const VectorXd& cvec,
                          double t, VectorXd theta, const LmiOptions& opts, int* iters_used,
                          const std::function<bool(const VectorXd&)>& stop_when = {}) {
    const int n = static_cast<int>(theta.size());
    for (int it = 0; it < opts.max_newton; ++it) {
        if (stop_when && stop_when(theta)) {
            if (iters_used) *iters_used = it;
            return theta;
        }
        VectorXd grad = t * cvec;
        MatrixXd hess = MatrixXd::Zero(n, n);
        for (const auto& cc : ccs) {
            const MatrixXd S = -eval_constraint(cc, theta);
            Eigen::LLT<MatrixXd> llt(S);
            MatrixXd Sinv = llt.solve(MatrixXd::Identity(cc.dim, cc.dim));
            const size_t m = cc.idx.size();
            std::vector<MatrixXd> M(m);
            for (size_t j = 0; j < m; ++j) {
                M[j] = Sinv * cc.Fj[j];
                grad(cc.idx[j]) += M[j].trace();
            }
            for (size_t j = 0; j < m; ++j)
                for (size_t l = j; l < m; ++l) {
                    const double h = M[j].cwiseProduct(M[l].transpose()).sum();
                    hess(cc.idx[j], cc.idx[l]) += h;
                    if (l != j) hess(cc.idx[l], cc.idx[j]) += h;
                }
        }
        hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<MatrixXd> ldlt(hess);
        VectorXd dx = ldlt.solve(-grad);
        const double decrement = -0.5 * grad.dot(dx);
        if (!(decrement > 0) || decrement < opts.newton_tol) {
            if (iters_used) *iters_used = it;
            return theta;
        }
        bool ok = false;
        double f0 = t * cvec.dot(theta) + barrier_value(ccs, theta, &ok);
        double alpha = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
            VectorXd cand = theta + alpha * dx;
            bool cok = false;
            double fc = t * cvec.dot(cand) + barrier_value(ccs, cand, &cok);
            if (cok && fc <= f0 - 1e-4 * alpha * (-grad.dot(dx))) {
                theta = cand;
                break;
            }
            alpha *= 0.5;
            if (ls == 59) {
                if (iters_used) *iters_used = it;
                return theta;  // line search stalled
            }
        }
    }
    if (iters_used) *iters_used = opts.max_newton;
    return theta;
}

VectorXd pack_objective(const LmiProgram& prog, const Layout& lay) {
    VectorXd c = VectorXd::Zero(lay.total);
    if (prog.objective().empty()) return c;
    for (int k = 0; k < prog.num_vars(); ++k) {
        const MatrixXd& C = prog.objective()[static_cast<size_t>(k)];
        const auto& ent = lay.var_entries[static_cast<size_t>(k)];
        for (size_t j = 0; j < ent.size(); ++j) {
            const auto [a, b] = ent[j];
            // trace(C X): entry (a,b) of X with a<b appears twice
            c(lay.var_offset[static_cast<size_t>(k)] + static_cast<int>(j)) =
                (a == b) ? C(a, a) : C(a, b) + C(b, a);
        }
    }
    return c;
}

}  // namespace

LmiSolution solve_lmi(const LmiProgram& prog, const LmiOptions& opts) {
    const Layout lay = make_layout(prog.var_dims());
    auto ccs = compile(prog, lay);
    LmiSolution sol;

    int total_dim = 0;
    for (const auto& cc : ccs) total_dim += cc.dim;
    if (total_dim == 0) {
        sol.status = prog.objective().empty() ? LmiStatus::feasible : LmiStatus::optimal;
        sol.vars = unpack(lay, prog.var_dims(), VectorXd::Zero(lay.total));
        return sol;
    }

    // Phase I: minimize slack s with F_c(theta) - s I < 0.
    VectorXd theta = VectorXd::Zero(lay.total);
    if (!strictly_feasible(ccs, theta)) {
        std::vector<CompiledConstraint> ccs1 = ccs;
        const int s_idx = lay.total;
        double s0 = 0.0;
        for (auto& cc : ccs1) {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(eval_constraint(cc, theta));
            s0 = std::max(s0, es.eigenvalues().maxCoeff());
            cc.idx.push_back(s_idx);
            cc.Fj.push_back(-MatrixXd::Identity(cc.dim, cc.dim));
        }
        VectorXd th1(lay.total + 1);
        th1 << theta, 2.0 * s0 + 1.0;
        VectorXd c1 = VectorXd::Zero(lay.total + 1);
        c1(s_idx) = 1.0;
        double t = 1.0;
        // Stop as soon as the original constraints hold strictly: the phase-I
        // feasible set is unbounded in s and usually in theta as well, so full
        // centering would drift the iterate to an arbitrarily large scale.
        auto good_enough = [&](const VectorXd& cand) {
            return cand(s_idx) < -opts.feas_eps && strictly_feasible(ccs, cand.head(lay.total));
        };
        for (int stage = 0; stage < 40; ++stage) {
            th1 = newton_centering(ccs1, c1, t, th1, opts, nullptr, good_enough);
            if (good_enough(th1)) break;
            if (th1(s_idx) < -opts.feas_eps) break;
            if (static_cast<double>(total_dim + 1) / t < 0.1 * opts.feas_eps + 1e-12 &&
                th1(s_idx) >= -opts.feas_eps)
                break;
            t *= opts.mu_factor;
        }
        if (th1(s_idx) >= 0.0) {
            sol.status = LmiStatus::infeasible;
            sol.vars = unpack(lay, prog.var_dims(), th1.head(lay.total));
            return sol;
        }
        theta = th1.head(lay.total);
        // Guard: phase-I slack may sit exactly on the boundary of some block.
        if (!strictly_feasible(ccs, theta)) {
            sol.status = LmiStatus::infeasible;
            sol.vars = unpack(lay, prog.var_dims(), theta);
            return sol;
        }
    }

    const VectorXd cvec = pack_objective(prog, lay);
    if (cvec.cwiseAbs().maxCoeff() == 0.0) {
        // Pure feasibility; a few centering steps improve the margin, but the
        // analytic center may not exist (unbounded set), so cap the work.
        LmiOptions capped = opts;
        capped.max_newton = std::min(capped.max_newton, 50);
        theta = newton_centering(ccs, cvec, 1.0, theta, capped, nullptr);
        sol.status = LmiStatus::feasible;
    } else {
        double t = 1.0 / std::max(1.0, cvec.cwiseAbs().maxCoeff());
        bool converged = false;
        double prev_obj = std::numeric_limits<double>::infinity();
        for (int stage = 0; stage < 80; ++stage) {
            theta = newton_centering(ccs, cvec, t, theta, opts, nullptr);
            const double gap = static_cast<double>(total_dim) / t;
            const double obj = cvec.dot(theta);
            const double scale = std::max(1.0, std::abs(obj));
            // Require both a small duality gap and objective stagnation across
            // stages; the gap test alone passes spuriously when the start
            // point has a huge objective value.
            if (gap < opts.gap_tol * scale && std::abs(obj - prev_obj) <= opts.gap_tol * scale) {
                converged = true;
                break;
            }
            prev_obj = obj;
            t *= opts.mu_factor;
        }
        sol.status = converged ? LmiStatus::optimal : LmiStatus::max_iter;
    }

    sol.vars = unpack(lay, prog.var_dims(), theta);
    sol.objective = cvec.dot(theta);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& cc : ccs) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(eval_constraint(cc, theta));
        worst = std::max(worst, es.eigenvalues().maxCoeff());
    }
    sol.worst_margin = worst;
    return sol;
}

namespace {

// One-sided static gramian program: sym(Amap(p) X) + Wmap(p) + eps I < 0 for
// all grid p, together with X > pd_eps I.
LmiProgram gramian_program(const std::vector<MatrixXd>& Amats, const std::vector<MatrixXd>& Wmats,
                           double eps, double pd_eps) {
    LmiProgram prog;
    const int n = static_cast<int>(Amats.front().rows());
    const int v = prog.add_variable(n);
    for (size_t g = 0; g < Amats.size(); ++g) {
        LmiProgram::Constraint con;
        con.constant = 0.5 * (Wmats[g] + Wmats[g].transpose()) + eps * MatrixXd::Identity(n, n);
        con.terms.push_back({v, Amats[g], MatrixXd::Identity(n, n)});
        prog.add_constraint(std::move(con));
    }
    LmiProgram::Constraint pd;
    pd.constant = pd_eps * MatrixXd::Identity(n, n);
    pd.terms.push_back({v, -0.5 * MatrixXd::Identity(n, n), MatrixXd::Identity(n, n)});
    prog.add_constraint(std::move(pd));
    return prog;
}

}  // namespace

GramianPair static_gramians(const AffineLpvSs& model, const std::vector<VectorXd>& grid,
                            const LmiOptions& opts) {
    if (grid.empty()) throw std::invalid_argument("static_gramians: empty grid");
    const int n = model.n_x();

    std::vector<MatrixXd> Ap, Wp, At, Wq;
    double a_scale = 0.0;
    for (const auto& p : grid) {
        const LtiSs frozen = model.eval(p);
        if (!is_hurwitz(frozen.A).hurwitz) {
            std::ostringstream os;
            os << "static_gramians: frozen A(p) not Hurwitz at p = [" << p.transpose() << "]";
            throw GramianInfeasible(os.str());
        }
        a_scale = std::max(a_scale, frozen.A.cwiseAbs().maxCoeff());
        Ap.push_back(frozen.A);
        Wp.push_back(frozen.B * frozen.B.transpose());
        At.push_back(frozen.A.transpose());
        Wq.push_back(frozen.C.transpose() * frozen.C);
    }
    const double eps = 1e-8 * std::max(1.0, a_scale);
    const double pd_eps = 1e-6;

    auto solve_side = [&](const std::vector<MatrixXd>& As, const std::vector<MatrixXd>& Ws,
                          const MatrixXd& cost, const char* side) {
        LmiProgram prog = gramian_program(As, Ws, eps, pd_eps);
        // A semidefinite cost leaves the minimizer unbounded along its null
        // directions; a small ridge keeps every direction weakly penalized.
        const double ridge = 1e-6 * std::max(1.0, cost.cwiseAbs().maxCoeff());
        prog.set_objective({cost + ridge * MatrixXd::Identity(n, n)});
        LmiSolution s = solve_lmi(prog, opts);
        if (s.status == LmiStatus::infeasible) {
            std::ostringstream os;
            os << "static_gramians: " << side << " LMI family infeasible on the grid";
            throw GramianInfeasible(os.str());
        }
        return s.vars[0];
    };

    // Convex surrogate initialization: min trace(P), min trace(Q).
    MatrixXd P = solve_side(Ap, Wp, MatrixXd::Identity(n, n), "controllability");
    MatrixXd Q = solve_side(At, Wq, MatrixXd::Identity(n, n), "observability");

    // Cone-complementarity linearization of trace(PQ); the two linearized
    // SDPs decouple per iterate.
    double prev = (P * Q).trace();
    for (int it = 0; it < 20; ++it) {
        P = solve_side(Ap, Wp, Q, "controllability");
        Q = solve_side(At, Wq, P, "observability");
        const double cur = (P * Q).trace();
        if (std::abs(prev - cur) < 1e-4 * std::max(1.0, std::abs(prev))) break;
        prev = cur;
    }

    // The product objective is insensitive to the small Hankel directions, so
    // the CCL iterate can leave them far above their feasible floor, which
    // ruins the truncation quality downstream. Tighten all eigenvalues with a
    // few inverse-weighted (log-det descent) passes.
    auto inv_weight = [n](const MatrixXd& X) {
        const MatrixXd Xs = 0.5 * (X + X.transpose());
        const double delta = 1e-9 * std::max(1.0, Xs.trace());
        Eigen::LDLT<MatrixXd> ldlt(Xs + delta * MatrixXd::Identity(n, n));
        MatrixXd Wm = ldlt.solve(MatrixXd::Identity(n, n));
        return MatrixXd(0.5 * (Wm + Wm.transpose()));
    };
    for (int it = 0; it < 10; ++it) {
        const MatrixXd Pn = solve_side(Ap, Wp, inv_weight(P), "controllability");
        const MatrixXd Qn = solve_side(At, Wq, inv_weight(Q), "observability");
        const double dp = (Pn - P).norm() / std::max(1.0, P.norm());
        const double dq = (Qn - Q).norm() / std::max(1.0, Q.norm());
        P = Pn;
        Q = Qn;
        if (dp < 1e-3 && dq < 1e-3) break;
    }
    return {0.5 * (P + P.transpose()), 0.5 * (Q + Q.transpose())};
}

}  // namespace lpvred
