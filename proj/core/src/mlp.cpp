#include "lpvred/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lpvred {

Mlp::Mlp(std::vector<int> widths, std::vector<Act> acts, std::uint64_t seed)
    : widths_(std::move(widths)), acts_(std::move(acts)) {
    if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output layer");
    if (acts_.size() != widths_.size() - 1) throw std::invalid_argument("Mlp: acts size mismatch");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (size_t l = 0; l + 1 < widths_.size(); ++l) {
        const int fan_in = widths_[l], fan_out = widths_[l + 1];
        const double scale = std::sqrt(2.0 / (fan_in + fan_out));
        MatrixXd W(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) W(i, j) = scale * dist(rng);
        weights_.push_back(std::move(W));
        biases_.push_back(VectorXd::Zero(fan_out));
    }
}

namespace {
inline MatrixXd apply_act(const MatrixXd& Z, Mlp::Act a) {
    return a == Mlp::Act::tanh ? Z.array().tanh().matrix() : Z;
}
}  // namespace

MatrixXd Mlp::forward_batch(const MatrixXd& X) const {
    MatrixXd H = X;
    for (int l = 0; l < n_layers(); ++l)
        H = apply_act((weights_[static_cast<size_t>(l)] * H).colwise() + biases_[static_cast<size_t>(l)],
                      acts_[static_cast<size_t>(l)]);
    return H;
}

MatrixXd Mlp::forward_partial(const MatrixXd& X, int upto) const {
    MatrixXd H = X;
    for (int l = 0; l <= upto; ++l)
        H = apply_act((weights_[static_cast<size_t>(l)] * H).colwise() + biases_[static_cast<size_t>(l)],
                      acts_[static_cast<size_t>(l)]);
    return H;
}

VectorXd Mlp::forward(const VectorXd& x) const { return forward_batch(x); }

TrainReport train_mlp(Mlp& net, const MatrixXd& inputs, const MatrixXd& targets,
                      const TrainOptions& opts) {
    if (inputs.cols() != targets.cols()) throw std::invalid_argument("train_mlp: sample count mismatch");
    if (!inputs.allFinite() || !targets.allFinite())
        throw std::invalid_argument("train_mlp: non-finite data");
    const int L = net.n_layers();
    const int N = static_cast<int>(inputs.cols());
    const double inv_n = 1.0 / (N * net.n_out());

    std::vector<MatrixXd> mW(static_cast<size_t>(L)), vW(static_cast<size_t>(L));
    std::vector<VectorXd> mB(static_cast<size_t>(L)), vB(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) {
        mW[static_cast<size_t>(l)] = MatrixXd::Zero(net.weights()[static_cast<size_t>(l)].rows(),
                                                    net.weights()[static_cast<size_t>(l)].cols());
        vW[static_cast<size_t>(l)] = mW[static_cast<size_t>(l)];
        mB[static_cast<size_t>(l)] = VectorXd::Zero(net.biases()[static_cast<size_t>(l)].size());
        vB[static_cast<size_t>(l)] = mB[static_cast<size_t>(l)];
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    TrainReport rep;
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    std::vector<MatrixXd> pre(static_cast<size_t>(L)), post(static_cast<size_t>(L) + 1);
    for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
        // Forward pass keeping activations.
        post[0] = inputs;
        for (int l = 0; l < L; ++l) {
            pre[static_cast<size_t>(l)] =
                (net.weights()[static_cast<size_t>(l)] * post[static_cast<size_t>(l)]).colwise() +
                net.biases()[static_cast<size_t>(l)];
            post[static_cast<size_t>(l) + 1] =
                apply_act(pre[static_cast<size_t>(l)], net.acts()[static_cast<size_t>(l)]);
        }
        MatrixXd err = post[static_cast<size_t>(L)] - targets;
        const double loss = inv_n * err.squaredNorm();
        if (!std::isfinite(loss)) {
            rep.diverged = true;
            throw std::runtime_error("train_mlp: loss diverged");
        }
        rep.loss_curve.push_back(loss);
        if (loss < best * (1.0 - opts.plateau_rel_tol)) {
            best = loss;
            best_epoch = epoch;
        } else if (epoch - best_epoch >= opts.plateau_epochs) {
            break;
        }

        // Backward pass.
        MatrixXd delta = 2.0 * inv_n * err;
        const double t = epoch + 1;
        const double corr = std::sqrt(1.0 - std::pow(b2, t)) / (1.0 - std::pow(b1, t));
        for (int l = L - 1; l >= 0; --l) {
            if (net.acts()[static_cast<size_t>(l)] == Mlp::Act::tanh)
                delta = delta.cwiseProduct(
                    (1.0 - post[static_cast<size_t>(l) + 1].array().square()).matrix());
            MatrixXd gW = delta * post[static_cast<size_t>(l)].transpose();
            VectorXd gB = delta.rowwise().sum();
            if (l > 0) delta = net.weights()[static_cast<size_t>(l)].transpose() * delta;

            auto& mw = mW[static_cast<size_t>(l)];
            auto& vw = vW[static_cast<size_t>(l)];
            mw = b1 * mw + (1 - b1) * gW;
            vw = b2 * vw.array().matrix() + (1 - b2) * gW.cwiseProduct(gW);
            net.weights()[static_cast<size_t>(l)] -=
                opts.learning_rate * corr *
                mw.cwiseQuotient((vw.cwiseSqrt().array() + eps).matrix());

            auto& mb = mB[static_cast<size_t>(l)];
            auto& vb = vB[static_cast<size_t>(l)];
            mb = b1 * mb + (1 - b1) * gB;
            vb = b2 * vb + (1 - b2) * gB.cwiseProduct(gB);
            net.biases()[static_cast<size_t>(l)] -=
                opts.learning_rate * corr *
                mb.cwiseQuotient((vb.cwiseSqrt().array() + eps).matrix());
        }
    }
    rep.final_loss = rep.loss_curve.empty() ? 0.0 : rep.loss_curve.back();
    return rep;
}

}  // namespace lpvred
