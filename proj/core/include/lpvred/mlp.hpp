#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace lpvred {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Fully connected feed-forward network. Per-layer activation is either
/// tanh or identity; the output layer is identity by convention.
class Mlp {
  public:
    enum class Act { tanh, identity };

    Mlp() = default;
    /// widths = {n_in, h_1, ..., n_out}; acts has widths.size()-1 entries.
    Mlp(std::vector<int> widths, std::vector<Act> acts, std::uint64_t seed);

    VectorXd forward(const VectorXd& x) const;
    MatrixXd forward_batch(const MatrixXd& X) const;  // columns are samples

    /// Forward up to (and including) layer `upto` (0-based); used to read an
    /// embedded encoder output.
    MatrixXd forward_partial(const MatrixXd& X, int upto) const;

    int n_layers() const { return static_cast<int>(weights_.size()); }
    int n_in() const { return widths_.front(); }
    int n_out() const { return widths_.back(); }
    const std::vector<int>& widths() const { return widths_; }

    std::vector<MatrixXd>& weights() { return weights_; }
    std::vector<VectorXd>& biases() { return biases_; }
    const std::vector<MatrixXd>& weights() const { return weights_; }
    const std::vector<VectorXd>& biases() const { return biases_; }
    const std::vector<Act>& acts() const { return acts_; }

  private:
    std::vector<int> widths_;
    std::vector<Act> acts_;
    std::vector<MatrixXd> weights_;
    std::vector<VectorXd> biases_;
};

struct TrainOptions {
    int max_epochs = 5000;
    double learning_rate = 1e-3;
    double plateau_rel_tol = 1e-7;
    int plateau_epochs = 200;
    std::uint64_t seed = 1;  // also used for init when the net is built by callers
};

struct TrainReport {
    std::vector<double> loss_curve;
    double final_loss = 0.0;
    bool diverged = false;
};

/// Full-batch Adam on mean squared error. Deterministic given the options.
/// Throws std::runtime_error on non-finite loss.
TrainReport train_mlp(Mlp& net, const MatrixXd& inputs, const MatrixXd& targets,
                      const TrainOptions& opts = {});

}  // namespace lpvred
