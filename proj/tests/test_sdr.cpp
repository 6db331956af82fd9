#include <doctest.h>

#include <random>

#include "lpvred/lfr.hpp"
#include "lpvred/numerics.hpp"
#include "lpvred/sdr.hpp"
#include "lpvred/sim.hpp"
#include "test_util.hpp"

using namespace lpvred;
using namespace lpvred::testutil;

namespace {

SchedulingData synthetic_data(const AffineLpvSs& model, int N, std::mt19937_64& rng,
                              int latent_rank = 0) {
    const int np = model.n_p();
    Trajectory traj;
    if (latent_rank > 0) {
        // p lives on an affine subspace of dimension latent_rank plus noise.
        const MatrixXd M = random_matrix(np, latent_rank, rng);
        traj.p = M * random_matrix(latent_rank, N, rng) + 0.01 * random_matrix(np, N, rng);
    } else {
        traj.p = random_matrix(np, N, rng);
    }
    return collect_scheduling(traj, model);
}

}  // namespace

TEST_CASE("pca reconstruction error equals the discarded spectrum") {
    std::mt19937_64 rng(51);
    const AffineLpvSs model = random_stable_affine(4, 1, 1, 5, rng);
    const SchedulingData data = synthetic_data(model, 300, rng);
    Eigen::BDCSVD<MatrixXd> svd(data.gamma, Eigen::ComputeThinU);
    for (int n_phi = 1; n_phi <= 4; ++n_phi) {
        const SdrResult res = pca_reduce(data, model, n_phi);
        double recon = 0.0;
        for (int k = 0; k < data.n_samples(); ++k) {
            const VectorXd p = data.p_raw.col(k);
            const VectorXd back = (*res.mu_inv)(res.mu(p));
            recon += (data.normalize(p) - data.normalize(back)).squaredNorm();
        }
        CHECK(recon == doctest::Approx(res.diagnostics.at("discarded_energy")).epsilon(1e-9));
        double tail = 0.0;
        for (int i = n_phi; i < svd.singularValues().size(); ++i)
            tail += svd.singularValues()(i) * svd.singularValues()(i);
        CHECK(res.diagnostics.at("discarded_energy") == doctest::Approx(tail).epsilon(1e-12));
    }
}

TEST_CASE("pca and tpca at full dimension reproduce frozen responses") {
    std::mt19937_64 rng(52);
    const AffineLpvSs model = random_stable_affine(4, 1, 1, 3, rng, 0.4);
    const SchedulingData data = synthetic_data(model, 200, rng);
    std::vector<VectorXd> grid;
    for (int k = 0; k < 5; ++k) grid.push_back(random_matrix(3, 1, rng, 0.8));
    double scale = 1.0;
    for (const auto& p : grid) scale = std::max(scale, h2_norm(model.eval(p)));
    for (const SdrResult& res : {pca_reduce(data, model, 3), tpca_reduce(data, model, 3)}) {
        const SchedulingCoder mu = res.mu;
        const MetricReport rep =
            local_errors(model, res.reduced, grid, [&](const VectorXd& p) { return mu(p); },
                         {true, false});
        CHECK(rep.max2 < 1e-9 * scale);  // relative: the model norm sets the floor
    }
}

TEST_CASE("encoder/decoder round trip is exact on a low-dimensional subspace") {
    std::mt19937_64 rng(53);
    const AffineLpvSs model = random_stable_affine(3, 1, 1, 4, rng);
    Trajectory traj;
    const MatrixXd M = random_matrix(4, 2, rng);
    traj.p = M * random_matrix(2, 250, rng);  // exactly rank 2, no noise
    const SchedulingData data = collect_scheduling(traj, model);
    const SdrResult res = pca_reduce(data, model, 2);
    for (int k = 0; k < 5; ++k) {
        const VectorXd p = traj.p.col(k * 40);
        CHECK(((*res.mu_inv)(res.mu(p)) - p).norm() < 1e-9 * std::max(1.0, p.norm()));
    }
}

TEST_CASE("fit residual is nonincreasing for nested pca encoders") {
    std::mt19937_64 rng(54);
    const AffineLpvSs model = random_stable_affine(4, 1, 1, 4, rng);
    const SchedulingData data = synthetic_data(model, 300, rng, 2);
    double prev = std::numeric_limits<double>::infinity();
    for (int n_phi = 1; n_phi <= 4; ++n_phi) {
        const SdrResult pca = pca_reduce(data, model, n_phi);
        MatrixXd phi(n_phi, data.n_samples());
        for (int k = 0; k < data.n_samples(); ++k) phi.col(k) = pca.mu(data.p_raw.col(k));
        std::vector<std::pair<double, double>> pb(static_cast<size_t>(n_phi), {-10.0, 10.0});
        const FitResult fit = fit_reduced_matrices(model, phi, data.p_raw, pb);
        CHECK(fit.residual <= prev * (1.0 + 1e-9) + 1e-12);
        prev = fit.residual;
    }
}

TEST_CASE("degree-1 kpca scores correlate with linear pca scores") {
    std::mt19937_64 rng(55);
    const AffineLpvSs model = random_stable_affine(3, 1, 1, 3, rng);
    const SchedulingData data = synthetic_data(model, 200, rng);
    KpcaOptions opts;
    opts.degree = 1.0;
    const SdrResult kp = kpca_reduce(data, model, 2, opts);
    const SdrResult lp = pca_reduce(data, model, 2);
    MatrixXd sk(2, data.n_samples()), sl(2, data.n_samples());
    for (int k = 0; k < data.n_samples(); ++k) {
        sk.col(k) = kp.mu(data.p_raw.col(k));
        sl.col(k) = lp.mu(data.p_raw.col(k));
    }
    for (int c = 0; c < 2; ++c) {
        const VectorXd a = sk.row(c).transpose().array() - sk.row(c).mean();
        const VectorXd b = sl.row(c).transpose().array() - sl.row(c).mean();
        const double corr = std::abs(a.dot(b)) / (a.norm() * b.norm());
        CHECK(corr > 1.0 - 1e-6);
    }
}

TEST_CASE("sdrbr removes a redundant scheduling channel exactly") {
    // Two scheduling variables enter through identical rank-1 channels driven
    // by the same signal: one latent direction carries everything.
    std::mt19937_64 rng(56);
    const int n = 4;
    std::vector<MatrixXd> basis(3, MatrixXd::Zero(n + 1, n + 1));
    basis[0].topLeftCorner(n, n) = random_stable_A(n, rng);
    basis[0].topRightCorner(n, 1) = VectorXd::Ones(n);
    basis[0].bottomLeftCorner(1, n) = VectorXd::Ones(n).transpose();
    const MatrixXd channel = 0.1 * random_matrix(n, 1, rng) * random_matrix(1, n, rng);
    basis[1].topLeftCorner(n, n) = channel;
    basis[2].topLeftCorner(n, n) = channel;
    const AffineLpvSs model(n, 1, 1, std::move(basis), {{-1.0, 1.0}, {-1.0, 1.0}});

    const SdrResult res = sdrbr_reduce(model, 1);
    std::vector<VectorXd> grid;
    for (int k = 0; k < 5; ++k) {
        VectorXd p(2);
        const double v = -1.0 + 0.5 * k;
        p << v, v;  // identical driving signal
        grid.push_back(p);
    }
    // Compare frozen frequency responses directly: a sampled gain difference
    // avoids the tolerance floor of the H-infinity bisection.
    for (const auto& p : grid) {
        const LtiSs full = model.eval(p);
        const LtiSs red = res.reduced.eval(res.mu(p));
        for (double w : {0.0, 0.1, 1.0, 10.0}) {
            const double diff = (full.freq_response(w) - red.freq_response(w)).norm();
            CHECK(diff < 1e-9);
        }
    }
}

TEST_CASE("sdr methods at full latent dimension are the identity") {
    std::mt19937_64 rng(57);
    const AffineLpvSs model = random_stable_affine(3, 1, 1, 2, rng);
    const SchedulingData data = synthetic_data(model, 100, rng);
    // sdrbr counts latent channels, not scheduling variables: full dimension
    // for it is the total rank of the basis directions.
    const int nz = to_lfr(model).n_z();
    for (const SdrResult& res :
         {kpca_reduce(data, model, 2), sdrbr_reduce(model, nz), ae_reduce(data, model, 2),
          dnn_reduce(data, model, 2)}) {
        CHECK(res.diagnostics.count("identity") == 1);
        const VectorXd p = random_matrix(2, 1, rng);
        CHECK((res.mu(p) - p).norm() < 1e-12);
    }
}

TEST_CASE("ae and dnn training is deterministic") {
    std::mt19937_64 rng(58);
    const AffineLpvSs model = random_stable_affine(3, 1, 1, 3, rng);
    const SchedulingData data = synthetic_data(model, 150, rng, 2);
    NnOptions opts;
    opts.train.max_epochs = 300;
    const SdrResult a1 = ae_reduce(data, model, 1, opts);
    const SdrResult a2 = ae_reduce(data, model, 1, opts);
    CHECK(a1.diagnostics.at("train_loss") == a2.diagnostics.at("train_loss"));
    for (int i = 0; i <= 1; ++i)
        CHECK((a1.reduced.basis(i) - a2.reduced.basis(i)).norm() == 0.0);
    const SdrResult d1 = dnn_reduce(data, model, 1, opts);
    const SdrResult d2 = dnn_reduce(data, model, 1, opts);
    CHECK(d1.diagnostics.at("train_loss") == d2.diagnostics.at("train_loss"));
    for (int i = 0; i <= 1; ++i)
        CHECK((d1.reduced.basis(i) - d2.reduced.basis(i)).norm() == 0.0);
}
