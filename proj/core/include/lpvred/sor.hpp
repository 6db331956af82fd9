#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lpvred/affine.hpp"
#include "lpvred/lmi.hpp"

namespace lpvred {

/// Raised when a method's applicability preconditions fail (e.g. the
/// extended LFR block is not controllable/observable).
struct NotApplicableError : std::runtime_error {
    explicit NotApplicableError(const std::string& what) : std::runtime_error(what) {}
};

struct SorResult {
    AffineLpvSs reduced;
    MatrixXd V;  // n_x x r_x right projection (state lifting x = V x_hat)
    MatrixXd W;  // n_x x r_x left projection, W^T V = I
    std::string method;
    VectorXd hsv;        // balancing-based methods
    int matched_rank = 0;  // moment matching
};

/// Balanced truncation of the LFR-extended LTI model, latent channels
/// treated as extra inputs/outputs.
SorResult ltibr(const AffineLpvSs& model, int r_x);

/// Balancing from static grid gramians (LMI-based).
SorResult lpvbr(const AffineLpvSs& model, int r_x, const std::vector<VectorXd>& grid,
                const LmiOptions& lmi_opts = {});

/// Moment matching over the extended (n_p+1)-letter alphabet up to word
/// length N. Without r_x the reduced order is the matched-space rank; with
/// r_x the leading singular directions of the matched space are retained.
SorResult moment_match(const AffineLpvSs& model, int N, std::optional<int> r_x = std::nullopt);

/// Parameter-varying oblique projection: local balanced truncations on the
/// grid, Procrustes-aligned, interpolated by affine least squares.
SorResult pvop(const AffineLpvSs& model, int r_x, const std::vector<VectorXd>& grid);

/// Structured (block-diagonal) gramian balancing of the extended LFR block.
/// Throws NotApplicableError when the extended block fails the
/// controllability/observability rank tests or the structured LMIs are
/// infeasible.
SorResult lfrbr(const AffineLpvSs& model, int r_x, const LmiOptions& lmi_opts = {});

}  // namespace lpvred
