#pragma once

#include "sigclass/matrix.hpp"

#include <cstdint>
#include <vector>

namespace sigclass {

struct SolverOptions {
    double tol = 1e-6;   // relative objective change that counts as converged
    int max_iter = 1000;
    int check_every = 10;

    bool operator==(const SolverOptions&) const = default;
};

/// One NMF solution X ~ W * H. Columns of W are latent signatures, rows of
/// H are their per-sample activities.
class FactorPair {
public:
    FactorPair(Matrix w, Matrix h, std::vector<double> objective_trace, std::uint64_t seed);

    const Matrix& W() const noexcept { return w_; }
    const Matrix& H() const noexcept { return h_; }
    Eigen::Index rank() const noexcept { return w_.cols(); }
    /// Frobenius residual ||X - WH||_F after each iteration.
    const std::vector<double>& objective_trace() const noexcept { return trace_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    Matrix w_;
    Matrix h_;
    std::vector<double> trace_;
    std::uint64_t seed_;
};

/// Lee-Seung multiplicative updates for the Frobenius objective.
///
/// W and H start uniform on (0, 1] scaled by sqrt(mean(X)/k), drawn from
/// substreams of `seed`. Every 10th iteration the relative change of the
/// objective is compared against opts.tol. Denominators carry a 1e-12 guard
/// and updated entries are clamped at zero, so outputs are exactly
/// nonnegative. Deterministic in (X, k, seed, opts).
FactorPair nmf_factorize(const FeatureMatrix& x, int k, std::uint64_t seed, const SolverOptions& opts = {});

/// ||X - WH||_F / ||X||_F.
double relative_error(const FeatureMatrix& x, const FactorPair& fp);

} // namespace sigclass
