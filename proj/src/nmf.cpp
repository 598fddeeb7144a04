#include "sigclass/nmf.hpp"

#include "sigclass/error.hpp"
#include "sigclass/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sigclass {

namespace {

constexpr double kDenominatorGuard = 1e-12;
constexpr std::uint64_t kInitWStream = 1;
constexpr std::uint64_t kInitHStream = 2;

void fill_uniform(Matrix& m, CounterRng rng, double scale) {
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform_open_closed() * scale;
}

} // namespace

FactorPair::FactorPair(Matrix w, Matrix h, std::vector<double> objective_trace, std::uint64_t seed)
    : w_(std::move(w)), h_(std::move(h)), trace_(std::move(objective_trace)), seed_(seed) {
    if (w_.cols() != h_.rows())
        throw Error(Errc::dimension_mismatch, "W has " + std::to_string(w_.cols()) + " columns but H has " +
                                                  std::to_string(h_.rows()) + " rows");
    if (w_.cols() < 1) throw Error(Errc::invalid_argument, "factor rank must be positive");
    if (w_.cols() > std::min(w_.rows(), h_.cols()))
        throw Error(Errc::rank_too_large, "rank " + std::to_string(w_.cols()) + " exceeds min(n, m)");
    check_nonnegative_finite(w_, "W");
    check_nonnegative_finite(h_, "H");
    if (w_.isZero(0.0)) throw Error(Errc::degenerate_input, "W is identically zero");
}

FactorPair nmf_factorize(const FeatureMatrix& x, int k, std::uint64_t seed, const SolverOptions& opts) {
    const Matrix& X = x.values();
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    if (k < 1) throw Error(Errc::invalid_argument, "rank must be positive");
    if (k > std::min(n, m))
        throw Error(Errc::rank_too_large, "rank " + std::to_string(k) + " exceeds min(n, m) = " +
                                              std::to_string(std::min(n, m)));
    if (opts.max_iter < 1 || opts.check_every < 1 || !(opts.tol >= 0.0))
        throw Error(Errc::invalid_argument, "solver options out of range");
    const double mean = X.mean();
    if (mean <= 0.0) throw Error(Errc::degenerate_input, "input matrix is identically zero");

    const double scale = std::sqrt(mean / k);
    CounterRng rng(seed);
    Matrix W(n, k);
    Matrix H(k, m);
    fill_uniform(W, rng.split(kInitWStream), scale);
    fill_uniform(H, rng.split(kInitHStream), scale);

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(opts.max_iter));
    Matrix numer_h(k, m), denom_h(k, m), numer_w(n, k), denom_w(n, k), gram(k, k), residual(n, m);

    for (int it = 0; it < opts.max_iter; ++it) {
        gram.noalias() = W.transpose() * W;
        numer_h.noalias() = W.transpose() * X;
        denom_h.noalias() = gram * H;
        H = (H.array() * numer_h.array() / (denom_h.array() + kDenominatorGuard)).cwiseMax(0.0);

        gram.noalias() = H * H.transpose();
        numer_w.noalias() = X * H.transpose();
        denom_w.noalias() = W * gram;
        W = (W.array() * numer_w.array() / (denom_w.array() + kDenominatorGuard)).cwiseMax(0.0);

        residual = X;
        residual.noalias() -= W * H;
        const double objective = residual.norm();
        trace.push_back(objective);

        if ((it + 1) % opts.check_every == 0 && trace.size() >= 2) {
            const double prev = trace[trace.size() - 2];
            if (prev == 0.0 || std::abs(prev - objective) / prev < opts.tol) break;
        }
    }
    return FactorPair(std::move(W), std::move(H), std::move(trace), seed);
}

double relative_error(const FeatureMatrix& x, const FactorPair& fp) {
    const Matrix& X = x.values();
    if (fp.W().rows() != X.rows() || fp.H().cols() != X.cols())
        throw Error(Errc::dimension_mismatch, "factor pair shape does not match the feature matrix");
    const double norm = X.norm();
    if (norm == 0.0) throw Error(Errc::degenerate_input, "relative error of a zero matrix is undefined");
    Matrix residual = X;
    residual.noalias() -= fp.W() * fp.H();
    return residual.norm() / norm;
}

} // namespace sigclass
