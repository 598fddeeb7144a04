#pragma once

#include "sigclass/matrix.hpp"

namespace sigclass {

struct NnlsOptions {
    /// Dual-feasibility tolerance, relative to ||A^T b||_inf.
    double kkt_tol = 1e-8;
    /// Outer-iteration cap; 0 selects 30 * p.
    int max_iter = 0;
};

/// Lawson-Hanson active-set solver for min ||A h - b||_2 subject to h >= 0.
/// A must have no zero-norm columns. The result is exactly nonnegative.
Vector nnls_solve(const Matrix& a, const Vector& b, const NnlsOptions& opts = {});

/// Largest KKT violation of h for the problem (A, b), relative to
/// max(||A^T b||_inf, tiny). Zero means h is optimal.
double nnls_kkt_violation(const Matrix& a, const Vector& b, const Vector& h);

} // namespace sigclass
