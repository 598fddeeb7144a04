#include "sigclass/nnls.hpp"

#include "sigclass/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sigclass {

namespace {

void validate(const Matrix& a, const Vector& b) {
    if (a.rows() < 1 || a.cols() < 1) throw Error(Errc::invalid_argument, "NNLS needs a nonempty matrix");
    if (b.size() != a.rows())
        throw Error(Errc::dimension_mismatch, "right-hand side has length " + std::to_string(b.size()) +
                                                  ", expected " + std::to_string(a.rows()));
    if (!a.allFinite() || !b.allFinite()) throw Error(Errc::non_finite_input, "NNLS input is not finite");
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (a.col(j).squaredNorm() == 0.0)
            throw Error(Errc::zero_column, "column " + std::to_string(j) + " has zero norm");
}

// Unconstrained least squares restricted to the passive columns.
Vector solve_passive(const Matrix& a, const Vector& b, const std::vector<Eigen::Index>& passive) {
    Matrix sub(a.rows(), static_cast<Eigen::Index>(passive.size()));
    for (std::size_t c = 0; c < passive.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(passive[c]);
    return sub.colPivHouseholderQr().solve(b);
}

} // namespace

Vector nnls_solve(const Matrix& a, const Vector& b, const NnlsOptions& opts) {
    validate(a, b);
    const Eigen::Index p = a.cols();
    Vector x = Vector::Zero(p);
    const Vector atb = a.transpose() * b;
    const double scale = atb.cwiseAbs().maxCoeff();
    if (scale == 0.0) return x;
    const double tol = opts.kkt_tol * scale;
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 30 * static_cast<int>(p);

    std::vector<bool> in_passive(static_cast<std::size_t>(p), false);
    // A column whose entry immediately failed is barred until x moves again.
    std::vector<bool> barred(static_cast<std::size_t>(p), false);
    Vector w = atb;

    for (int outer = 0; outer < max_iter; ++outer) {
        Eigen::Index entering = -1;
        double best = tol;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (in_passive[j] || barred[j]) continue;
            if (w(j) > best) {
                best = w(j);
                entering = j;
            }
        }
        if (entering < 0) break;
        in_passive[entering] = true;

        bool moved = false;
        for (int inner = 0; inner <= 3 * p; ++inner) {
            std::vector<Eigen::Index> passive;
            for (Eigen::Index j = 0; j < p; ++j)
                if (in_passive[j]) passive.push_back(j);
            const Vector z_sub = solve_passive(a, b, passive);
            Vector z = Vector::Zero(p);
            for (std::size_t c = 0; c < passive.size(); ++c) z(passive[c]) = z_sub(static_cast<Eigen::Index>(c));

            if (inner == 0 && z(entering) <= 0.0) {
                // Numerically the new direction does not help; undo.
                in_passive[entering] = false;
                barred[entering] = true;
                break;
            }
            bool feasible = true;
            for (Eigen::Index j : passive)
                if (z(j) <= 0.0) feasible = false;
            if (feasible) {
                x = z;
                moved = true;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            Eigen::Index blocking = -1;
            for (Eigen::Index j : passive) {
                if (z(j) <= 0.0) {
                    const double step = x(j) / (x(j) - z(j));
                    if (step < alpha) {
                        alpha = step;
                        blocking = j;
                    }
                }
            }
            x += alpha * (z - x);
            x(blocking) = 0.0;
            for (Eigen::Index j : passive) {
                if (x(j) <= 0.0) {
                    x(j) = 0.0;
                    in_passive[j] = false;
                }
            }
            moved = true;
        }
        if (moved) std::fill(barred.begin(), barred.end(), false);
        w = a.transpose() * (b - a * x);
    }
    return x.cwiseMax(0.0);
}

double nnls_kkt_violation(const Matrix& a, const Vector& b, const Vector& h) {
    const Vector atb = a.transpose() * b;
    const double scale = std::max(atb.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    // Gradient of 0.5 ||Ah - b||^2.
    const Vector grad = a.transpose() * (a * h - b);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < h.size(); ++j) {
        if (h(j) < 0.0) worst = std::max(worst, -h(j));
        const double v = h(j) > 0.0 ? std::abs(grad(j)) : std::max(0.0, -grad(j));
        worst = std::max(worst, v);
    }
    return worst / scale;
}

} // namespace sigclass
