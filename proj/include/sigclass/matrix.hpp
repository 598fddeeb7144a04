#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigclass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Nonnegative observation matrix: rows are features, columns are samples.
///
/// Construction validates every invariant (nonnegative, finite, nonempty,
/// unique sample ids), so a FeatureMatrix in hand is always well formed.
/// Missing feature names are generated as f0, f1, ...
class FeatureMatrix {
public:
    FeatureMatrix(Matrix values, std::vector<std::string> sample_ids,
                  std::vector<std::string> feature_names = {});

    /// Sample ids default to s0, s1, ...
    static FeatureMatrix from_values(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    Eigen::Index features() const noexcept { return values_.rows(); }
    Eigen::Index samples() const noexcept { return values_.cols(); }
    const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

    FeatureMatrix select_samples(std::span<const std::size_t> columns) const;

private:
    Matrix values_;
    std::vector<std::string> sample_ids_;
    std::vector<std::string> feature_names_;
};

/// Throws non_finite_input / negative_input naming the first offending cell.
void check_nonnegative_finite(const Matrix& values, const char* what);

/// Unit-L2 copy of each column; zero columns stay zero.
Matrix normalize_columns(const Matrix& m);

double cosine_similarity(const Vector& a, const Vector& b);

} // namespace sigclass
