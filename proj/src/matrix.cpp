#include "sigclass/matrix.hpp"

#include "sigclass/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace sigclass {

void check_nonnegative_finite(const Matrix& values, const char* what) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            const double v = values(i, j);
            if (!std::isfinite(v))
                throw Error(Errc::non_finite_input, std::string(what) + " has a non-finite entry at row " +
                                                        std::to_string(i) + ", column " + std::to_string(j));
            if (v < 0.0)
                throw Error(Errc::negative_input, std::string(what) + " has a negative entry at row " +
                                                      std::to_string(i) + ", column " + std::to_string(j));
        }
    }
}

FeatureMatrix::FeatureMatrix(Matrix values, std::vector<std::string> sample_ids,
                             std::vector<std::string> feature_names)
    : values_(std::move(values)), sample_ids_(std::move(sample_ids)), feature_names_(std::move(feature_names)) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw Error(Errc::empty_input, "feature matrix needs at least one feature and one sample");
    check_nonnegative_finite(values_, "feature matrix");
    if (sample_ids_.size() != static_cast<std::size_t>(values_.cols()))
        throw Error(Errc::dimension_mismatch, "expected " + std::to_string(values_.cols()) + " sample ids, got " +
                                                  std::to_string(sample_ids_.size()));
    std::unordered_set<std::string> seen;
    for (const auto& id : sample_ids_)
        if (!seen.insert(id).second) throw Error(Errc::invalid_argument, "duplicate sample id '" + id + "'");
    if (feature_names_.empty()) {
        feature_names_.reserve(values_.rows());
        for (Eigen::Index i = 0; i < values_.rows(); ++i) feature_names_.push_back("f" + std::to_string(i));
    } else if (feature_names_.size() != static_cast<std::size_t>(values_.rows())) {
        throw Error(Errc::dimension_mismatch, "expected " + std::to_string(values_.rows()) +
                                                  " feature names, got " + std::to_string(feature_names_.size()));
    }
}

FeatureMatrix FeatureMatrix::from_values(Matrix values) {
    std::vector<std::string> ids;
    ids.reserve(values.cols());
    for (Eigen::Index j = 0; j < values.cols(); ++j) ids.push_back("s" + std::to_string(j));
    return FeatureMatrix(std::move(values), std::move(ids));
}

FeatureMatrix FeatureMatrix::select_samples(std::span<const std::size_t> columns) const {
    Matrix sub(values_.rows(), static_cast<Eigen::Index>(columns.size()));
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] >= sample_ids_.size()) throw Error(Errc::invalid_argument, "sample index out of range");
        sub.col(static_cast<Eigen::Index>(c)) = values_.col(static_cast<Eigen::Index>(columns[c]));
        ids.push_back(sample_ids_[columns[c]]);
    }
    return FeatureMatrix(std::move(sub), std::move(ids), feature_names_);
}

Matrix normalize_columns(const Matrix& m) {
    Matrix out = m;
    for (Eigen::Index s = 0; s < out.cols(); ++s) {
        const double norm = out.col(s).norm();
        if (norm > 0.0) out.col(s) /= norm;
    }
    return out;
}

double cosine_similarity(const Vector& a, const Vector& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

} // namespace sigclass
