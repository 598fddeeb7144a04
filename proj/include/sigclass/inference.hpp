#pragma once

#include "sigclass/archive.hpp"
#include "sigclass/matrix.hpp"
#include "sigclass/nnls.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sigclass {

struct InferenceConfig {
    double t = 1.0;  // similarity threshold
    double score_tolerance = 1e-9;

    void validate() const;
};

enum class Decision { classified, rejected };
const char* to_string(Decision d) noexcept;

struct Prediction {
    std::string sample_id;
    Decision decision = Decision::rejected;
    std::optional<std::string> label;  // present iff classified
    double score = 0.0;
    std::string attribution;           // path of the largest-coefficient signature
    std::size_t attribution_index = 0;
    std::string attributed_label;      // label of that signature, whatever the decision
    Vector coefficients;

    bool operator==(const Prediction& other) const;
};

struct Projection {
    Vector coefficients;
    Vector reconstruction;
};

/// NNLS projection onto a fixed archive. Holds the signature matrix so a
/// batch does not rebuild it per sample.
class ArchiveProjector {
public:
    explicit ArchiveProjector(const SignatureArchive& archive);

    Projection project(const Vector& sample) const;
    Prediction classify(const std::string& sample_id, const Vector& sample, const InferenceConfig& cfg) const;

private:
    const SignatureArchive& archive_;
    Matrix signatures_;
};

Projection project(const Vector& sample, const SignatureArchive& archive);

/// Cosine between a sample and its reconstruction; a zero reconstruction
/// scores 0. Throws degenerate_input for a zero sample.
double score(const Vector& sample, const Vector& reconstruction);

/// Classified with the attributed signature's label iff
/// score >= t - score_tolerance, rejected (novel) otherwise.
Prediction classify(const std::string& sample_id, const Vector& sample, const SignatureArchive& archive,
                    const InferenceConfig& cfg);

struct SampleError {
    std::size_t index = 0;
    std::string sample_id;
    std::string message;
};

struct BatchResult {
    std::vector<Prediction> predictions;  // successful samples, input order
    std::vector<SampleError> errors;
};

/// Per-sample failures are collected rather than aborting the batch. Input
/// must already be in the archive's feature space.
BatchResult classify_batch(const FeatureMatrix& samples, const SignatureArchive& archive, const InferenceConfig& cfg,
                           std::size_t workers = 1);

} // namespace sigclass
