#include "sigclass/inference.hpp"

#include "sigclass/error.hpp"
#include "sigclass/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace sigclass {

void InferenceConfig::validate() const {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::invalid_argument, "threshold t must lie in [0, 1]");
    if (!(score_tolerance >= 0.0) || !std::isfinite(score_tolerance))
        throw Error(Errc::invalid_argument, "score_tolerance must be finite and nonnegative");
}

const char* to_string(Decision d) noexcept { return d == Decision::classified ? "classified" : "rejected"; }

bool Prediction::operator==(const Prediction& other) const {
    return sample_id == other.sample_id && decision == other.decision && label == other.label &&
           score == other.score && attribution == other.attribution &&
           attribution_index == other.attribution_index && attributed_label == other.attributed_label &&
           coefficients.size() == other.coefficients.size() &&
           (coefficients.array() == other.coefficients.array()).all();
}

ArchiveProjector::ArchiveProjector(const SignatureArchive& archive)
    : archive_(archive), signatures_(archive.signature_matrix()) {
    if (archive.entries.empty()) throw Error(Errc::empty_archive, "archive has no signatures");
}

Projection ArchiveProjector::project(const Vector& sample) const {
    if (sample.size() != signatures_.rows())
        throw Error(Errc::dimension_mismatch, "sample has " + std::to_string(sample.size()) +
                                                  " features, archive expects " +
                                                  std::to_string(signatures_.rows()));
    Projection out;
    out.coefficients = nnls_solve(signatures_, sample);
    out.reconstruction = signatures_ * out.coefficients;
    return out;
}

Prediction ArchiveProjector::classify(const std::string& sample_id, const Vector& sample,
                                      const InferenceConfig& cfg) const {
    Projection proj = project(sample);
    Prediction p;
    p.sample_id = sample_id;
    p.score = score(sample, proj.reconstruction);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < proj.coefficients.size(); ++i)
        if (proj.coefficients(i) > proj.coefficients(best)) best = i;
    p.attribution_index = static_cast<std::size_t>(best);
    p.attribution = archive_.entries[p.attribution_index].path;
    p.attributed_label = archive_.entries[p.attribution_index].label;
    if (p.score >= cfg.t - cfg.score_tolerance) {
        p.decision = Decision::classified;
        p.label = p.attributed_label;
    }
    p.coefficients = std::move(proj.coefficients);
    return p;
}

Projection project(const Vector& sample, const SignatureArchive& archive) {
    return ArchiveProjector(archive).project(sample);
}

double score(const Vector& sample, const Vector& reconstruction) {
    if (sample.size() != reconstruction.size())
        throw Error(Errc::dimension_mismatch, "sample and reconstruction differ in length");
    const double ns = sample.norm();
    if (ns == 0.0) throw Error(Errc::degenerate_input, "cannot score a zero sample");
    const double nr = reconstruction.norm();
    if (nr == 0.0) return 0.0;
    return std::clamp(sample.dot(reconstruction) / (ns * nr), -1.0, 1.0);
}

Prediction classify(const std::string& sample_id, const Vector& sample, const SignatureArchive& archive,
                    const InferenceConfig& cfg) {
    cfg.validate();
    return ArchiveProjector(archive).classify(sample_id, sample, cfg);
}

BatchResult classify_batch(const FeatureMatrix& samples, const SignatureArchive& archive, const InferenceConfig& cfg,
                           std::size_t workers) {
    cfg.validate();
    const ArchiveProjector projector(archive);
    if (samples.features() != archive.features())
        throw Error(Errc::dimension_mismatch, "samples have " + std::to_string(samples.features()) +
                                                  " features, archive expects " + std::to_string(archive.features()));
    const auto m = static_cast<std::size_t>(samples.samples());
    std::vector<std::optional<Prediction>> slots(m);
    std::vector<std::string> failures(m);
    parallel_for(m, workers, [&](std::size_t j) {
        try {
            slots[j] = projector.classify(samples.sample_ids()[j], samples.values().col(static_cast<Eigen::Index>(j)),
                                          cfg);
        } catch (const Error& e) {
            failures[j] = e.what();
        }
    });
    BatchResult out;
    for (std::size_t j = 0; j < m; ++j) {
        if (slots[j])
            out.predictions.push_back(std::move(*slots[j]));
        else
            out.errors.push_back(SampleError{j, samples.sample_ids()[j], failures[j]});
    }
    return out;
}

} // namespace sigclass
