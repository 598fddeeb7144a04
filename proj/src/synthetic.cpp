#include "sigclass/dataio.hpp"

#include "sigclass/error.hpp"
#include "sigclass/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sigclass {

namespace {

constexpr std::uint64_t kSignatureStream = 1;
constexpr std::uint64_t kSampleStream = 2;

int shared_block_size(const SynthSpec& spec) {
    if (spec.signature_overlap <= 0.0) return 0;
    return std::max(1, spec.n_features / (2 * spec.n_classes));
}

} // namespace

void SynthSpec::validate() const {
    if (n_features < 1) throw Error(Errc::invalid_argument, "n_features must be positive");
    if (n_classes < 1) throw Error(Errc::invalid_argument, "n_classes must be positive");
    if (samples_per_class < 1) throw Error(Errc::invalid_argument, "samples_per_class must be positive");
    if (!(signature_overlap >= 0.0 && signature_overlap < 1.0))
        throw Error(Errc::infeasible_spec, "signature_overlap must lie in [0, 1)");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw Error(Errc::invalid_argument, "noise_sigma must be a finite nonnegative number");
    if (n_features - shared_block_size(*this) < n_classes)
        throw Error(Errc::infeasible_spec, "need at least one private feature per class (" +
                                               std::to_string(n_features) + " features, " +
                                               std::to_string(n_classes) + " classes)");
    if (holdout_class) {
        bool found = false;
        for (int c = 0; c < n_classes; ++c) found = found || synthetic_class_label(c) == *holdout_class;
        if (!found) throw Error(Errc::unknown_class, "holdout class '" + *holdout_class + "' is not generated");
    }
}

std::string synthetic_class_label(int c) { return "c" + std::to_string(c); }

SyntheticData generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    const int n = spec.n_features;
    const int classes = spec.n_classes;
    const int shared = shared_block_size(spec);
    const int private_total = n - shared;

    SyntheticTruth truth;
    if (n < 2 * classes)
        truth.warnings.push_back("n_features < 2 * n_classes; signatures have very small private blocks");

    // Private blocks first, sizes differing by at most one, then the shared block.
    CounterRng sig_rng = CounterRng(spec.seed).split(kSignatureStream);
    Matrix priv = Matrix::Zero(n, classes);
    int row = 0;
    for (int c = 0; c < classes; ++c) {
        const int size = private_total / classes + (c < private_total % classes ? 1 : 0);
        for (int r = 0; r < size; ++r, ++row) priv(row, c) = sig_rng.uniform(0.5, 1.5);
        priv.col(c).normalize();
    }
    Vector common = Vector::Zero(n);
    for (int r = 0; r < shared; ++r) common(private_total + r) = sig_rng.uniform(0.5, 1.5);
    if (shared > 0) common.normalize();

    const double alpha = spec.signature_overlap;
    truth.signatures = Matrix(n, classes);
    for (int c = 0; c < classes; ++c) {
        truth.signatures.col(c) = std::sqrt(1.0 - alpha) * priv.col(c) + std::sqrt(alpha) * common;
        truth.signatures.col(c).normalize();
        truth.class_labels.push_back(synthetic_class_label(c));
    }

    const int m = classes * spec.samples_per_class;
    Matrix values(n, m);
    std::vector<std::string> ids, labels;
    ids.reserve(static_cast<std::size_t>(m));
    CounterRng sample_rng = CounterRng(spec.seed).split(kSampleStream);
    for (int j = 0; j < m; ++j) {
        const int c = j / spec.samples_per_class;
        CounterRng rng = sample_rng.split(static_cast<std::uint64_t>(j));
        const double amplitude = rng.uniform(0.5, 1.5);
        for (int i = 0; i < n; ++i) {
            const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
            values(i, j) = std::max(0.0, amplitude * truth.signatures(i, c) + noise);
        }
        char id[32];
        std::snprintf(id, sizeof id, "s%05d", j);
        ids.emplace_back(id);
        labels.push_back(truth.class_labels[static_cast<std::size_t>(c)]);
        truth.sample_class.push_back(c);
        truth.amplitudes.push_back(amplitude);
    }
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "f%03d", i);
        names.emplace_back(name);
    }
    return {LabeledDataset(FeatureMatrix(std::move(values), std::move(ids), std::move(names)), std::move(labels)),
            std::move(truth)};
}

std::string synthetic_truth_json(const SynthSpec& spec, const SyntheticData& data) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "synthetic_ground_truth";
    doc["spec"] = {{"n_features", spec.n_features},
                   {"n_classes", spec.n_classes},
                   {"samples_per_class", spec.samples_per_class},
                   {"signature_overlap", spec.signature_overlap},
                   {"noise_sigma", spec.noise_sigma},
                   {"holdout_class", spec.holdout_class ? json(*spec.holdout_class) : json(nullptr)},
                   {"seed", spec.seed}};
    doc["feature_names"] = data.dataset.features().feature_names();
    json sigs = json::array();
    for (Eigen::Index c = 0; c < data.truth.signatures.cols(); ++c) {
        const Vector col = data.truth.signatures.col(c);
        sigs.push_back({{"label", data.truth.class_labels[static_cast<std::size_t>(c)]},
                        {"values", std::vector<double>(col.data(), col.data() + col.size())}});
    }
    doc["signatures"] = std::move(sigs);
    json mixing = json::array();
    const auto& ids = data.dataset.features().sample_ids();
    for (std::size_t j = 0; j < ids.size(); ++j)
        mixing.push_back({{"sample_id", ids[j]},
                          {"class", data.truth.class_labels[static_cast<std::size_t>(data.truth.sample_class[j])]},
                          {"amplitude", data.truth.amplitudes[j]}});
    doc["mixing"] = std::move(mixing);
    doc["warnings"] = data.truth.warnings;
    return doc.dump(2) + "\n";
}

} // namespace sigclass
