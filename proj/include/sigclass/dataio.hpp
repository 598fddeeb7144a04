#pragma once

#include "sigclass/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sigclass {

class LabeledDataset {
public:
    LabeledDataset(FeatureMatrix features, std::vector<std::string> labels);

    const FeatureMatrix& features() const noexcept { return features_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    /// Sorted unique labels.
    const std::vector<std::string>& label_set() const noexcept { return label_set_; }

private:
    FeatureMatrix features_;
    std::vector<std::string> labels_;
    std::vector<std::string> label_set_;
};

// CSV layout: the features file has a header row "<anything>,<sample ids...>"
// and one row per feature starting with its name. The labels file has a
// "sample_id,label" header; further columns are ignored.

FeatureMatrix load_features_csv(const std::filesystem::path& path);
LabeledDataset load_csv(const std::filesystem::path& features_path, const std::filesystem::path& labels_path);

/// Canonical form: shortest round-trip decimal for every value.
void save_features_csv(const FeatureMatrix& x, const std::filesystem::path& path);
void save_csv(const LabeledDataset& ds, const std::filesystem::path& features_path,
              const std::filesystem::path& labels_path);

/// Writes sample_id,label,novel with novel as 0/1.
void save_truth_csv(const LabeledDataset& ds, const std::vector<bool>& novel_flags,
                    const std::filesystem::path& path);

enum class NormalizationMode { per_feature_max, none };
const char* to_string(NormalizationMode mode) noexcept;
NormalizationMode parse_normalization_mode(const std::string& text);

/// Everything needed to map raw feature vectors into the space an archive
/// was built in.
struct NormalizationParams {
    NormalizationMode mode = NormalizationMode::none;
    std::vector<std::string> input_features;  // names expected on input, in order
    std::vector<std::size_t> kept;            // indices into input_features
    std::vector<double> scale;                // divisor per kept feature
    std::vector<std::string> dropped;         // features removed for having max 0

    bool operator==(const NormalizationParams&) const = default;
};

struct NormalizedDataset {
    LabeledDataset dataset;
    NormalizationParams params;
};

/// per_feature_max divides each feature row by its training maximum.
/// All-zero features are dropped and listed in params.dropped.
NormalizedDataset normalize(const LabeledDataset& ds, NormalizationMode mode);

/// Applies stored training parameters; values may exceed 1 on new data.
FeatureMatrix apply_normalization(const NormalizationParams& params, const FeatureMatrix& x);

struct HoldoutSplit {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<bool> novel_flags;  // aligned with test samples
};

/// Removes `holdout_class` from training entirely and puts all of it in the
/// test set, along with max(1, floor(test_fraction * size)) samples of every
/// other class. Original sample order is preserved inside each split.
HoldoutSplit split_holdout(const LabeledDataset& ds, const std::string& holdout_class, double test_fraction,
                           std::uint64_t seed);

struct SynthSpec {
    int n_features = 40;
    int n_classes = 4;
    int samples_per_class = 250;
    double signature_overlap = 0.1;
    double noise_sigma = 0.02;
    std::optional<std::string> holdout_class;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticTruth {
    Matrix signatures;                      // n_features x n_classes, unit columns
    std::vector<std::string> class_labels;  // label of each signature column
    std::vector<int> sample_class;          // generating class per sample
    std::vector<double> amplitudes;         // amplitude per sample
    std::vector<std::string> warnings;
};

struct SyntheticData {
    LabeledDataset dataset;
    SyntheticTruth truth;
};

/// Class labels are c0, c1, ...; sample ids s00000, s00001, ... in
/// class-major order.
std::string synthetic_class_label(int c);

/// Each class owns a disjoint block of private features. When overlap > 0
/// all signatures also share a common block weighted so that every pair has
/// cosine exactly `signature_overlap`. A sample of class c is
/// amplitude * signature_c plus Gaussian noise, truncated at zero, with
/// amplitude uniform on [0.5, 1.5).
SyntheticData generate_synthetic(const SynthSpec& spec);

/// Ground-truth sidecar as a JSON document.
std::string synthetic_truth_json(const SynthSpec& spec, const SyntheticData& data);

} // namespace sigclass
