#pragma once

#include "sigclass/dataio.hpp"
#include "sigclass/matrix.hpp"
#include "sigclass/nmf.hpp"
#include "sigclass/nmfk.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sigclass {

struct BuildConfig {
    double purity_threshold = 1.0;
    int min_cluster_size = 10;
    int max_depth = 8;
    /// k_min/k_max bound every node's scan; base_seed is ignored in favour of
    /// per-node seeds derived from `seed` and the node path.
    EnsembleConfig ensemble;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const BuildConfig&) const = default;
};

/// Hard cap on the per-node rank scan.
inline constexpr int kNodeRankCap = 16;

struct ArchiveEntry {
    Vector signature;  // unit L2 norm, nonnegative
    std::string label;
    double purity = 1.0;
    int support = 0;
    std::string path;
    int depth = 0;

    bool operator==(const ArchiveEntry& other) const;
};

struct UnresolvedGroup {
    std::string path;
    std::vector<std::string> sample_ids;
    std::string reason;

    bool operator==(const UnresolvedGroup&) const = default;
};

struct SignatureArchive {
    std::vector<ArchiveEntry> entries;
    std::vector<std::string> feature_names;
    BuildConfig build_config;
    /// Mapping from raw input features into the archive's feature space.
    NormalizationParams normalization;
    std::vector<UnresolvedGroup> unresolved;

    Eigen::Index features() const noexcept { return static_cast<Eigen::Index>(feature_names.size()); }
    /// n x p matrix whose columns are the archived signatures.
    Matrix signature_matrix() const;
    std::size_t unresolved_count() const;

    bool operator==(const SignatureArchive& other) const;
};

/// W with unit columns and H rescaled so that W * H is unchanged.
/// Zero columns of W get zeroed activity rows.
struct NormalizedFactors {
    Matrix W;
    Matrix H;
};
NormalizedFactors normalize_factors(const FactorPair& fp);

struct ClusterAssignment {
    std::vector<int> cluster_of;  // -1 for the unassigned bucket
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::size_t> unassigned;  // all-zero activity columns
};

/// H-clustering: after normalize_factors, sample j goes to argmax_s H(s, j)
/// with ties to the lowest s.
ClusterAssignment assign_clusters(const FactorPair& fp);

struct Uniformity {
    bool uniform = false;
    std::string majority_label;
    double purity = 0.0;
};

/// Majority ties are broken by the lexicographically smallest label.
Uniformity uniformity(std::span<const std::string> labels, double threshold);

struct ClusterReport {
    int index = 0;
    int size = 0;
    std::string majority_label;
    double purity = 0.0;
    bool uniform = false;
    std::string action;  // archived, recursed, unresolved
    std::string child_path;
};

struct NodeReport {
    std::string path;
    int depth = 0;
    int n_samples = 0;
    std::map<std::string, int> label_counts;
    std::string outcome;  // archived_single_label, factorized, unresolved
    std::string reason;   // set when outcome is unresolved
    std::optional<RankSelectionReport> rank;
    int k = 0;
    double relative_error = 0.0;
    Matrix signatures;  // normalized W of the node factorization
    std::vector<ClusterReport> clusters;
    int unassigned = 0;
};

struct BuildReport {
    std::vector<NodeReport> nodes;  // sorted by path

    const NodeReport* find(const std::string& path) const;
    int max_depth() const;
};

struct BuildResult {
    SignatureArchive archive;
    BuildReport report;
};

/// Hierarchical archive construction.
///
/// Each node holding labels from more than one class scans k with nmfk over
/// [max(2, k_min), min(k_max, n, size - 1, 16)], factorizes the node at the
/// selected k, assigns samples by H-clustering and archives every uniform
/// cluster's normalized W column. Mixed clusters recurse. Single-label nodes
/// are archived from one k = 1 factorization. Samples that cannot be
/// archived (too small, too deep, no split, zero activity) are listed in
/// `unresolved`, so every training sample is accounted for exactly once.
/// `normalization` is stored verbatim for use at inference time.
BuildResult build_archive(const FeatureMatrix& x, std::span<const std::string> labels, const BuildConfig& cfg,
                          std::size_t workers = 1, NormalizationParams normalization = {});

inline constexpr int kArchiveSchemaVersion = 1;

std::string archive_to_json(const SignatureArchive& archive);
SignatureArchive archive_from_json(const std::string& text);
void save_archive(const SignatureArchive& archive, const std::filesystem::path& path);
SignatureArchive load_archive(const std::filesystem::path& path);

std::string build_report_to_json(const BuildReport& report);

} // namespace sigclass
