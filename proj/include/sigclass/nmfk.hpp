#pragma once

#include "sigclass/matrix.hpp"
#include "sigclass/nmf.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sigclass {

struct EnsembleConfig {
    int n_perturbations = 30;
    double noise_epsilon = 0.03;
    int k_min = 1;
    int k_max = 16;
    double silhouette_threshold = 0.75;
    std::uint64_t base_seed = 0;
    SolverOptions solver;

    void validate() const;
    bool operator==(const EnsembleConfig&) const = default;
};

/// X'_ij = X_ij * (1 + epsilon * u_ij), u_ij uniform on [-1, 1].
/// epsilon = 0 returns X unchanged; otherwise epsilon must lie in (0, 1).
FeatureMatrix perturb(const FeatureMatrix& x, double epsilon, std::uint64_t seed);

/// Signatures of an ensemble grouped across members.
struct EnsembleClustering {
    /// member_to_cluster[member][column] = cluster receiving that column.
    std::vector<std::vector<int>> member_to_cluster;
    /// clusters[c] is n x members; column i is member i's unit signature.
    std::vector<Matrix> clusters;
    std::vector<Vector> medoids;
    std::vector<int> medoid_member;
};

/// Greedy one-to-one matching of every member's unit-normalized columns to
/// member 0's columns by maximal cosine similarity. The globally best
/// remaining (reference, column) pair is fixed first; ties go to the lowest
/// reference index, then the lowest column index.
///
/// This is a reconstruction of the usual NMFk cross-run clustering, not a
/// port of any particular implementation.
EnsembleClustering cluster_ensemble_signatures(std::span<const Matrix> signature_sets);

struct SilhouetteResult {
    std::vector<double> point_scores;   // one per point, in input order
    std::vector<int> point_cluster;
    std::vector<double> cluster_mean;
    std::vector<double> cluster_min;
    double min_cluster_mean = 1.0;      // stability score used for rank selection
    double mean = 1.0;
};

/// Standard silhouette from a precomputed symmetric distance matrix.
/// Singleton clusters score 0; a single cluster scores 1 everywhere by
/// convention. Throws empty_cluster when a cluster id in [0, n_clusters)
/// has no points.
SilhouetteResult silhouette_scores(const Matrix& distances, std::span<const int> labels, int n_clusters);

/// Silhouettes under cosine distance over clusters of unit vectors.
SilhouetteResult silhouette_scores(std::span<const Matrix> clusters);

enum class SelectionRule { threshold, fallback_best_silhouette, forced_single_candidate };
const char* to_string(SelectionRule rule) noexcept;

struct RankStats {
    int k = 0;
    double min_silhouette = 0.0;
    double mean_silhouette = 0.0;
    double mean_relative_error = 0.0;
    int successful_members = 0;
};

struct RankSelectionReport {
    std::vector<RankStats> per_k;
    int selected_k = 0;
    SelectionRule selection_rule_fired = SelectionRule::threshold;
    /// Non-fatal observations such as non-monotone reconstruction error.
    std::vector<std::string> diagnostics;
};

/// Perturbation-ensemble rank selection.
///
/// For every k in [k_min, k_max] each member i factorizes perturb(X, eps,
/// base_seed + i) with seed base_seed + i; signatures are clustered across
/// members and scored by the smallest per-cluster mean silhouette (k = 1
/// scores 1 by convention). The largest k meeting silhouette_threshold wins;
/// otherwise the best-scoring k is taken and the fallback is flagged.
/// Members run on up to `workers` threads with no effect on the result.
RankSelectionReport select_rank(const FeatureMatrix& x, const EnsembleConfig& cfg, std::size_t workers = 1);

} // namespace sigclass
