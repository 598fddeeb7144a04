#include "sigclass/nmfk.hpp"

#include "sigclass/error.hpp"
#include "sigclass/parallel.hpp"
#include "sigclass/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace sigclass {

namespace {

constexpr std::uint64_t kPerturbStream = 0x70657274ULL;
constexpr double kErrorMonotonicitySlack = 0.02;

double cosine_distance(const Vector& a, const Vector& b) {
    return std::clamp(1.0 - a.dot(b), 0.0, 2.0);
}

} // namespace

void EnsembleConfig::validate() const {
    if (n_perturbations < 2) throw Error(Errc::invalid_argument, "n_perturbations must be at least 2");
    if (!(noise_epsilon > 0.0 && noise_epsilon < 1.0))
        throw Error(Errc::invalid_argument, "noise_epsilon must lie in (0, 1)");
    if (k_min < 1 || k_max < k_min) throw Error(Errc::invalid_argument, "need 1 <= k_min <= k_max");
    if (!(silhouette_threshold > -1.0 && silhouette_threshold <= 1.0))
        throw Error(Errc::invalid_argument, "silhouette_threshold must lie in (-1, 1]");
}

const char* to_string(SelectionRule rule) noexcept {
    switch (rule) {
    case SelectionRule::threshold: return "threshold";
    case SelectionRule::fallback_best_silhouette: return "fallback_best_silhouette";
    case SelectionRule::forced_single_candidate: return "forced_single_candidate";
    }
    return "unknown";
}

FeatureMatrix perturb(const FeatureMatrix& x, double epsilon, std::uint64_t seed) {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw Error(Errc::invalid_argument, "perturbation epsilon must lie in [0, 1)");
    if (epsilon == 0.0) return x;
    CounterRng rng = CounterRng(seed).split(kPerturbStream);
    Matrix values = x.values();
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            const double u = rng.uniform(-1.0, 1.0);
            values(i, j) = std::max(0.0, values(i, j) * (1.0 + epsilon * u));
        }
    }
    return FeatureMatrix(std::move(values), x.sample_ids(), x.feature_names());
}

EnsembleClustering cluster_ensemble_signatures(std::span<const Matrix> signature_sets) {
    if (signature_sets.empty()) throw Error(Errc::invalid_argument, "no ensemble members to cluster");
    const Eigen::Index n = signature_sets.front().rows();
    const Eigen::Index k = signature_sets.front().cols();
    if (n < 1 || k < 1) throw Error(Errc::inconsistent_shapes, "empty signature matrix");
    for (const auto& member : signature_sets)
        if (member.rows() != n || member.cols() != k)
            throw Error(Errc::inconsistent_shapes, "ensemble members disagree on signature shape");

    const std::size_t members = signature_sets.size();
    std::vector<Matrix> unit;
    unit.reserve(members);
    for (const auto& member : signature_sets) unit.push_back(normalize_columns(member));

    EnsembleClustering out;
    out.member_to_cluster.assign(members, std::vector<int>(static_cast<std::size_t>(k), -1));
    out.clusters.assign(static_cast<std::size_t>(k), Matrix(n, static_cast<Eigen::Index>(members)));

    const Matrix& reference = unit.front();
    for (std::size_t m = 0; m < members; ++m) {
        const Matrix similarity = reference.transpose() * unit[m];  // reference x column
        std::vector<bool> ref_taken(static_cast<std::size_t>(k), false);
        std::vector<bool> col_taken(static_cast<std::size_t>(k), false);
        for (Eigen::Index round = 0; round < k; ++round) {
            Eigen::Index best_ref = -1;
            Eigen::Index best_col = -1;
            double best = -std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < k; ++r) {
                if (ref_taken[r]) continue;
                for (Eigen::Index c = 0; c < k; ++c) {
                    if (col_taken[c]) continue;
                    if (similarity(r, c) > best) {
                        best = similarity(r, c);
                        best_ref = r;
                        best_col = c;
                    }
                }
            }
            ref_taken[best_ref] = true;
            col_taken[best_col] = true;
            out.member_to_cluster[m][best_col] = static_cast<int>(best_ref);
            out.clusters[best_ref].col(static_cast<Eigen::Index>(m)) = unit[m].col(best_col);
        }
    }

    for (const auto& cluster : out.clusters) {
        int medoid = 0;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < cluster.cols(); ++i) {
            double total = 0.0;
            for (Eigen::Index j = 0; j < cluster.cols(); ++j)
                if (i != j) total += cosine_distance(cluster.col(i), cluster.col(j));
            if (total < best) {
                best = total;
                medoid = static_cast<int>(i);
            }
        }
        out.medoid_member.push_back(medoid);
        out.medoids.push_back(cluster.col(medoid));
    }
    return out;
}

SilhouetteResult silhouette_scores(const Matrix& distances, std::span<const int> labels, int n_clusters) {
    const auto points = static_cast<Eigen::Index>(labels.size());
    if (distances.rows() != points || distances.cols() != points)
        throw Error(Errc::dimension_mismatch, "distance matrix does not match label count");
    if (n_clusters < 1) throw Error(Errc::invalid_argument, "need at least one cluster");

    std::vector<int> sizes(static_cast<std::size_t>(n_clusters), 0);
    for (int label : labels) {
        if (label < 0 || label >= n_clusters) throw Error(Errc::invalid_argument, "cluster label out of range");
        ++sizes[static_cast<std::size_t>(label)];
    }
    for (int c = 0; c < n_clusters; ++c)
        if (sizes[static_cast<std::size_t>(c)] == 0)
            throw Error(Errc::empty_cluster, "cluster " + std::to_string(c) + " is empty");

    SilhouetteResult out;
    out.point_cluster.assign(labels.begin(), labels.end());
    out.point_scores.assign(labels.size(), 1.0);
    if (n_clusters >= 2) {
        std::vector<double> sums(static_cast<std::size_t>(n_clusters));
        for (Eigen::Index p = 0; p < points; ++p) {
            const int own = labels[p];
            if (sizes[static_cast<std::size_t>(own)] == 1) {
                out.point_scores[p] = 0.0;
                continue;
            }
            std::fill(sums.begin(), sums.end(), 0.0);
            for (Eigen::Index q = 0; q < points; ++q)
                if (q != p) sums[static_cast<std::size_t>(labels[q])] += distances(p, q);
            const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
            double b = std::numeric_limits<double>::infinity();
            for (int c = 0; c < n_clusters; ++c)
                if (c != own) b = std::min(b, sums[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
            const double denom = std::max(a, b);
            out.point_scores[p] = denom > 0.0 ? std::clamp((b - a) / denom, -1.0, 1.0) : 0.0;
        }
    }

    out.cluster_mean.assign(static_cast<std::size_t>(n_clusters), 0.0);
    out.cluster_min.assign(static_cast<std::size_t>(n_clusters), std::numeric_limits<double>::infinity());
    double total = 0.0;
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const auto c = static_cast<std::size_t>(labels[p]);
        out.cluster_mean[c] += out.point_scores[p];
        out.cluster_min[c] = std::min(out.cluster_min[c], out.point_scores[p]);
        total += out.point_scores[p];
    }
    for (int c = 0; c < n_clusters; ++c) out.cluster_mean[c] /= sizes[static_cast<std::size_t>(c)];
    out.min_cluster_mean = *std::min_element(out.cluster_mean.begin(), out.cluster_mean.end());
    out.mean = total / static_cast<double>(labels.size());
    return out;
}

SilhouetteResult silhouette_scores(std::span<const Matrix> clusters) {
    if (clusters.empty()) throw Error(Errc::invalid_argument, "no clusters");
    std::vector<Vector> points;
    std::vector<int> labels;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        if (clusters[c].cols() == 0) throw Error(Errc::empty_cluster, "cluster " + std::to_string(c) + " is empty");
        for (Eigen::Index j = 0; j < clusters[c].cols(); ++j) {
            points.push_back(clusters[c].col(j));
            labels.push_back(static_cast<int>(c));
        }
    }
    const auto count = static_cast<Eigen::Index>(points.size());
    Matrix distances = Matrix::Zero(count, count);
    for (Eigen::Index i = 0; i < count; ++i)
        for (Eigen::Index j = i + 1; j < count; ++j)
            distances(i, j) = distances(j, i) = cosine_distance(points[i], points[j]);
    return silhouette_scores(distances, labels, static_cast<int>(clusters.size()));
}

RankSelectionReport select_rank(const FeatureMatrix& x, const EnsembleConfig& cfg, std::size_t workers) {
    cfg.validate();
    const auto cap = std::min(x.features(), x.samples());
    if (cfg.k_max > cap)
        throw Error(Errc::rank_too_large, "k_max " + std::to_string(cfg.k_max) + " exceeds min(n, m) = " +
                                              std::to_string(cap));

    struct MemberResult {
        std::optional<Matrix> signatures;
        double relative_error = 0.0;
    };

    RankSelectionReport report;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        std::vector<MemberResult> results(static_cast<std::size_t>(cfg.n_perturbations));
        parallel_for(results.size(), workers, [&](std::size_t i) {
            const std::uint64_t seed = cfg.base_seed + i;
            try {
                const FeatureMatrix noisy = perturb(x, cfg.noise_epsilon, seed);
                FactorPair fp = nmf_factorize(noisy, k, seed, cfg.solver);
                results[i].relative_error = relative_error(noisy, fp);
                results[i].signatures = fp.W();
            } catch (const Error&) {
                results[i].signatures.reset();
            }
        });

        std::vector<Matrix> sets;
        double error_sum = 0.0;
        for (const auto& r : results) {
            if (!r.signatures) continue;
            sets.push_back(*r.signatures);
            error_sum += r.relative_error;
        }
        if (sets.empty())
            throw Error(Errc::ensemble_degenerate, "every factorization failed at k = " + std::to_string(k));

        RankStats stats;
        stats.k = k;
        stats.successful_members = static_cast<int>(sets.size());
        stats.mean_relative_error = error_sum / static_cast<double>(sets.size());
        if (k == 1) {
            stats.min_silhouette = 1.0;
            stats.mean_silhouette = 1.0;
        } else {
            const EnsembleClustering clustering = cluster_ensemble_signatures(sets);
            const SilhouetteResult sil = silhouette_scores(clustering.clusters);
            stats.min_silhouette = sil.min_cluster_mean;
            stats.mean_silhouette = sil.mean;
        }
        if (!report.per_k.empty()) {
            const RankStats& prev = report.per_k.back();
            if (stats.mean_relative_error > prev.mean_relative_error * (1.0 + kErrorMonotonicitySlack))
                report.diagnostics.push_back("mean relative error rose from k=" + std::to_string(prev.k) +
                                             " to k=" + std::to_string(k));
        }
        report.per_k.push_back(stats);
    }

    if (cfg.k_min == cfg.k_max) {
        report.selected_k = cfg.k_min;
        report.selection_rule_fired = SelectionRule::forced_single_candidate;
        return report;
    }
    for (auto it = report.per_k.rbegin(); it != report.per_k.rend(); ++it) {
        if (it->min_silhouette >= cfg.silhouette_threshold) {
            report.selected_k = it->k;
            report.selection_rule_fired = SelectionRule::threshold;
            return report;
        }
    }
    const auto best = std::max_element(report.per_k.begin(), report.per_k.end(),
                                       [](const RankStats& a, const RankStats& b) {
                                           return a.min_silhouette < b.min_silhouette;
                                       });
    report.selected_k = best->k;
    report.selection_rule_fired = SelectionRule::fallback_best_silhouette;
    return report;
}

} // namespace sigclass
