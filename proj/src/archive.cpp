#include "sigclass/archive.hpp"

#include "detail.hpp"
#include "sigclass/error.hpp"
#include "sigclass/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sigclass {

void BuildConfig::validate() const {
    if (!(purity_threshold > 0.5 && purity_threshold <= 1.0))
        throw Error(Errc::invalid_argument, "purity_threshold must lie in (0.5, 1]");
    if (min_cluster_size < 1) throw Error(Errc::invalid_argument, "min_cluster_size must be positive");
    if (max_depth < 1) throw Error(Errc::invalid_argument, "max_depth must be positive");
    ensemble.validate();
}

bool ArchiveEntry::operator==(const ArchiveEntry& other) const {
    return signature.size() == other.signature.size() && (signature.array() == other.signature.array()).all() &&
           label == other.label && purity == other.purity && support == other.support && path == other.path &&
           depth == other.depth;
}

Matrix SignatureArchive::signature_matrix() const {
    Matrix a(features(), static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = entries[i].signature;
    return a;
}

std::size_t SignatureArchive::unresolved_count() const {
    std::size_t total = 0;
    for (const auto& group : unresolved) total += group.sample_ids.size();
    return total;
}

bool SignatureArchive::operator==(const SignatureArchive& other) const {
    return entries == other.entries && feature_names == other.feature_names && build_config == other.build_config &&
           normalization == other.normalization && unresolved == other.unresolved;
}

const NodeReport* BuildReport::find(const std::string& path) const {
    for (const auto& node : nodes)
        if (node.path == path) return &node;
    return nullptr;
}

int BuildReport::max_depth() const {
    int depth = 0;
    for (const auto& node : nodes) depth = std::max(depth, node.depth);
    return depth;
}

NormalizedFactors normalize_factors(const FactorPair& fp) {
    NormalizedFactors out{fp.W(), fp.H()};
    for (Eigen::Index s = 0; s < out.W.cols(); ++s) {
        const double norm = out.W.col(s).norm();
        if (norm > 0.0) {
            out.W.col(s) /= norm;
            out.H.row(s) *= norm;
        } else {
            out.H.row(s).setZero();
        }
    }
    return out;
}

ClusterAssignment assign_clusters(const FactorPair& fp) {
    const NormalizedFactors nf = normalize_factors(fp);
    const Eigen::Index k = nf.H.rows();
    ClusterAssignment out;
    out.members.resize(static_cast<std::size_t>(k));
    out.cluster_of.assign(static_cast<std::size_t>(nf.H.cols()), -1);
    for (Eigen::Index j = 0; j < nf.H.cols(); ++j) {
        Eigen::Index best = 0;
        for (Eigen::Index s = 1; s < k; ++s)
            if (nf.H(s, j) > nf.H(best, j)) best = s;
        if (nf.H(best, j) > 0.0) {
            out.cluster_of[static_cast<std::size_t>(j)] = static_cast<int>(best);
            out.members[static_cast<std::size_t>(best)].push_back(static_cast<std::size_t>(j));
        } else {
            out.unassigned.push_back(static_cast<std::size_t>(j));
        }
    }
    return out;
}

Uniformity uniformity(std::span<const std::string> labels, double threshold) {
    if (labels.empty()) throw Error(Errc::empty_cluster, "uniformity of an empty cluster is undefined");
    std::map<std::string, int> counts;
    for (const auto& label : labels) ++counts[label];
    Uniformity out;
    int best = 0;
    for (const auto& [label, count] : counts) {
        if (count > best) {
            best = count;
            out.majority_label = label;
        }
    }
    out.purity = static_cast<double>(best) / static_cast<double>(labels.size());
    out.uniform = out.purity >= threshold;
    return out;
}

namespace {

struct Child {
    std::vector<std::size_t> samples;
    std::string path;
};

class Builder {
public:
    Builder(const FeatureMatrix& x, std::span<const std::string> labels, const BuildConfig& cfg, std::size_t workers)
        : x_(x), labels_(labels), cfg_(cfg), workers_(workers) {}

    void visit(const std::vector<std::size_t>& samples, int depth, const std::string& path) {
        NodeReport node;
        node.path = path;
        node.depth = depth;
        node.n_samples = static_cast<int>(samples.size());
        for (std::size_t j : samples) ++node.label_counts[labels_[j]];

        const int size = node.n_samples;
        std::vector<Child> children;
        if (node.label_counts.size() == 1) {
            if (size >= cfg_.min_cluster_size) {
                archive_single_label(node, samples);
            } else {
                unresolve(node, samples, path, "below_min_cluster_size");
            }
        } else if (size < cfg_.min_cluster_size) {
            unresolve(node, samples, path, "below_min_cluster_size");
        } else if (depth >= cfg_.max_depth) {
            unresolve(node, samples, path, "max_depth_reached");
        } else {
            children = factorize_mixed(node, samples);
        }
        report_.nodes.push_back(std::move(node));
        for (const auto& child : children) visit(child.samples, depth + 1, child.path);
    }

    BuildResult finish(SignatureArchive archive) {
        archive.entries = std::move(entries_);
        archive.unresolved = std::move(unresolved_);
        std::sort(report_.nodes.begin(), report_.nodes.end(),
                  [](const NodeReport& a, const NodeReport& b) { return a.path < b.path; });
        return {std::move(archive), std::move(report_)};
    }

private:
    std::uint64_t node_seed(const std::string& path) const {
        return CounterRng(cfg_.seed).split(detail::fnv1a(path)).next_u64();
    }

    void unresolve(NodeReport& node, const std::vector<std::size_t>& samples, const std::string& path,
                   const std::string& reason) {
        if (node.outcome.empty()) {
            node.outcome = "unresolved";
            node.reason = reason;
        }
        UnresolvedGroup group{path, {}, reason};
        for (std::size_t j : samples) group.sample_ids.push_back(x_.sample_ids()[j]);
        unresolved_.push_back(std::move(group));
    }

    void archive_single_label(NodeReport& node, const std::vector<std::size_t>& samples) {
        const FeatureMatrix sub = x_.select_samples(samples);
        FactorPair fp = [&] {
            try {
                return nmf_factorize(sub, 1, node_seed(node.path), cfg_.ensemble.solver);
            } catch (const Error& e) {
                throw Error(e.code(), "node " + node.path + ": " + e.what());
            }
        }();
        const NormalizedFactors nf = normalize_factors(fp);
        node.outcome = "archived_single_label";
        node.k = 1;
        node.relative_error = relative_error(sub, fp);
        node.signatures = nf.W;
        const std::string entry_path = node.path + "/k1/c0";
        entries_.push_back(
            ArchiveEntry{nf.W.col(0), labels_[samples.front()], 1.0, node.n_samples, entry_path, node.depth});
        node.clusters.push_back(
            ClusterReport{0, node.n_samples, labels_[samples.front()], 1.0, true, "archived", ""});
    }

    std::vector<Child> factorize_mixed(NodeReport& node, const std::vector<std::size_t>& samples) {
        const FeatureMatrix sub = x_.select_samples(samples);
        const int size = node.n_samples;
        const int k_hi = std::min({cfg_.ensemble.k_max, static_cast<int>(x_.features()), size - 1, kNodeRankCap});
        const int k_lo = std::max(2, cfg_.ensemble.k_min);
        if (k_hi < k_lo) {
            unresolve(node, samples, node.path, "rank_range_empty");
            return {};
        }
        EnsembleConfig ens = cfg_.ensemble;
        ens.k_min = k_lo;
        ens.k_max = k_hi;
        ens.base_seed = node_seed(node.path);

        std::optional<FactorPair> fp;
        try {
            node.rank = select_rank(sub, ens, workers_);
            fp = nmf_factorize(sub, node.rank->selected_k, ens.base_seed + static_cast<std::uint64_t>(ens.n_perturbations),
                               ens.solver);
        } catch (const Error& e) {
            unresolve(node, samples, node.path, std::string("factorization_failed: ") + to_string(e.code()));
            return {};
        }
        const int k = node.rank->selected_k;
        node.outcome = "factorized";
        node.k = k;
        node.relative_error = relative_error(sub, *fp);
        const NormalizedFactors nf = normalize_factors(*fp);
        node.signatures = nf.W;
        const ClusterAssignment assignment = assign_clusters(*fp);
        const std::string prefix = node.path + "/k" + std::to_string(k);
        std::vector<Child> children;

        for (int s = 0; s < k; ++s) {
            const auto& local = assignment.members[static_cast<std::size_t>(s)];
            ClusterReport cr;
            cr.index = s;
            cr.size = static_cast<int>(local.size());
            if (local.empty()) {
                cr.action = "empty";
                node.clusters.push_back(cr);
                continue;
            }
            std::vector<std::size_t> global;
            std::vector<std::string> cluster_labels;
            for (std::size_t j : local) {
                global.push_back(samples[j]);
                cluster_labels.push_back(labels_[samples[j]]);
            }
            const Uniformity u = uniformity(cluster_labels, cfg_.purity_threshold);
            cr.majority_label = u.majority_label;
            cr.purity = u.purity;
            cr.uniform = u.uniform;
            const std::string cluster_path = prefix + "/c" + std::to_string(s);
            if (u.uniform && cr.size >= cfg_.min_cluster_size) {
                cr.action = "archived";
                entries_.push_back(ArchiveEntry{nf.W.col(s), u.majority_label, u.purity, cr.size, cluster_path,
                                                node.depth});
            } else if (u.uniform) {
                cr.action = "unresolved";
                unresolve(node, global, cluster_path, "below_min_cluster_size");
            } else if (cr.size == size) {
                cr.action = "unresolved";
                unresolve(node, global, cluster_path, "no_split");
            } else {
                cr.action = "recursed";
                cr.child_path = cluster_path;
                children.push_back({std::move(global), cluster_path});
            }
            node.clusters.push_back(cr);
        }
        if (!assignment.unassigned.empty()) {
            node.unassigned = static_cast<int>(assignment.unassigned.size());
            std::vector<std::size_t> global;
            for (std::size_t j : assignment.unassigned) global.push_back(samples[j]);
            unresolve(node, global, prefix + "/unassigned", "zero_activity");
        }

        return children;
    }

    const FeatureMatrix& x_;
    std::span<const std::string> labels_;
    const BuildConfig& cfg_;
    std::size_t workers_;
    std::vector<ArchiveEntry> entries_;
    std::vector<UnresolvedGroup> unresolved_;
    BuildReport report_;
};

} // namespace

BuildResult build_archive(const FeatureMatrix& x, std::span<const std::string> labels, const BuildConfig& cfg,
                          std::size_t workers, NormalizationParams normalization) {
    cfg.validate();
    if (labels.size() != static_cast<std::size_t>(x.samples()))
        throw Error(Errc::label_mismatch, std::to_string(labels.size()) + " labels for " +
                                              std::to_string(x.samples()) + " samples");
    if (x.samples() < 2) throw Error(Errc::invalid_argument, "need at least two samples to build an archive");
    for (const auto& label : labels)
        if (label.empty()) throw Error(Errc::label_mismatch, "empty label");

    if (normalization.input_features.empty()) {
        normalization.mode = NormalizationMode::none;
        normalization.input_features = x.feature_names();
        normalization.kept.resize(x.feature_names().size());
        std::iota(normalization.kept.begin(), normalization.kept.end(), std::size_t{0});
        normalization.scale.assign(x.feature_names().size(), 1.0);
    }

    Builder builder(x, labels, cfg, workers);
    std::vector<std::size_t> all(static_cast<std::size_t>(x.samples()));
    std::iota(all.begin(), all.end(), std::size_t{0});
    builder.visit(all, 0, "root");

    SignatureArchive archive;
    archive.feature_names = x.feature_names();
    archive.build_config = cfg;
    archive.normalization = std::move(normalization);
    BuildResult result = builder.finish(std::move(archive));

    std::size_t accounted = result.archive.unresolved_count();
    for (const auto& entry : result.archive.entries) accounted += static_cast<std::size_t>(entry.support);
    if (accounted != all.size()) throw std::logic_error("archive build lost track of samples");
    if (result.archive.entries.empty())
        throw Error(Errc::degenerate_build, "no cluster could be archived; all " + std::to_string(all.size()) +
                                                " samples are unresolved");
    return result;
}

} // namespace sigclass
