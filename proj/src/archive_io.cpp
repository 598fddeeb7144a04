#include "sigclass/archive.hpp"

#include "detail.hpp"
#include "sigclass/error.hpp"

#include <json.hpp>

namespace sigclass {

using json = nlohmann::ordered_json;

namespace {

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json solver_json(const SolverOptions& s) {
    return {{"tol", s.tol}, {"max_iter", s.max_iter}, {"check_every", s.check_every}};
}

json config_json(const BuildConfig& cfg, const NormalizationParams& norm) {
    const EnsembleConfig& e = cfg.ensemble;
    json out;
    out["purity_threshold"] = cfg.purity_threshold;
    out["min_cluster_size"] = cfg.min_cluster_size;
    out["max_depth"] = cfg.max_depth;
    out["seed"] = cfg.seed;
    out["ensemble"] = {{"n_perturbations", e.n_perturbations}, {"noise_epsilon", e.noise_epsilon},
                       {"k_min", e.k_min},
                       {"k_max", e.k_max},
                       {"silhouette_threshold", e.silhouette_threshold},
                       {"base_seed", e.base_seed},
                       {"solver", solver_json(e.solver)}};
    out["normalization"] = {{"mode", to_string(norm.mode)},
                            {"input_features", norm.input_features},
                            {"kept", norm.kept},
                            {"scale", norm.scale},
                            {"dropped", norm.dropped}};
    return out;
}

json rank_json(const RankSelectionReport& r) {
    json per_k = json::array();
    for (const auto& s : r.per_k)
        per_k.push_back({{"k", s.k},
                         {"min_silhouette", s.min_silhouette},
                         {"mean_silhouette", s.mean_silhouette},
                         {"mean_relative_error", s.mean_relative_error},
                         {"successful_members", s.successful_members}});
    return {{"per_k", per_k},
            {"selected_k", r.selected_k},
            {"selection_rule_fired", to_string(r.selection_rule_fired)},
            {"diagnostics", r.diagnostics}};
}

} // namespace

std::string archive_to_json(const SignatureArchive& archive) {
    json doc;
    doc["schema_version"] = kArchiveSchemaVersion;
    doc["feature_names"] = archive.feature_names;
    doc["build_config"] = config_json(archive.build_config, archive.normalization);
    json entries = json::array();
    for (const auto& e : archive.entries)
        entries.push_back({{"signature", to_std(e.signature)},
                           {"label", e.label},
                           {"purity", e.purity},
                           {"support", e.support},
                           {"path", e.path},
                           {"depth", e.depth}});
    doc["entries"] = std::move(entries);
    json unresolved = json::array();
    for (const auto& u : archive.unresolved)
        unresolved.push_back({{"path", u.path}, {"sample_ids", u.sample_ids}, {"reason", u.reason}});
    doc["unresolved"] = std::move(unresolved);
    return doc.dump(2) + "\n";
}

SignatureArchive archive_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::corrupt_file, std::string("archive is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw Error(Errc::corrupt_file, "archive has no schema_version");
    if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != kArchiveSchemaVersion)
        throw Error(Errc::schema_version, "unsupported archive schema_version " + doc["schema_version"].dump() +
                                              ", expected " + std::to_string(kArchiveSchemaVersion));
    SignatureArchive a;
    try {
        a.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        const json& cfg = doc.at("build_config");
        a.build_config.purity_threshold = cfg.at("purity_threshold").get<double>();
        a.build_config.min_cluster_size = cfg.at("min_cluster_size").get<int>();
        a.build_config.max_depth = cfg.at("max_depth").get<int>();
        a.build_config.seed = cfg.at("seed").get<std::uint64_t>();
        const json& ens = cfg.at("ensemble");
        EnsembleConfig& e = a.build_config.ensemble;
        e.n_perturbations = ens.at("n_perturbations").get<int>();
        e.noise_epsilon = ens.at("noise_epsilon").get<double>();
        e.k_min = ens.at("k_min").get<int>();
        e.k_max = ens.at("k_max").get<int>();
        e.silhouette_threshold = ens.at("silhouette_threshold").get<double>();
        e.base_seed = ens.at("base_seed").get<std::uint64_t>();
        e.solver.tol = ens.at("solver").at("tol").get<double>();
        e.solver.max_iter = ens.at("solver").at("max_iter").get<int>();
        e.solver.check_every = ens.at("solver").at("check_every").get<int>();
        const json& norm = cfg.at("normalization");
        a.normalization.mode = parse_normalization_mode(norm.at("mode").get<std::string>());
        a.normalization.input_features = norm.at("input_features").get<std::vector<std::string>>();
        a.normalization.kept = norm.at("kept").get<std::vector<std::size_t>>();
        a.normalization.scale = norm.at("scale").get<std::vector<double>>();
        a.normalization.dropped = norm.at("dropped").get<std::vector<std::string>>();
        for (const auto& item : doc.at("entries")) {
            ArchiveEntry entry;
            entry.signature = to_eigen(item.at("signature").get<std::vector<double>>());
            entry.label = item.at("label").get<std::string>();
            entry.purity = item.at("purity").get<double>();
            entry.support = item.at("support").get<int>();
            entry.path = item.at("path").get<std::string>();
            entry.depth = item.at("depth").get<int>();
            a.entries.push_back(std::move(entry));
        }
        for (const auto& item : doc.at("unresolved"))
            a.unresolved.push_back(UnresolvedGroup{item.at("path").get<std::string>(),
                                                   item.at("sample_ids").get<std::vector<std::string>>(),
                                                   item.at("reason").get<std::string>()});
    } catch (const json::exception& e) {
        throw Error(Errc::corrupt_file, std::string("malformed archive: ") + e.what());
    } catch (const Error& e) {
        throw Error(Errc::corrupt_file, std::string("malformed archive: ") + e.what());
    }

    const auto n = static_cast<Eigen::Index>(a.feature_names.size());
    for (const auto& entry : a.entries)
        if (entry.signature.size() != n)
            throw Error(Errc::corrupt_file, "entry " + entry.path + " has " + std::to_string(entry.signature.size()) +
                                                " values for " + std::to_string(n) + " features");
    if (a.normalization.kept.size() != a.normalization.scale.size() ||
        a.normalization.kept.size() != a.feature_names.size())
        throw Error(Errc::corrupt_file, "normalization block does not match the feature count");
    for (std::size_t idx : a.normalization.kept)
        if (idx >= a.normalization.input_features.size())
            throw Error(Errc::corrupt_file, "normalization refers to a missing input feature");
    return a;
}

void save_archive(const SignatureArchive& archive, const std::filesystem::path& path) {
    detail::write_text_file(path, archive_to_json(archive));
}

SignatureArchive load_archive(const std::filesystem::path& path) {
    return archive_from_json(detail::read_text_file(path));
}

std::string build_report_to_json(const BuildReport& report) {
    json nodes = json::array();
    for (const auto& node : report.nodes) {
        json n;
        n["path"] = node.path;
        n["depth"] = node.depth;
        n["n_samples"] = node.n_samples;
        json counts = json::object();
        for (const auto& [label, count] : node.label_counts) counts[label] = count;
        n["label_counts"] = std::move(counts);
        n["outcome"] = node.outcome;
        n["reason"] = node.reason;
        n["k"] = node.k;
        n["relative_error"] = node.relative_error;
        n["rank_selection"] = node.rank ? rank_json(*node.rank) : json(nullptr);
        json clusters = json::array();
        for (const auto& c : node.clusters)
            clusters.push_back({{"index", c.index},
                                {"size", c.size},
                                {"majority_label", c.majority_label},
                                {"purity", c.purity},
                                {"uniform", c.uniform},
                                {"action", c.action},
                                {"child_path", c.child_path}});
        n["clusters"] = std::move(clusters);
        n["unassigned"] = node.unassigned;
        json sigs = json::array();
        for (Eigen::Index s = 0; s < node.signatures.cols(); ++s) sigs.push_back(to_std(node.signatures.col(s)));
        n["signatures"] = std::move(sigs);
        nodes.push_back(std::move(n));
    }
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "build_report";
    doc["max_depth"] = report.max_depth();
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

} // namespace sigclass
