#include "sigclass/cli.hpp"

#include "detail.hpp"
#include "sigclass/archive.hpp"
#include "sigclass/dataio.hpp"
#include "sigclass/error.hpp"
#include "sigclass/eval.hpp"
#include "sigclass/inference.hpp"
#include "sigclass/rng.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <unordered_map>

namespace sigclass::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

struct SynthArgs {
    std::string out_dir;
    int n_features = 40;
    int n_classes = 4;
    int samples_per_class = 250;
    double overlap = 0.1;
    double noise = 0.02;
    std::string holdout;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct BuildArgs {
    std::string features, labels, out, report;
    std::string normalize = "per_feature_max";
    BuildConfig cfg;
    std::size_t workers = 1;
};

struct ClassifyArgs {
    std::string archive, features, out;
    InferenceConfig cfg;
    std::size_t workers = 1;
};

struct EvaluateArgs {
    std::string predictions, truth, out, curve;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    require(a.overlap >= 0.0 && a.overlap < 1.0, "--overlap must lie in [0, 1)");
    require(a.noise >= 0.0, "--noise must be nonnegative");
    require(a.test_fraction > 0.0 && a.test_fraction < 1.0, "--test-fraction must lie in (0, 1)");
    require(a.n_features >= 1, "--n-features must be positive");
    require(a.n_classes >= 1, "--n-classes must be positive");
    require(a.samples_per_class >= 1, "--samples-per-class must be positive");

    SynthSpec spec;
    spec.n_features = a.n_features;
    spec.n_classes = a.n_classes;
    spec.samples_per_class = a.samples_per_class;
    spec.signature_overlap = a.overlap;
    spec.noise_sigma = a.noise;
    if (!a.holdout.empty()) spec.holdout_class = a.holdout;
    spec.seed = a.seed;
    const SyntheticData data = generate_synthetic(spec);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    save_csv(data.dataset, dir / "features.csv", dir / "labels.csv");
    detail::write_text_file(dir / "truth.json", synthetic_truth_json(spec, data));
    out << "wrote " << data.dataset.features().features() << " features x " << data.dataset.features().samples()
        << " samples to " << dir.string() << "\n";
    if (spec.holdout_class) {
        const std::uint64_t split_seed = CounterRng(a.seed).split(kSplitStream).next_u64();
        const HoldoutSplit split = split_holdout(data.dataset, *spec.holdout_class, a.test_fraction, split_seed);
        save_csv(split.train, dir / "train_features.csv", dir / "train_labels.csv");
        save_features_csv(split.test.features(), dir / "test_features.csv");
        save_truth_csv(split.test, split.novel_flags, dir / "test_truth.csv");
        out << "holdout '" << *spec.holdout_class << "': " << split.train.features().samples() << " train, "
            << split.test.features().samples() << " test samples\n";
    }
    for (const auto& w : data.truth.warnings) out << "warning: " << w << "\n";
    return kExitOk;
}

int cmd_build(BuildArgs a, std::ostream& out) {
    require(a.workers >= 1, "--workers must be at least 1");
    NormalizationMode mode;
    try {
        mode = parse_normalization_mode(a.normalize);
    } catch (const Error&) {
        throw UsageError("--normalize must be per_feature_max or none");
    }
    a.cfg.ensemble.base_seed = a.cfg.seed;
    try {
        a.cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const LabeledDataset raw = load_csv(a.features, a.labels);
    NormalizedDataset norm = normalize(raw, mode);
    const BuildResult result =
        build_archive(norm.dataset.features(), norm.dataset.labels(), a.cfg, a.workers, norm.params);

    const fs::path archive_path(a.out);
    const fs::path report_path = a.report.empty() ? fs::path(a.out + ".report.json") : fs::path(a.report);
    try {
        save_archive(result.archive, archive_path);
        detail::write_text_file(report_path, build_report_to_json(result.report));
    } catch (...) {
        std::error_code ec;
        fs::remove(archive_path, ec);
        fs::remove(report_path, ec);
        throw;
    }
    out << "archive: " << result.archive.entries.size() << " signatures, " << result.archive.unresolved_count()
        << " unresolved samples, depth " << result.report.max_depth() << "\n";
    for (const auto& node : result.report.nodes)
        if (node.k > 0) out << "  " << node.path << ": " << node.n_samples << " samples, k=" << node.k << "\n";
    for (const auto& dropped : norm.params.dropped) out << "warning: dropped all-zero feature '" << dropped << "'\n";
    return kExitOk;
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
    require(a.workers >= 1, "--workers must be at least 1");
    try {
        a.cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const SignatureArchive archive = load_archive(a.archive);
    const FeatureMatrix raw = load_features_csv(a.features);
    const FeatureMatrix x = apply_normalization(archive.normalization, raw);
    const BatchResult batch = classify_batch(x, archive, a.cfg, a.workers);

    std::map<std::size_t, const Prediction*> by_index;
    std::map<std::size_t, const SampleError*> errors;
    {
        std::size_t p = 0;
        std::size_t e = 0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(x.samples()); ++j) {
            if (e < batch.errors.size() && batch.errors[e].index == j)
                errors[j] = &batch.errors[e++];
            else
                by_index[j] = &batch.predictions[p++];
        }
    }
    std::string csv = "sample_id,decision,label,score,attribution,attributed_label\n";
    std::size_t classified = 0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(x.samples()); ++j) {
        if (auto it = errors.find(j); it != errors.end()) {
            csv += detail::csv_field(x.sample_ids()[j]) + ",error,,0,,\n";
            err << "sample '" << it->second->sample_id << "': " << it->second->message << "\n";
            continue;
        }
        const Prediction& p = *by_index[j];
        classified += p.decision == Decision::classified ? 1 : 0;
        csv += detail::csv_field(p.sample_id) + "," + to_string(p.decision) + "," +
               detail::csv_field(p.label.value_or("")) + "," + detail::format_double(p.score) + "," +
               detail::csv_field(p.attribution) + "," + detail::csv_field(p.attributed_label) + "\n";
    }
    detail::write_text_file(a.out, csv);
    out << "classified " << classified << " of " << x.samples() << " samples at t=" << a.cfg.t << " ("
        << x.samples() - static_cast<Eigen::Index>(classified) << " rejected as novel)\n";
    return kExitOk;
}

std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < header.size(); ++i) idx.emplace(header[i], i);
    return idx;
}

std::size_t column(const std::map<std::string, std::size_t>& idx, const std::string& name, const std::string& file) {
    const auto it = idx.find(name);
    if (it == idx.end()) throw Error(Errc::missing_column, file + " has no '" + name + "' column");
    return it->second;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const auto pred_rows = detail::read_csv(a.predictions);
    const auto truth_rows = detail::read_csv(a.truth);
    if (pred_rows.size() < 2) throw Error(Errc::empty_input, a.predictions + " has no predictions");
    if (truth_rows.empty()) throw Error(Errc::empty_input, a.truth + " is empty");

    const auto ph = header_index(pred_rows.front());
    const std::size_t p_id = column(ph, "sample_id", a.predictions);
    const std::size_t p_decision = column(ph, "decision", a.predictions);
    const std::size_t p_score = column(ph, "score", a.predictions);
    const std::size_t p_label = ph.count("attributed_label") ? ph.at("attributed_label") : column(ph, "label", a.predictions);

    const auto th = header_index(truth_rows.front());
    const std::size_t t_id = column(th, "sample_id", a.truth);
    const std::size_t t_label = column(th, "label", a.truth);
    const std::size_t t_novel = column(th, "novel", a.truth);

    std::unordered_map<std::string, TruthRecord> truth_by_id;
    for (std::size_t r = 1; r < truth_rows.size(); ++r) {
        const auto& row = truth_rows[r];
        if (row.size() != truth_rows.front().size())
            throw Error(Errc::parse, a.truth + ": row " + std::to_string(r) + " has the wrong number of cells");
        const std::string& flag = row[t_novel];
        if (flag != "0" && flag != "1")
            throw Error(Errc::parse, a.truth + ": novel flag must be 0 or 1, got '" + flag + "'");
        if (!truth_by_id.emplace(row[t_id], TruthRecord{row[t_label], flag == "1"}).second)
            throw Error(Errc::id_mismatch, a.truth + ": duplicate sample id '" + row[t_id] + "'");
    }

    std::vector<ScoredPrediction> preds;
    std::vector<TruthRecord> truth;
    for (std::size_t r = 1; r < pred_rows.size(); ++r) {
        const auto& row = pred_rows[r];
        if (row.size() != pred_rows.front().size())
            throw Error(Errc::parse, a.predictions + ": row " + std::to_string(r) + " has the wrong number of cells");
        const auto score = detail::parse_double(row[p_score]);
        if (!score || !std::isfinite(*score))
            throw Error(Errc::parse, a.predictions + ": bad score '" + row[p_score] + "'");
        const std::string& decision = row[p_decision];
        if (decision != "classified" && decision != "rejected" && decision != "error")
            throw Error(Errc::parse, a.predictions + ": unknown decision '" + decision + "'");
        const auto it = truth_by_id.find(row[p_id]);
        if (it == truth_by_id.end())
            throw Error(Errc::id_mismatch, "prediction for '" + row[p_id] + "' has no truth record");
        preds.push_back(ScoredPrediction{row[p_id], decision == "classified", row[p_label], *score});
        truth.push_back(it->second);
    }
    if (truth.size() != truth_by_id.size())
        throw Error(Errc::id_mismatch, a.truth + " lists samples missing from " + a.predictions);
    {
        std::unordered_map<std::string, int> seen;
        for (const auto& p : preds)
            if (++seen[p.sample_id] > 1) throw Error(Errc::id_mismatch, "duplicate prediction for '" + p.sample_id + "'");
    }

    const EvalReport report = evaluate(preds, truth);
    const std::string curve_path = a.curve.empty() ? fs::path(a.out).replace_extension(".rc.csv").string() : a.curve;
    try {
        detail::write_text_file(a.out, eval_report_to_json(report));
        detail::write_text_file(curve_path, rc_curve_to_csv(report.rc_curve));
    } catch (...) {
        std::error_code ec;
        fs::remove(a.out, ec);
        fs::remove(curve_path, ec);
        throw;
    }
    out << "samples " << report.samples << " (" << report.novel_samples << " novel), coverage "
        << report.operating_coverage << ", AURC " << report.aurc << "\n";
    if (report.metrics)
        out << "macro F1 " << report.metrics->macro_f1 << ", precision " << report.metrics->macro_precision
            << ", recall " << report.metrics->macro_recall << " over " << report.metrics->covered
            << " classified samples\n";
    else
        out << "no coverage: every sample was rejected\n";
    if (report.rejection.seen) out << "rejection seen " << *report.rejection.seen << "\n";
    if (report.rejection.novel) out << "rejection novel " << *report.rejection.novel << "\n";
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Latent-signature archive classifier with a reject option", "sigclass"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate labeled synthetic data with known signatures");
    synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--n-features", synth.n_features, "Number of features");
    synth_cmd->add_option("--n-classes", synth.n_classes, "Number of classes");
    synth_cmd->add_option("--samples-per-class", synth.samples_per_class, "Samples per class");
    synth_cmd->add_option("--overlap", synth.overlap, "Pairwise cosine between class signatures, in [0, 1)");
    synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma (truncated at zero)");
    synth_cmd->add_option("--holdout", synth.holdout, "Class to hold out as novel; also writes a train/test split");
    synth_cmd->add_option("--test-fraction", synth.test_fraction, "Test share of each seen class");
    synth_cmd->add_option("--seed", synth.seed, "Random seed");

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Build a signature archive from labeled features");
    build_cmd->add_option("--features", build.features, "Features CSV")->required();
    build_cmd->add_option("--labels", build.labels, "Labels CSV")->required();
    build_cmd->add_option("--out", build.out, "Archive output path")->required();
    build_cmd->add_option("--report", build.report, "Build report path (default: <out>.report.json)");
    build_cmd->add_option("--normalize", build.normalize, "per_feature_max or none");
    build_cmd->add_option("--purity", build.cfg.purity_threshold, "Purity threshold for a uniform cluster");
    build_cmd->add_option("--min-cluster-size", build.cfg.min_cluster_size, "Smallest archivable cluster");
    build_cmd->add_option("--max-depth", build.cfg.max_depth, "Maximum hierarchy depth");
    build_cmd->add_option("--perturbations", build.cfg.ensemble.n_perturbations, "Ensemble size per k");
    build_cmd->add_option("--epsilon", build.cfg.ensemble.noise_epsilon, "Perturbation noise level");
    build_cmd->add_option("--k-min", build.cfg.ensemble.k_min, "Smallest rank scanned");
    build_cmd->add_option("--k-max", build.cfg.ensemble.k_max, "Largest rank scanned");
    build_cmd->add_option("--silhouette-threshold", build.cfg.ensemble.silhouette_threshold,
                          "Minimum cluster silhouette for a stable rank");
    build_cmd->add_option("--max-iter", build.cfg.ensemble.solver.max_iter, "NMF iteration cap");
    build_cmd->add_option("--tol", build.cfg.ensemble.solver.tol, "NMF relative convergence tolerance");
    build_cmd->add_option("--seed", build.cfg.seed, "Random seed");
    build_cmd->add_option("--workers", build.workers, "Worker threads");

    ClassifyArgs classify;
    auto* classify_cmd = app.add_subcommand("classify", "Classify samples against an archive");
    classify_cmd->add_option("--archive", classify.archive, "Archive file")->required();
    classify_cmd->add_option("--features", classify.features, "Features CSV")->required();
    classify_cmd->add_option("--out", classify.out, "Predictions CSV output")->required();
    classify_cmd->add_option("--t", classify.cfg.t, "Similarity threshold in [0, 1]");
    classify_cmd->add_option("--score-tolerance", classify.cfg.score_tolerance, "Slack below t still accepted");
    classify_cmd->add_option("--workers", classify.workers, "Worker threads");

    EvaluateArgs evaluate_args;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Selective-classification metrics for a predictions file");
    evaluate_cmd->add_option("--predictions", evaluate_args.predictions, "Predictions CSV")->required();
    evaluate_cmd->add_option("--truth", evaluate_args.truth, "Truth CSV with sample_id,label,novel")->required();
    evaluate_cmd->add_option("--out", evaluate_args.out, "Report JSON output")->required();
    evaluate_cmd->add_option("--curve", evaluate_args.curve, "Risk-coverage CSV (default: <out>.rc.csv)");

    std::vector<std::string> argv_storage{"sigclass"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_storage) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth, out);
        if (build_cmd->parsed()) return cmd_build(build, out);
        if (classify_cmd->parsed()) return cmd_classify(classify, out, err);
        if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate_args, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_usage_error(e.code()) ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace sigclass::cli
