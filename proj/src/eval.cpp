#include "sigclass/eval.hpp"

#include "detail.hpp"
#include "sigclass/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace sigclass {

namespace {

void check_aligned(std::span<const ScoredPrediction> predictions, std::span<const TruthRecord> truth) {
    if (predictions.empty()) throw Error(Errc::empty_input, "no predictions to evaluate");
    if (predictions.size() != truth.size())
        throw Error(Errc::id_mismatch, std::to_string(predictions.size()) + " predictions but " +
                                           std::to_string(truth.size()) + " truth records");
}

bool is_error(const ScoredPrediction& p, const TruthRecord& t) { return t.novel || p.predicted_label != t.label; }

} // namespace

std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const ScoredPrediction> predictions,
                                                   std::span<const TruthRecord> truth) {
    check_aligned(predictions, truth);
    for (const auto& p : predictions)
        if (!std::isfinite(p.score)) throw Error(Errc::non_finite_input, "score of '" + p.sample_id + "' is not finite");

    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return predictions[a].score > predictions[b].score; });

    const double total = static_cast<double>(predictions.size());
    const double max_score = predictions[order.front()].score;
    const double min_score = predictions[order.back()].score;

    std::vector<RiskCoveragePoint> curve;
    curve.push_back({max_score + 1.0, 0.0, 0.0});
    std::size_t covered = 0;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = predictions[order[i]].score;
        while (i < order.size() && predictions[order[i]].score == threshold) {
            if (is_error(predictions[order[i]], truth[order[i]])) ++errors;
            ++covered;
            ++i;
        }
        curve.push_back({threshold, static_cast<double>(covered) / total,
                         static_cast<double>(errors) / static_cast<double>(covered)});
    }
    curve.push_back({min_score - 1.0, 1.0, curve.back().risk});
    return curve;
}

double aurc(std::span<const RiskCoveragePoint> curve) {
    if (curve.empty()) throw Error(Errc::invalid_argument, "empty risk-coverage curve");
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const auto& p = curve[i];
        if (!(p.coverage >= 0.0 && p.coverage <= 1.0) || !(p.risk >= 0.0 && p.risk <= 1.0))
            throw Error(Errc::invalid_argument, "curve point out of range");
        if (i > 0 && p.coverage < curve[i - 1].coverage)
            throw Error(Errc::invalid_argument, "curve coverages are not sorted ascending");
    }
    std::size_t first = 0;
    while (first < curve.size() && curve[first].coverage == 0.0) ++first;
    if (first == curve.size()) return 0.0;
    double area = curve[first].coverage * curve[first].risk;
    for (std::size_t i = first + 1; i < curve.size(); ++i)
        area += 0.5 * (curve[i].risk + curve[i - 1].risk) * (curve[i].coverage - curve[i - 1].coverage);
    return std::clamp(area, 0.0, 1.0);
}

std::optional<ClassificationMetrics> classification_metrics(std::span<const ScoredPrediction> predictions,
                                                            std::span<const TruthRecord> truth) {
    check_aligned(predictions, truth);
    struct Counts {
        std::size_t tp = 0, fp = 0, fn = 0;
    };
    std::map<std::string, Counts> classes;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!predictions[i].classified) continue;
        ++covered;
        classes[truth[i].label];
    }
    if (covered == 0) return std::nullopt;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!predictions[i].classified) continue;
        const std::string& predicted = predictions[i].predicted_label;
        const std::string& actual = truth[i].label;
        if (predicted == actual && !truth[i].novel) {
            ++classes[actual].tp;
        } else {
            ++classes[actual].fn;
            if (auto it = classes.find(predicted); it != classes.end()) ++it->second.fp;
        }
    }
    ClassificationMetrics out;
    out.covered = covered;
    for (const auto& [label, c] : classes) {
        ClassMetrics m;
        m.label = label;
        m.support = c.tp + c.fn;
        m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
        m.recall = m.support > 0 ? static_cast<double>(c.tp) / static_cast<double>(m.support) : 0.0;
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        out.macro_precision += m.precision;
        out.macro_recall += m.recall;
        out.macro_f1 += m.f1;
        out.per_class.push_back(std::move(m));
    }
    const auto k = static_cast<double>(out.per_class.size());
    out.macro_precision /= k;
    out.macro_recall /= k;
    out.macro_f1 /= k;
    return out;
}

RejectionRates rejection_rates(std::span<const ScoredPrediction> predictions, std::span<const TruthRecord> truth) {
    check_aligned(predictions, truth);
    std::size_t known = 0, known_rejected = 0, novel = 0, novel_rejected = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool rejected = !predictions[i].classified;
        if (truth[i].novel) {
            ++novel;
            novel_rejected += rejected ? 1 : 0;
        } else {
            ++known;
            known_rejected += rejected ? 1 : 0;
        }
    }
    RejectionRates out;
    if (known > 0) out.seen = static_cast<double>(known_rejected) / static_cast<double>(known);
    if (novel > 0) out.novel = static_cast<double>(novel_rejected) / static_cast<double>(novel);
    return out;
}

EvalReport evaluate(std::span<const ScoredPrediction> predictions, std::span<const TruthRecord> truth) {
    EvalReport r;
    r.rc_curve = risk_coverage_curve(predictions, truth);
    r.aurc = aurc(r.rc_curve);
    r.metrics = classification_metrics(predictions, truth);
    r.rejection = rejection_rates(predictions, truth);
    r.samples = predictions.size();
    std::size_t classified = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        classified += predictions[i].classified ? 1 : 0;
        (truth[i].novel ? r.novel_samples : r.known_samples) += 1;
    }
    r.operating_coverage = static_cast<double>(classified) / static_cast<double>(predictions.size());
    return r;
}

std::string eval_report_to_json(const EvalReport& report) {
    using json = nlohmann::ordered_json;
    auto optional_number = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = "eval_report";
    doc["samples"] = report.samples;
    doc["known_samples"] = report.known_samples;
    doc["novel_samples"] = report.novel_samples;
    doc["aurc"] = report.aurc;
    doc["operating_coverage"] = report.operating_coverage;
    doc["averaging"] = "macro over classified samples";
    json metrics;
    if (report.metrics) {
        metrics["macro_f1"] = report.metrics->macro_f1;
        metrics["macro_precision"] = report.metrics->macro_precision;
        metrics["macro_recall"] = report.metrics->macro_recall;
        metrics["covered"] = report.metrics->covered;
        json per_class = json::array();
        for (const auto& c : report.metrics->per_class)
            per_class.push_back({{"label", c.label},
                                 {"precision", c.precision},
                                 {"recall", c.recall},
                                 {"f1", c.f1},
                                 {"support", c.support}});
        metrics["per_class"] = std::move(per_class);
    } else {
        metrics = "no coverage";
    }
    doc["classification"] = std::move(metrics);
    doc["rejection_seen"] = optional_number(report.rejection.seen);
    doc["rejection_novel"] = optional_number(report.rejection.novel);
    json curve = json::array();
    for (const auto& p : report.rc_curve)
        curve.push_back({{"threshold", p.threshold}, {"coverage", p.coverage}, {"risk", p.risk}});
    doc["rc_curve"] = std::move(curve);
    return doc.dump(2) + "\n";
}

std::string rc_curve_to_csv(std::span<const RiskCoveragePoint> curve) {
    std::string out = "threshold,coverage,risk\n";
    for (const auto& p : curve)
        out += detail::format_double(p.threshold) + "," + detail::format_double(p.coverage) + "," +
               detail::format_double(p.risk) + "\n";
    return out;
}

} // namespace sigclass
