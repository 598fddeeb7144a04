#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sigclass {

/// What the evaluator needs from a prediction. `predicted_label` is the
/// label the classifier would emit if it did not abstain; it is used when
/// sweeping thresholds below the operating point.
struct ScoredPrediction {
    std::string sample_id;
    bool classified = false;
    std::string predicted_label;
    double score = 0.0;
};

struct TruthRecord {
    std::string label;
    bool novel = false;
};

struct RiskCoveragePoint {
    double threshold = 0.0;
    double coverage = 0.0;
    double risk = 0.0;
};

/// Sweeps a threshold over every distinct score (descending) plus one
/// sentinel above the maximum and one below the minimum. Coverage is the
/// fraction with score >= threshold; risk is the 0/1 loss over covered
/// samples, where covered novel samples are always errors. Points come out
/// in ascending coverage. `truth` is aligned with `predictions`.
std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const ScoredPrediction> predictions,
                                                   std::span<const TruthRecord> truth);

/// Trapezoidal area under risk over coverage. Below the smallest positive
/// coverage the risk is held at that point's value, so a predictor that is
/// always wrong scores exactly 1 and one that is always right exactly 0.
double aurc(std::span<const RiskCoveragePoint> curve);

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassificationMetrics {
    double macro_f1 = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    std::size_t covered = 0;
    std::vector<ClassMetrics> per_class;
};

/// Macro-averaged metrics over classified samples only, across the truth
/// labels present among them. Returns nullopt when nothing was classified.
std::optional<ClassificationMetrics> classification_metrics(std::span<const ScoredPrediction> predictions,
                                                            std::span<const TruthRecord> truth);

struct RejectionRates {
    std::optional<double> seen;   // rejected known / known
    std::optional<double> novel;  // rejected novel / novel
};

RejectionRates rejection_rates(std::span<const ScoredPrediction> predictions, std::span<const TruthRecord> truth);

struct EvalReport {
    std::vector<RiskCoveragePoint> rc_curve;
    double aurc = 0.0;
    std::optional<ClassificationMetrics> metrics;
    RejectionRates rejection;
    double operating_coverage = 0.0;
    std::size_t samples = 0;
    std::size_t known_samples = 0;
    std::size_t novel_samples = 0;
};

EvalReport evaluate(std::span<const ScoredPrediction> predictions, std::span<const TruthRecord> truth);

std::string eval_report_to_json(const EvalReport& report);
std::string rc_curve_to_csv(std::span<const RiskCoveragePoint> curve);

} // namespace sigclass
