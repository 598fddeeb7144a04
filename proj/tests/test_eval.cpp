#include "oracles.hpp"

#include "sigclass/error.hpp"
#include "sigclass/eval.hpp"
#include "sigclass/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>

using namespace sigclass;

namespace {

struct Case {
    std::vector<ScoredPrediction> preds;
    std::vector<TruthRecord> truth;
};

// scores (0.9, 0.8, 0.7, 0.6), third prediction wrong
Case four_sample_case() {
    Case c;
    const double scores[] = {0.9, 0.8, 0.7, 0.6};
    const bool correct[] = {true, true, false, true};
    for (int i = 0; i < 4; ++i) {
        c.preds.push_back({"s" + std::to_string(i), true, correct[i] ? "A" : "B", scores[i]});
        c.truth.push_back({"A", false});
    }
    return c;
}

Case uniform_case(bool all_correct, int n) {
    Case c;
    for (int i = 0; i < n; ++i) {
        c.preds.push_back({"s" + std::to_string(i), i % 2 == 0, all_correct ? "A" : "B", 0.1 * (i % 5)});
        c.truth.push_back({"A", false});
    }
    return c;
}

} // namespace

TEST_SUITE("risk-coverage curve") {
    TEST_CASE("all-correct predictions have zero risk everywhere") {
        const auto c = uniform_case(true, 9);
        for (const auto& p : risk_coverage_curve(c.preds, c.truth)) CHECK(p.risk == 0.0);
    }

    TEST_CASE("all-wrong predictions have unit risk wherever something is covered") {
        const auto c = uniform_case(false, 9);
        for (const auto& p : risk_coverage_curve(c.preds, c.truth))
            if (p.coverage > 0.0) CHECK(p.risk == 1.0);
    }

    TEST_CASE("four-sample hand enumeration") {
        const auto c = four_sample_case();
        const auto curve = risk_coverage_curve(c.preds, c.truth);
        std::vector<std::pair<double, double>> covered;
        for (const auto& p : curve)
            if (p.coverage > 0.0 && p.threshold >= 0.6) covered.emplace_back(p.coverage, p.risk);
        REQUIRE(covered.size() == 4);
        const double cov[] = {0.25, 0.5, 0.75, 1.0};
        const double risk[] = {0.0, 0.0, 1.0 / 3.0, 0.25};
        for (int i = 0; i < 4; ++i) {
            CHECK(covered[i].first == doctest::Approx(cov[i]));
            CHECK(covered[i].second == doctest::Approx(risk[i]));
        }
    }

    TEST_CASE("coverage never increases with the threshold") {
        CounterRng rng(2);
        Case c;
        for (int i = 0; i < 40; ++i) {
            c.preds.push_back({"s" + std::to_string(i), true, rng.uniform(0, 1) < 0.7 ? "A" : "B",
                               std::round(rng.uniform(0, 1) * 10) / 10});
            c.truth.push_back({"A", rng.uniform(0, 1) < 0.1});
        }
        auto curve = risk_coverage_curve(c.preds, c.truth);
        std::sort(curve.begin(), curve.end(), [](auto& a, auto& b) { return a.threshold < b.threshold; });
        for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].coverage <= curve[i - 1].coverage);
        for (const auto& p : curve) {
            CHECK(p.risk >= 0.0);
            CHECK(p.risk <= 1.0);
        }
    }

    TEST_CASE("covered novel samples count as errors") {
        Case c;
        c.preds = {{"a", true, "A", 0.9}, {"b", true, "A", 0.8}};
        c.truth = {{"A", false}, {"A", true}};
        CHECK(risk_coverage_curve(c.preds, c.truth).back().risk == 0.5);
    }

    TEST_CASE("errors") {
        const std::vector<ScoredPrediction> none;
        const std::vector<TruthRecord> no_truth;
        CHECK_THROWS_AS(risk_coverage_curve(none, no_truth), Error);
        const auto c = four_sample_case();
        const std::span<const TruthRecord> short_truth(c.truth.data(), 3);
        CHECK_THROWS_AS(risk_coverage_curve(c.preds, short_truth), Error);
    }
}

TEST_SUITE("aurc") {
    TEST_CASE("perfect and hopeless predictors") {
        const auto good = uniform_case(true, 7);
        CHECK(aurc(risk_coverage_curve(good.preds, good.truth)) == 0.0);
        const auto bad = uniform_case(false, 7);
        CHECK(aurc(risk_coverage_curve(bad.preds, bad.truth)) == 1.0);
    }

    TEST_CASE("four-sample case matches the hand trapezoid") {
        // trapezoid over (1/4,0) (1/2,0) (3/4,1/3) (1,1/4), risk held at 0 below 1/4:
        //   0.25*(0+1/3)/2 + 0.25*(1/3+1/4)/2 = 1/24 + 7/96 = 11/96
        const auto c = four_sample_case();
        const double value = aurc(risk_coverage_curve(c.preds, c.truth));
        CHECK(std::abs(value - 11.0 / 96.0) <= 1e-15);
    }

    TEST_CASE("agrees with brute-force recomputation on small random instances") {
        CounterRng rng(19);
        for (int trial = 0; trial < 500; ++trial) {
            const int n = 1 + static_cast<int>(rng.index(12));
            Case c;
            for (int i = 0; i < n; ++i) {
                // coarse scores so that ties occur
                c.preds.push_back({"s" + std::to_string(i), true, rng.uniform(0, 1) < 0.6 ? "A" : "B",
                                   std::floor(rng.uniform(0, 1) * 6) / 6});
                c.truth.push_back({"A", rng.uniform(0, 1) < 0.15});
            }
            const double got = aurc(risk_coverage_curve(c.preds, c.truth));
            const double want = oracle::aurc_brute_force(c.preds, c.truth);
            CHECK(std::abs(got - want) <= 1e-12);
            CHECK(got >= 0.0);
            CHECK(got <= 1.0);
        }
    }

    TEST_CASE("sample order does not matter") {
        auto c = four_sample_case();
        const double base = aurc(risk_coverage_curve(c.preds, c.truth));
        std::reverse(c.preds.begin(), c.preds.end());
        std::reverse(c.truth.begin(), c.truth.end());
        CHECK(aurc(risk_coverage_curve(c.preds, c.truth)) == base);
    }

    TEST_CASE("malformed curves are rejected") {
        const std::vector<RiskCoveragePoint> unsorted = {{0.9, 0.5, 0.0}, {0.8, 0.25, 0.0}};
        CHECK_THROWS_AS(aurc(unsorted), Error);
        const std::vector<RiskCoveragePoint> out_of_range = {{0.9, 0.5, 1.5}};
        CHECK_THROWS_AS(aurc(out_of_range), Error);
    }
}

TEST_SUITE("classification metrics") {
    TEST_CASE("perfect predictions over three classes") {
        Case c;
        for (int i = 0; i < 9; ++i) {
            const std::string label(1, static_cast<char>('A' + i % 3));
            c.preds.push_back({"s" + std::to_string(i), true, label, 1.0});
            c.truth.push_back({label, false});
        }
        const auto m = classification_metrics(c.preds, c.truth);
        REQUIRE(m);
        CHECK(m->macro_f1 == 1.0);
        CHECK(m->macro_precision == 1.0);
        CHECK(m->macro_recall == 1.0);
    }

    TEST_CASE("recall counts covered samples only") {
        Case c;
        for (int i = 0; i < 6; ++i) {
            c.preds.push_back({"s" + std::to_string(i), i < 3, "A", 1.0});
            c.truth.push_back({"A", false});
        }
        const auto m = classification_metrics(c.preds, c.truth);
        REQUIRE(m);
        CHECK(m->macro_recall == 1.0);
        CHECK(m->covered == 3);
    }

    TEST_CASE("hand confusion matrix") {
        // truth A A A A B B, predicted A A A B B A
        // A: tp 3, fp 1, fn 1 -> P = R = F1 = 3/4
        // B: tp 1, fp 1, fn 1 -> P = R = F1 = 1/2
        const char* truth = "AAAABB";
        const char* pred = "AAABBA";
        Case c;
        for (int i = 0; i < 6; ++i) {
            c.preds.push_back({"s" + std::to_string(i), true, std::string(1, pred[i]), 1.0});
            c.truth.push_back({std::string(1, truth[i]), false});
        }
        const auto m = classification_metrics(c.preds, c.truth);
        REQUIRE(m);
        CHECK(std::abs(m->macro_f1 - 0.625) <= 1e-12);
        CHECK(std::abs(m->macro_precision - 0.625) <= 1e-12);
        CHECK(std::abs(m->macro_recall - 0.625) <= 1e-12);
    }

    TEST_CASE("no coverage yields an explicit empty result") {
        Case c;
        c.preds = {{"a", false, "", 0.1}};
        c.truth = {{"A", false}};
        CHECK_FALSE(classification_metrics(c.preds, c.truth).has_value());
        const auto report = evaluate(c.preds, c.truth);
        CHECK_FALSE(report.metrics.has_value());
        const auto doc = nlohmann::json::parse(eval_report_to_json(report));
        CHECK(doc.contains("aurc"));
    }
}

TEST_SUITE("rejection rates") {
    TEST_CASE("novel rejected, known kept") {
        Case c;
        c.preds = {{"a", true, "A", 1}, {"b", true, "B", 1}, {"n1", false, "", 0}, {"n2", false, "", 0}};
        c.truth = {{"A", false}, {"B", false}, {"Z", true}, {"Z", true}};
        const auto r = rejection_rates(c.preds, c.truth);
        CHECK(r.seen == 0.0);
        CHECK(r.novel == 1.0);
    }

    TEST_CASE("nothing rejected") {
        Case c;
        c.preds = {{"a", true, "A", 1}, {"n", true, "A", 1}};
        c.truth = {{"A", false}, {"Z", true}};
        const auto r = rejection_rates(c.preds, c.truth);
        CHECK(r.seen == 0.0);
        CHECK(r.novel == 0.0);
    }

    TEST_CASE("absent denominators give absent rates") {
        Case c;
        c.preds = {{"a", false, "", 0.2}};
        c.truth = {{"A", false}};
        const auto r = rejection_rates(c.preds, c.truth);
        CHECK(r.seen == 1.0);
        CHECK_FALSE(r.novel.has_value());
    }
}

TEST_SUITE("report output") {
    TEST_CASE("flat curve table") {
        const auto c = four_sample_case();
        const auto report = evaluate(c.preds, c.truth);
        const std::string csv = rc_curve_to_csv(report.rc_curve);
        CHECK(csv.rfind("threshold,coverage,risk\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(report.rc_curve.size()) + 1);
        CHECK(report.samples == 4);
        CHECK(report.operating_coverage == 1.0);
    }
}
