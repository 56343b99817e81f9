#include <catch_amalgamated.hpp>

#include <random>

#include "recov/metrics.hpp"

using namespace recov;
using namespace recov::metrics;

TEST_CASE("brier score basics") {
    CHECK(brier({1.0, 0.0, 1.0}, {1, 0, 1}) == 0.0);
    CHECK(brier({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == Catch::Approx(0.25));
    CHECK(brier({0.2, 0.8}, {0, 1}) == Catch::Approx(0.04));
    CHECK_THROWS_AS(brier({}, {}), RangeError);
}

TEST_CASE("brier decomposition for a constant prediction") {
    // for constant c on labels with rate r: brier = (c-r)^2 + r(1-r)
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const double c = 0.05 + 0.9 * (rng() % 100) / 100.0;
        std::vector<int> labels;
        for (int i = 0; i < 500; ++i) labels.push_back(rng() % 100 < 37 ? 1 : 0);
        double r = 0.0;
        for (int y : labels) r += y;
        r /= labels.size();
        const std::vector<double> preds(labels.size(), c);
        CHECK(brier(preds, labels) == Catch::Approx((c - r) * (c - r) + r * (1 - r)));
    }
}

TEST_CASE("normalized brier") {
    const std::vector<int> labels{1, 0, 0, 1, 0};
    SECTION("baseline predictions score exactly 1") {
        const std::vector<double> preds(labels.size(), 0.4);
        CHECK(normalized_brier(preds, labels, 0.4) == Catch::Approx(1.0));
    }
    SECTION("perfect predictions score 0") {
        CHECK(normalized_brier({1, 0, 0, 1, 0}, labels, 0.4) == 0.0);
    }
    SECTION("degenerate baselines are rejected") {
        CHECK_THROWS_AS(normalized_brier({0.5}, {1}, 0.0), RangeError);
        CHECK_THROWS_AS(normalized_brier({0.5}, {1}, 1.0), RangeError);
    }
}

TEST_CASE("log loss and its normalization") {
    const std::vector<int> labels{1, 0, 1, 0};
    CHECK(logloss({0.5, 0.5, 0.5, 0.5}, labels) == Catch::Approx(std::log(2.0)));
    CHECK(normalized_logloss({0.5, 0.5, 0.5, 0.5}, labels, 0.5) == Catch::Approx(1.0));
    // hard correct predictions collapse to the clipping floor
    CHECK(logloss({1.0, 0.0, 1.0, 0.0}, labels) < 1e-10);
}

TEST_CASE("auroc") {
    SECTION("perfect separation") {
        CHECK(auroc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    }
    SECTION("reversing predictions flips the score") {
        const std::vector<double> preds{0.1, 0.7, 0.4, 0.9, 0.3};
        const std::vector<int> labels{0, 1, 1, 1, 0};
        std::vector<double> reversed;
        for (double p : preds) reversed.push_back(1.0 - p);
        CHECK(auroc(reversed, labels) == Catch::Approx(1.0 - auroc(preds, labels)));
    }
    SECTION("independent predictions score about one half") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> preds;
        std::vector<int> labels;
        for (int i = 0; i < 10000; ++i) {
            preds.push_back(u(rng));
            labels.push_back(u(rng) < 0.3 ? 1 : 0);
        }
        CHECK(std::fabs(auroc(preds, labels) - 0.5) < 0.02);
    }
    SECTION("invariant under strictly increasing transforms") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.01, 0.99);
        std::vector<double> preds, squashed;
        std::vector<int> labels;
        for (int i = 0; i < 500; ++i) {
            const double p = u(rng);
            preds.push_back(p);
            squashed.push_back(std::log(p / (1 - p)) * 3.0 + 1.0);
            labels.push_back(u(rng) < p ? 1 : 0);
        }
        CHECK(auroc(preds, labels) == Catch::Approx(auroc(squashed, labels)));
    }
    SECTION("ties get midranks") {
        // all-equal predictions are exactly chance
        CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == Catch::Approx(0.5));
    }
    SECTION("one-class input is an error") {
        CHECK_THROWS_AS(auroc({0.5, 0.6}, {1, 1}), RangeError);
    }
}

TEST_CASE("calibration summary") {
    const auto s = calibration_summary({1.0, 0.0, 1.0, 0.0}, {1, 0, 1, 0});
    CHECK(s.gap == 0.0);
    const auto t = calibration_summary({0.3, 0.5}, {0, 0});
    CHECK(t.mean_prediction == Catch::Approx(0.4));
    CHECK(t.positive_rate == 0.0);
    CHECK(t.gap == Catch::Approx(0.4));
}

TEST_CASE("evaluate handles empty and one-class validation gracefully") {
    const auto empty = evaluate({}, {}, 0.3);
    CHECK(empty.n == 0);
    CHECK(std::isnan(empty.brier));

    const auto one_class = evaluate({0.4, 0.6}, {1, 1}, 0.3);
    CHECK(one_class.n == 2);
    CHECK(std::isnan(one_class.auroc));
    CHECK_FALSE(std::isnan(one_class.brier));
}
