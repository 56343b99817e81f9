#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "recov/gbt.hpp"

using namespace recov;
using namespace recov::model;

namespace {

struct Dataset {
    std::vector<double> data;
    std::vector<int> y;
    size_t cols = 0;

    DataView view() const { return {data.data(), y.size(), cols}; }
};

// two informative features plus noise columns; y depends on x0 and x1
Dataset make_dataset(size_t n, uint64_t seed, double flip_noise = 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dataset d;
    d.cols = 5;
    for (size_t i = 0; i < n; ++i) {
        const double x0 = u(rng), x1 = u(rng);
        d.data.insert(d.data.end(), {x0, x1, u(rng), u(rng), u(rng)});
        int label = (x0 + 0.5 * x1 > 0.0) ? 1 : 0;
        if (flip_noise > 0.0 && u(rng) < 2.0 * flip_noise - 1.0) label = 1 - label;
        d.y.push_back(label);
    }
    return d;
}

std::string model_to_string(const GbtModel& m) {
    const auto path = std::filesystem::temp_directory_path() / "gbt_tmp.txt";
    save_model(m, path.string());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("single-class labels collapse to the base score") {
    Dataset d = make_dataset(200, 3);
    std::fill(d.y.begin(), d.y.end(), 0);
    std::vector<std::string> warnings;
    const auto m = fit(d.view(), d.y, {}, 1, 1, &warnings);
    CHECK(m.single_class);
    CHECK_FALSE(warnings.empty());
    const auto preds = predict_proba(m, d.view(), 1);
    for (double p : preds) {
        CHECK(p < 1e-5);
        CHECK(p > 0.0);
    }
}

TEST_CASE("pure threshold signal is learned to 99 percent accuracy") {
    // x > 0 <=> y = 1, verified against the same threshold rule
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dataset d;
    d.cols = 1;
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        d.data.push_back(x);
        d.y.push_back(x > 0.0 ? 1 : 0);
    }
    TrainConfig cfg;
    cfg.n_trees = 30;
    cfg.max_depth = 3;
    cfg.min_samples_leaf = 5;
    const auto m = fit(d.view(), d.y, cfg, 1);

    Dataset probe;
    probe.cols = 1;
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        probe.data.push_back(x);
        probe.y.push_back(x > 0.0 ? 1 : 0);
    }
    const auto preds = predict_proba(m, probe.view(), 1);
    int correct = 0;
    for (size_t i = 0; i < preds.size(); ++i)
        correct += (preds[i] > 0.5) == (probe.y[i] == 1);
    CHECK(correct >= 990);
}

TEST_CASE("same seed, same data, same model") {
    const Dataset d = make_dataset(500, 21, 0.1);
    TrainConfig cfg;
    cfg.n_trees = 20;
    cfg.max_depth = 4;
    cfg.subsample_fraction = 0.8;
    cfg.seed = 42;
    const auto a = fit(d.view(), d.y, cfg, 1);
    const auto b = fit(d.view(), d.y, cfg, 2);  // thread count must not matter
    CHECK(model_to_string(a) == model_to_string(b));

    const auto pa = predict_proba(a, d.view(), 1);
    const auto pb = predict_proba(b, d.view(), 1);
    for (size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);
}

TEST_CASE("permuting training rows leaves the model unchanged") {
    Dataset d = make_dataset(400, 9, 0.05);
    TrainConfig cfg;
    cfg.n_trees = 15;
    cfg.max_depth = 4;
    const auto base = fit(d.view(), d.y, cfg, 1);

    std::mt19937_64 rng(5);
    std::vector<size_t> perm(d.y.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Dataset shuffled;
    shuffled.cols = d.cols;
    for (size_t i : perm) {
        shuffled.data.insert(shuffled.data.end(), d.data.begin() + i * d.cols,
                             d.data.begin() + (i + 1) * d.cols);
        shuffled.y.push_back(d.y[i]);
    }
    const auto again = fit(shuffled.view(), shuffled.y, cfg, 1);
    CHECK(model_to_string(base) == model_to_string(again));
}

TEST_CASE("training loss never increases") {
    const Dataset d = make_dataset(600, 33, 0.1);
    TrainConfig cfg;
    cfg.n_trees = 40;
    const auto m = fit(d.view(), d.y, cfg, 1);
    REQUIRE(m.round_losses.size() == 40);
    for (size_t i = 1; i < m.round_losses.size(); ++i)
        CHECK(m.round_losses[i] <= m.round_losses[i - 1] + 1e-12);
}

TEST_CASE("mean in-sample prediction tracks the positive rate") {
    const Dataset d = make_dataset(2000, 77, 0.15);
    TrainConfig cfg;
    cfg.n_trees = 60;
    cfg.max_depth = 4;
    const auto m = fit(d.view(), d.y, cfg, 1);
    const auto preds = predict_proba(m, d.view(), 1);
    double mean = 0.0, rate = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        mean += preds[i];
        rate += d.y[i];
    }
    mean /= preds.size();
    rate /= preds.size();
    CHECK(std::fabs(mean - rate) < 0.01);
}

TEST_CASE("non-finite features are rejected with their position") {
    Dataset d = make_dataset(50, 2);
    d.data[3 * d.cols + 2] = std::nan("");
    CHECK_THROWS_WITH(fit(d.view(), d.y, {}, 1),
                      Catch::Matchers::ContainsSubstring("row 3") &&
                          Catch::Matchers::ContainsSubstring("column 2"));
}

TEST_CASE("a model without trees predicts its base rate") {
    GbtModel m;
    m.schema_hash = 1;
    m.n_features = 2;
    m.base_score = std::log(0.2 / 0.8);
    Dataset d = make_dataset(10, 4);
    d.cols = 2;
    d.data.resize(20);
    const auto preds = predict_proba(m, d.view(), 1);
    for (double p : preds) CHECK(p == Catch::Approx(0.2));
}

TEST_CASE("model persistence is canonical") {
    const Dataset d = make_dataset(300, 13, 0.1);
    TrainConfig cfg;
    cfg.n_trees = 10;
    const auto m = fit(d.view(), d.y, cfg, 0xFEED);
    const auto dir = std::filesystem::temp_directory_path();

    save_model(m, (dir / "m1.txt").string());
    const auto loaded = load_model((dir / "m1.txt").string());
    save_model(loaded, (dir / "m2.txt").string());

    std::ifstream a(dir / "m1.txt"), b(dir / "m2.txt");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());

    // loaded model predicts identically
    const auto p1 = predict_proba(m, d.view(), m.schema_hash);
    const auto p2 = predict_proba(loaded, d.view(), m.schema_hash);
    for (size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
}

TEST_CASE("truncated model files are rejected") {
    const Dataset d = make_dataset(100, 14);
    const auto m = fit(d.view(), d.y, {}, 1);
    const auto dir = std::filesystem::temp_directory_path();
    save_model(m, (dir / "full.txt").string());
    std::ifstream in(dir / "full.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::ofstream out(dir / "cut.txt");
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(load_model((dir / "cut.txt").string()), ParseError);
}

TEST_CASE("schema hash mismatches are refused") {
    const Dataset d = make_dataset(100, 15);
    const auto m = fit(d.view(), d.y, {}, 0xAAAA);
    CHECK_THROWS_WITH(predict_proba(m, d.view(), 0xBBBB),
                      Catch::Matchers::ContainsSubstring("aaaa") &&
                          Catch::Matchers::ContainsSubstring("bbbb"));
}

TEST_CASE("predictions stay strictly inside the unit interval") {
    const Dataset d = make_dataset(500, 16);
    TrainConfig cfg;
    cfg.n_trees = 80;  // drive scores to extremes on separable data
    const auto m = fit(d.view(), d.y, cfg, 1);
    const auto preds = predict_proba(m, d.view(), 1);
    for (double p : preds) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

namespace {

MatchMeta meta_on(int id, const std::string& date) {
    MatchMeta m;
    m.match_id = id;
    m.kickoff_date = date;
    return m;
}

}  // namespace

TEST_CASE("chronological split") {
    SECTION("10 matches give 8/2") {
        std::vector<MatchMeta> metas;
        for (int i = 0; i < 10; ++i)
            metas.push_back(meta_on(100 + i, strfmt("2021-08-%02d", 10 - i)));
        const auto split = split_by_games(metas, 0.8);
        REQUIRE(split.train_ids.size() == 8);
        REQUIRE(split.valid_ids.size() == 2);
        // latest dates validate: ids 100 (08-10) and 101 (08-09)
        CHECK(split.valid_ids[0] == 101);
        CHECK(split.valid_ids[1] == 100);
    }
    SECTION("580 matches give 464/116") {
        std::vector<MatchMeta> metas;
        for (int i = 0; i < 580; ++i)
            metas.push_back(meta_on(i, strfmt("2020-%02d-%02d", 1 + i / 28, 1 + i % 28)));
        const auto split = split_by_games(metas, 0.8);
        CHECK(split.train_ids.size() == 464);
        CHECK(split.valid_ids.size() == 116);
    }
    SECTION("2 matches train both, validation empty with a warning flag") {
        const auto split =
            split_by_games({meta_on(1, "2021-01-01"), meta_on(2, "2021-01-02")}, 0.8);
        CHECK(split.train_ids.size() == 2);
        CHECK(split.valid_ids.empty());
        CHECK(split.empty_validation);
    }
    SECTION("undated matches are an error") {
        CHECK_THROWS_AS(split_by_games({meta_on(1, "")}, 0.8), SchemaError);
    }
}
