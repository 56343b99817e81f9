#include <catch_amalgamated.hpp>

#include <random>

#include "recov/fixtures.hpp"
#include "recov/pitch_control.hpp"

using namespace recov;
using namespace recov::pc;

namespace {

const Polygon kFullPitch{{0, 0}, {kPitchLength, 0}, {kPitchLength, kPitchWidth}, {0, kPitchWidth}};

FreezeFrame make_frame(const std::vector<std::pair<Vec2, bool>>& players) {
    FreezeFrame f;
    f.visible_area = kFullPitch;
    for (const auto& [pos, teammate] : players) {
        FramePlayer p;
        p.teammate = teammate;
        p.pos = pos;
        f.players.push_back(p);
    }
    return f;
}

FreezeFrame random_frame(std::mt19937_64& rng, int per_side) {
    std::uniform_real_distribution<double> ux(1.0, kPitchLength - 1.0), uy(1.0, kPitchWidth - 1.0);
    std::vector<std::pair<Vec2, bool>> players;
    for (int i = 0; i < per_side; ++i) players.push_back({{ux(rng), uy(rng)}, true});
    for (int i = 0; i < per_side; ++i) players.push_back({{ux(rng), uy(rng)}, false});
    return make_frame(players);
}

}  // namespace

TEST_CASE("arrival and ball travel times") {
    const PcParams p;
    CHECK(time_to_reach({10, 10}, {10, 10}, p) == Catch::Approx(0.7));
    CHECK(time_to_reach({10, 10}, {15, 10}, p) == Catch::Approx(1.7));
    CHECK(time_to_reach({0, 0}, {10.5, 0}, p) == Catch::Approx(2.8));
    CHECK(ball_travel_time({50, 30}, {50, 30}, p) == 0.0);
    CHECK(ball_travel_time({0, 30}, {30, 30}, p) == Catch::Approx(2.0));
    CHECK(ball_travel_time({0, 30}, {15, 30}, p) == Catch::Approx(1.0));
}

TEST_CASE("parameter validation") {
    PcParams p;
    p.dt_s = 0.5;  // >= sigma_s
    CHECK_THROWS_AS(p.validate(), RangeError);
    PcParams q;
    q.lambda_per_s = 0.0;
    CHECK_THROWS_AS(q.validate(), RangeError);
}

TEST_CASE("lone attacker controls every cell") {
    const PcParams p;
    std::vector<std::pair<Vec2, bool>> players{{{40.0, 30.0}, true}};
    double contrib[1];
    for (Vec2 cell : {Vec2{10, 10}, Vec2{52.5, 34}, Vec2{100, 60}}) {
        const auto res = integrate_cell(players, Vec2{50, 30}, cell, p, contrib);
        CHECK(res.att_value >= 1.0 - p.convergence_eps - 1e-12);
    }
}

TEST_CASE("symmetric duel splits control evenly") {
    const PcParams p;
    const Vec2 cell{52.5, 34.0};
    std::vector<std::pair<Vec2, bool>> players{{{42.5, 34.0}, true}, {{62.5, 34.0}, false}};
    double contrib[2];
    const auto res = integrate_cell(players, cell, cell, p, contrib);
    CHECK(std::fabs(res.att_value - 0.5) < 1e-6);
}

TEST_CASE("near attacker beats far defender, matching the fine-step reference") {
    const PcParams p;
    const Vec2 cell{50.0, 30.0};
    FreezeFrame frame = make_frame({{{52.0, 30.0}, true}, {{40.0, 30.0}, false}});
    const auto prod = compute_surface(frame, cell, p);
    const auto fine = fixtures::oracle_pc_fine(frame, cell, p);
    const GridSpec grid;
    // the cell nearest to (50,30)
    const int idx = grid.index(static_cast<int>(30.0 / grid.cell_h()),
                               static_cast<int>(50.0 / grid.cell_w()));
    CHECK(prod.att_control[idx] > 0.9);
    CHECK(std::fabs(prod.att_control[idx] - fine.att_control[idx]) < 0.01);
}

TEST_CASE("production integration tracks the dt/10 oracle on random frames") {
    std::mt19937_64 rng(101);
    const PcParams p;
    for (int trial = 0; trial < 3; ++trial) {
        const FreezeFrame frame = random_frame(rng, 5);
        std::uniform_real_distribution<double> ux(1.0, kPitchLength - 1.0),
            uy(1.0, kPitchWidth - 1.0);
        const Vec2 ball{ux(rng), uy(rng)};
        const auto prod = compute_surface(frame, ball, p);
        const auto fine = fixtures::oracle_pc_fine(frame, ball, p);
        double max_diff = 0.0;
        for (size_t i = 0; i < prod.att_control.size(); ++i)
            max_diff = std::max(max_diff, std::fabs(prod.att_control[i] - fine.att_control[i]));
        INFO("trial " << trial << " max diff " << max_diff);
        CHECK(max_diff < 0.01);
    }
}

TEST_CASE("per-cell contributions conserve the unit mass") {
    std::mt19937_64 rng(55);
    const PcParams p;
    const FreezeFrame frame = random_frame(rng, 10);
    const auto s = compute_surface(frame, {52.5, 34.0}, p);
    for (int i = 0; i < s.grid.cells(); ++i) {
        if (!s.visible_mask[i]) continue;
        double sum = 0.0;
        for (const auto& per : s.per_player) sum += per[i];
        CHECK(sum >= 0.99);
        CHECK(sum <= 1.01);
    }
}

TEST_CASE("mirrored frames produce mirrored surfaces") {
    std::mt19937_64 rng(77);
    const PcParams p;
    const FreezeFrame frame = random_frame(rng, 7);
    const Vec2 ball{30.0, 20.0};
    FreezeFrame mirrored = frame;
    for (auto& pl : mirrored.players) pl.pos = flip_ltr(pl.pos);
    const auto a = compute_surface(frame, ball, p);
    const auto b = compute_surface(mirrored, flip_ltr(ball), p);
    double max_diff = 0.0;
    for (int r = 0; r < a.grid.rows; ++r)
        for (int c = 0; c < a.grid.cols; ++c)
            max_diff = std::max(max_diff,
                                std::fabs(a.att_control[a.grid.index(r, c)] -
                                          b.att_control[b.grid.index(a.grid.rows - 1 - r,
                                                                     a.grid.cols - 1 - c)]));
    CHECK(max_diff < 1e-9);
}

TEST_CASE("defender stepping closer never raises attacking control") {
    const PcParams p;
    const Vec2 cell{70.0, 40.0};
    const Vec2 ball{50.0, 30.0};
    double prev = 1.0;
    for (double d = 40.0; d >= 2.0; d -= 2.0) {
        std::vector<std::pair<Vec2, bool>> players{{{60.0, 20.0}, true},
                                                   {{70.0 - d, 40.0}, false}};
        double contrib[2];
        const double att = integrate_cell(players, ball, cell, p, contrib).att_value;
        CHECK(att <= prev + 1e-12);
        prev = att;
    }
}

TEST_CASE("identical inputs give bit-identical surfaces") {
    std::mt19937_64 rng(999);
    const PcParams p;
    const FreezeFrame frame = random_frame(rng, 8);
    const auto a = compute_surface(frame, {60.0, 30.0}, p);
    const auto b = compute_surface(frame, {60.0, 30.0}, p);
    REQUIRE(a.att_control.size() == b.att_control.size());
    for (size_t i = 0; i < a.att_control.size(); ++i) CHECK(a.att_control[i] == b.att_control[i]);
}

TEST_CASE("empty side is rejected") {
    const PcParams p;
    FreezeFrame frame = make_frame({{{40.0, 30.0}, true}});
    CHECK_THROWS_AS(compute_surface(frame, {50.0, 30.0}, p), RangeError);
}

TEST_CASE("average control around a point") {
    PitchControlSurface s;
    s.grid = GridSpec{};
    s.ball = {52.5, 34.0};
    s.att_control.assign(s.grid.cells(), 0.8);
    s.visible_mask.assign(s.grid.cells(), 1);
    CHECK(avg_control_radius(s, {52.5, 34.0}, 4.0) == Catch::Approx(0.8));

    // fully invisible region falls back to the neutral prior
    std::fill(s.visible_mask.begin(), s.visible_mask.end(), 0);
    CHECK(avg_control_radius(s, {52.5, 34.0}, 4.0) == 0.5);

    // hand-built two-cell mean
    std::fill(s.visible_mask.begin(), s.visible_mask.end(), 0);
    std::fill(s.att_control.begin(), s.att_control.end(), 0.0);
    const int i1 = s.grid.index(16, 24), i2 = s.grid.index(16, 25);
    s.visible_mask[i1] = s.visible_mask[i2] = 1;
    s.att_control[i1] = 0.2;
    s.att_control[i2] = 0.6;
    const Vec2 mid{0.5 * (s.grid.center(16, 24).x + s.grid.center(16, 25).x),
                   s.grid.center(16, 24).y};
    CHECK(avg_control_radius(s, mid, 2.0) == Catch::Approx(0.4));
}

TEST_CASE("relevance weights form a normalized Gaussian peaked at the ball") {
    const GridSpec grid;
    const Vec2 ball = grid.center(16, 25);
    const auto w = relevance_weights(ball, grid, 14.0);
    double sum = 0.0;
    for (double v : w) sum += v;
    CHECK(std::fabs(sum - 1.0) < 1e-12);
    const auto max_it = std::max_element(w.begin(), w.end());
    CHECK(max_it - w.begin() == grid.index(16, 25));
    // two cells symmetric about the ball weigh the same
    CHECK(w[grid.index(16, 24)] == Catch::Approx(w[grid.index(16, 26)]));
}

TEST_CASE("relevance ranking orders players by weighted control") {
    const PcParams p;
    std::mt19937_64 rng(4242);

    SECTION("a lone attacker ranks first on its side") {
        FreezeFrame frame = make_frame({{{40.0, 30.0}, true}, {{80.0, 40.0}, false},
                                        {{90.0, 50.0}, false}});
        const Vec2 ball{45.0, 32.0};
        const auto s = compute_surface(frame, ball, p);
        const auto w = relevance_weights(ball, s.grid, p.rel_sigma_m, &s.visible_mask);
        const auto ranking = rank_players_rpc(s, w, frame);
        REQUIRE(ranking.attackers.size() == 1);
        CHECK(ranking.attackers[0].player_index == 0);
    }

    SECTION("co-located players tie-break by input order") {
        FreezeFrame frame = make_frame({{{40.0, 30.0}, true}, {{40.0, 30.0}, true},
                                        {{80.0, 40.0}, false}});
        const Vec2 ball{45.0, 32.0};
        const auto s = compute_surface(frame, ball, p);
        const auto w = relevance_weights(ball, s.grid, p.rel_sigma_m, &s.visible_mask);
        const auto ranking = rank_players_rpc(s, w, frame);
        REQUIRE(ranking.attackers.size() == 2);
        CHECK(ranking.attackers[0].player_index == 0);
        CHECK(ranking.attackers[1].player_index == 1);
    }

    SECTION("nearest player to the ball tops a spread 5v5, against brute force") {
        const FreezeFrame frame = random_frame(rng, 5);
        const Vec2 ball = frame.players[2].pos;  // anchor at an attacker
        const auto s = compute_surface(frame, ball, p);
        const auto w = relevance_weights(ball, s.grid, p.rel_sigma_m, &s.visible_mask);
        const auto ranking = rank_players_rpc(s, w, frame);

        // brute-force recomputation of every attacker's weighted sum
        std::vector<std::pair<double, int>> brute;
        for (size_t j = 0; j < frame.players.size(); ++j) {
            if (!frame.players[j].teammate) continue;
            double score = 0.0;
            for (int i = 0; i < s.grid.cells(); ++i) score += w[i] * s.per_player[j][i];
            brute.push_back({score, static_cast<int>(j)});
        }
        std::sort(brute.begin(), brute.end(), [](auto a, auto b) { return a.first > b.first; });
        REQUIRE(ranking.attackers.size() == brute.size());
        CHECK(ranking.attackers[0].player_index == brute[0].second);
        CHECK(ranking.attackers[0].rpc == Catch::Approx(brute[0].first));
        // the on-ball attacker holds the most relevant control here
        CHECK(ranking.attackers[0].player_index == 2);
    }
}
