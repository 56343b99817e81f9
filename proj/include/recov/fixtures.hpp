#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "recov/events.hpp"
#include "recov/geometry.hpp"
#include "recov/pitch_control.hpp"
#include "recov/spadl.hpp"

namespace recov::fixtures {

// Synthetic league generator. Possession flips through a per-action hazard
// that responds to how many generated defenders crowd the ball, so tracking
// features carry signal the action stream alone cannot see. Crowding
// frequency also rises with ball depth, which gives the action-only schema a
// weaker, location-based handle on the same risk.
struct SynthConfig {
    uint64_t seed = 1;
    int n_matches = 20;
    int actions_per_match = 400;
    double base_recovery_hazard = 0.055;
    double crowding_boost = 3.0;   // hazard multiplier with >=2 defenders within 6 m
    int n_teams = 6;               // alternating crowding / passive styles
    double frame_visibility = 1.0; // fraction of the pitch length kept visible

    void validate() const {
        if (n_matches < 1 || actions_per_match < 10)
            throw RangeError("SynthConfig: need at least 1 match of 10 actions");
        if (n_teams < 2) throw RangeError("SynthConfig: need at least 2 teams");
        if (!(base_recovery_hazard > 0.0) ||
            base_recovery_hazard * std::max(crowding_boost, 1.0) >= 1.0)
            throw RangeError("SynthConfig: hazard must stay inside (0, 1)");
        if (!(crowding_boost > 0.0)) throw RangeError("SynthConfig: crowding_boost must be > 0");
        if (!(frame_visibility > 0.0 && frame_visibility <= 1.0))
            throw RangeError("SynthConfig: frame_visibility must be in (0, 1]");
    }

    bool crowding_style(int team_index) const { return team_index % 2 == 0; }
    int team_id(int team_index) const { return 1001 + team_index; }
    std::string team_name(int team_index) const {
        return strfmt("%s FC %d", crowding_style(team_index) ? "Pressing" : "Passive",
                      team_index + 1);
    }
};

namespace detail {

struct Rng {
    std::mt19937_64 gen;

    explicit Rng(uint64_t seed) : gen(seed) {}
    double uniform() { return (gen() >> 11) * (1.0 / 9007199254740992.0); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double gauss(double mean, double sd) {
        const double u1 = std::max(uniform(), 1e-12);
        const double u2 = uniform();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform() * (hi - lo + 1)) % (hi - lo + 1);
    }
    bool bernoulli(double p) { return uniform() < p; }
};

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::string iso_date_plus(const std::string& iso, int days) {
    int y = 0, m = 0, d = 0;
    std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d);
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    d += days;
    for (;;) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        const int in_month = mdays[m - 1] + (m == 2 && leap ? 1 : 0);
        if (d <= in_month) break;
        d -= in_month;
        if (++m > 12) {
            m = 1;
            ++y;
        }
    }
    return strfmt("%04d-%02d-%02d", y, m, d);
}

inline std::string synth_uuid(int match_id, int index) {
    return strfmt("%08x-0000-4000-8000-%012x", match_id, index);
}

inline std::string timestamp_str(double clock_s) {
    const int h = static_cast<int>(clock_s / 3600.0);
    const int m = static_cast<int>(clock_s / 60.0) % 60;
    const double s = clock_s - h * 3600.0 - m * 60.0;
    return strfmt("%02d:%02d:%06.3f", h, m, s);
}

inline double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace detail

// One generated match, both as provider-format JSON documents and as ground
// truth the statistics tests read directly.
struct GenMatch {
    MatchMeta meta;
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    std::vector<int> acting_team;      // per generated on-ball action
    std::vector<int> action_period;
    std::vector<int> close_defenders;  // defenders within 6 m at the action
};

inline GenMatch gen_match(const SynthConfig& cfg, int match_index) {
    cfg.validate();
    detail::Rng rng(detail::mix_seed(cfg.seed, match_index));

    GenMatch out;
    const int home_idx = match_index % cfg.n_teams;
    int away_idx = (match_index + 1 + match_index / cfg.n_teams) % cfg.n_teams;
    if (away_idx == home_idx) away_idx = (home_idx + 1) % cfg.n_teams;
    out.meta.match_id = 900001 + match_index;
    out.meta.home_team_id = cfg.team_id(home_idx);
    out.meta.away_team_id = cfg.team_id(away_idx);
    out.meta.home_team = cfg.team_name(home_idx);
    out.meta.away_team = cfg.team_name(away_idx);
    out.meta.kickoff_date = detail::iso_date_plus("2021-08-01", match_index);
    out.meta.competition = "Synthetic League";
    out.meta.season = "2021";

    const int half = cfg.actions_per_match / 2;
    int index = 1;

    auto team_json = [&](int team_idx) {
        return nlohmann::ordered_json{{"id", cfg.team_id(team_idx)},
                                      {"name", cfg.team_name(team_idx)}};
    };
    auto player_json = [&](int team_idx, int shirt) {
        return nlohmann::ordered_json{
            {"id", cfg.team_id(team_idx) * 100 + shirt},
            {"name", strfmt("Player %d-%d", cfg.team_id(team_idx), shirt)}};
    };
    auto loc_json = [](Vec2 internal) {
        const Vec2 p = internal_to_provider(clamp_to_pitch(internal));
        return nlohmann::ordered_json::array({detail::round1(p.x), detail::round1(p.y)});
    };

    auto push_event = [&](nlohmann::ordered_json e) {
        e["index"] = index++;
        out.events.push_back(std::move(e));
    };

    for (int period = 1; period <= 2; ++period) {
        double clock_s = 0.0;
        // both teams announce the half; unsupported types downstream
        for (int t : {home_idx, away_idx}) {
            nlohmann::ordered_json e;
            e["id"] = detail::synth_uuid(out.meta.match_id, index);
            e["period"] = period;
            e["timestamp"] = detail::timestamp_str(0.0);
            e["type"] = {{"id", 32}, {"name", "Half Start"}};
            e["team"] = team_json(t);
            push_event(std::move(e));
        }

        // attack sign along internal x per team, halves swap
        auto attack_sign = [&](int team_idx) {
            const int first = team_idx == home_idx ? 1 : -1;
            return period == 1 ? first : -first;
        };

        int possession_idx = home_idx;
        Vec2 ball{kPitchLength / 2.0, kPitchWidth / 2.0};
        for (int a = 0; a < half; ++a) {
            clock_s += rng.uniform(2.0, 8.0);
            const int defending_idx = possession_idx == home_idx ? away_idx : home_idx;
            const int sign = attack_sign(possession_idx);
            const int shirt = rng.uniform_int(2, 11);  // outfield actor

            // choose the action and its end point
            const double type_draw = rng.uniform();
            const char* type_name;
            int type_id;
            Vec2 end;
            const double goal_x = sign > 0 ? kPitchLength : 0.0;
            const bool near_goal = std::fabs(ball.x - goal_x) < 25.0;
            if (near_goal && rng.bernoulli(0.2)) {
                type_name = "Shot";
                type_id = 16;
                end = {goal_x, rng.gauss(kPitchWidth / 2.0, 4.0)};
            } else if (type_draw < 0.72) {
                type_name = "Pass";
                type_id = 30;
                end = {ball.x + sign * rng.gauss(8.0, 8.0), ball.y + rng.gauss(0.0, 6.0)};
            } else if (type_draw < 0.90) {
                type_name = "Carry";
                type_id = 43;
                end = {ball.x + sign * rng.gauss(4.0, 3.0), ball.y + rng.gauss(0.0, 3.0)};
            } else if (type_draw < 0.95) {
                type_name = "Dribble";
                type_id = 14;
                end = ball;
            } else {
                type_name = "Clearance";
                type_id = 9;
                end = {ball.x + sign * rng.gauss(20.0, 8.0), ball.y + rng.gauss(0.0, 10.0)};
            }
            end = clamp_to_pitch({std::clamp(end.x, 0.5, kPitchLength - 0.5),
                                  std::clamp(end.y, 0.5, kPitchWidth - 0.5)});

            // freeze frame around the current ball position
            struct GenPlayer {
                bool teammate, actor, keeper;
                Vec2 pos;
            };
            std::vector<GenPlayer> players;
            const double own_goal_x = sign > 0 ? 2.5 : kPitchLength - 2.5;
            const double their_goal_x = sign > 0 ? kPitchLength - 2.5 : 2.5;
            players.push_back({true, true, false, ball});
            players.push_back({true, false, true,
                               clamp_to_pitch({own_goal_x + rng.gauss(0.0, 1.5),
                                               rng.gauss(kPitchWidth / 2.0, 3.0)})});
            for (int i = 0; i < 9; ++i)
                players.push_back({true, false, false,
                                   clamp_to_pitch({rng.gauss(ball.x - sign * 6.0, 16.0),
                                                   rng.gauss(ball.y, 13.0)})});
            players.push_back({false, false, true,
                               clamp_to_pitch({their_goal_x + rng.gauss(0.0, 1.5),
                                               rng.gauss(kPitchWidth / 2.0, 3.0)})});

            // how deep the ball sits in the defending half drives crowding
            const double depth =
                std::clamp((sign > 0 ? ball.x - kPitchLength / 2.0
                                     : kPitchLength / 2.0 - ball.x) /
                               (kPitchLength / 2.0),
                           0.0, 1.0);
            const bool crowding_team = cfg.crowding_style(defending_idx);
            const double p_crowd =
                crowding_team ? 0.30 + 0.45 * depth : 0.05 + 0.15 * depth;
            int to_place = 10;
            if (rng.bernoulli(p_crowd)) {
                const int n_crowd = rng.uniform_int(2, 4);
                for (int i = 0; i < n_crowd; ++i) {
                    const double ang = rng.uniform(0.0, 2.0 * M_PI);
                    const double rad = rng.uniform(1.5, 5.5);
                    players.push_back({false, false, false,
                                       clamp_to_pitch({ball.x + rad * std::cos(ang),
                                                       ball.y + rad * std::sin(ang)})});
                }
                to_place -= n_crowd;
            }
            for (int i = 0; i < to_place; ++i)
                players.push_back({false, false, false,
                                   clamp_to_pitch({rng.gauss((ball.x + their_goal_x) / 2.0, 14.0),
                                                   rng.gauss(ball.y, 12.0)})});

            int close_def = 0;
            for (const auto& p : players)
                if (!p.teammate && !p.keeper && dist(p.pos, ball) <= 6.0) ++close_def;

            double hazard = cfg.base_recovery_hazard;
            if (close_def >= 2) hazard *= cfg.crowding_boost;
            hazard = std::min(hazard, 0.9);
            const bool recovery = rng.bernoulli(hazard);
            const bool goal = type_id == 16 && rng.bernoulli(0.08);

            // emit the event
            const std::string uuid = detail::synth_uuid(out.meta.match_id, index);
            nlohmann::ordered_json e;
            e["id"] = uuid;
            e["period"] = period;
            e["timestamp"] = detail::timestamp_str(clock_s);
            e["type"] = {{"id", type_id}, {"name", type_name}};
            e["team"] = team_json(possession_idx);
            e["player"] = player_json(possession_idx, shirt);
            e["location"] = loc_json(ball);
            if (type_id == 30) {
                nlohmann::ordered_json pass;
                pass["end_location"] = loc_json(end);
                pass["height"] = {{"id", 1}, {"name", "Ground Pass"}};
                if (recovery) pass["outcome"] = {{"id", 9}, {"name", "Incomplete"}};
                e["pass"] = std::move(pass);
            } else if (type_id == 43) {
                e["carry"] = {{"end_location", loc_json(end)}};
            } else if (type_id == 16) {
                nlohmann::ordered_json shot;
                shot["end_location"] = loc_json(end);
                shot["outcome"] = goal ? nlohmann::ordered_json{{"id", 97}, {"name", "Goal"}}
                                       : nlohmann::ordered_json{{"id", 98}, {"name", "Off T"}};
                shot["type"] = {{"id", 87}, {"name", "Open Play"}};
                e["shot"] = std::move(shot);
            } else if (type_id == 14) {
                e["dribble"] = {{"outcome",
                                 recovery ? nlohmann::ordered_json{{"id", 9}, {"name", "Incomplete"}}
                                          : nlohmann::ordered_json{{"id", 8}, {"name", "Complete"}}}};
            }

            // freeze frame, trimmed to the visible window
            double vis_lo = 0.0, vis_hi = kPitchLength;
            if (cfg.frame_visibility < 1.0) {
                const double width = kPitchLength * cfg.frame_visibility;
                vis_lo = std::clamp(ball.x - width / 2.0, 0.0, kPitchLength - width);
                vis_hi = vis_lo + width;
            }
            nlohmann::ordered_json frame;
            frame["event_uuid"] = uuid;
            {
                const Vec2 c1 = internal_to_provider({vis_lo, kPitchWidth});
                const Vec2 c2 = internal_to_provider({vis_hi, 0.0});
                frame["visible_area"] = nlohmann::ordered_json::array(
                    {detail::round1(c1.x), detail::round1(c1.y), detail::round1(c2.x),
                     detail::round1(c1.y), detail::round1(c2.x), detail::round1(c2.y),
                     detail::round1(c1.x), detail::round1(c2.y), detail::round1(c1.x),
                     detail::round1(c1.y)});
            }
            nlohmann::ordered_json ff = nlohmann::ordered_json::array();
            for (const auto& p : players) {
                if (p.pos.x < vis_lo || p.pos.x > vis_hi) continue;
                ff.push_back({{"teammate", p.teammate},
                              {"actor", p.actor},
                              {"keeper", p.keeper},
                              {"location", loc_json(p.pos)}});
            }
            frame["freeze_frame"] = std::move(ff);
            out.frames.push_back(std::move(frame));

            out.acting_team.push_back(cfg.team_id(possession_idx));
            out.action_period.push_back(period);
            out.close_defenders.push_back(close_def);
            push_event(std::move(e));

            // an occasional receipt event exercises the frameless join path
            if (type_id == 30 && !recovery && rng.bernoulli(0.25)) {
                nlohmann::ordered_json r;
                r["id"] = detail::synth_uuid(out.meta.match_id, index);
                r["period"] = period;
                r["timestamp"] = detail::timestamp_str(clock_s + 0.5);
                r["type"] = {{"id", 42}, {"name", "Ball Receipt*"}};
                r["team"] = team_json(possession_idx);
                r["player"] = player_json(possession_idx, rng.uniform_int(2, 11));
                r["location"] = loc_json(end);
                push_event(std::move(r));
            }

            if (goal) {
                ball = {kPitchLength / 2.0, kPitchWidth / 2.0};
                possession_idx = defending_idx;  // kickoff after conceding
            } else {
                ball = clamp_to_pitch({end.x + rng.gauss(0.0, 0.5), end.y + rng.gauss(0.0, 0.5)});
                if (recovery) possession_idx = defending_idx;
            }
        }
    }
    return out;
}

// Write a full dataset in the ingest layout: events/<id>.json,
// frames/<id>.json and manifest.json. Byte-stable for a fixed seed.
inline std::vector<MatchMeta> write_dataset(const SynthConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "events");
    fs::create_directories(fs::path(out_dir) / "frames");

    nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
    std::vector<MatchMeta> metas;
    for (int m = 0; m < cfg.n_matches; ++m) {
        GenMatch match = gen_match(cfg, m);
        const std::string ev_rel = strfmt("events/%d.json", match.meta.match_id);
        const std::string fr_rel = strfmt("frames/%d.json", match.meta.match_id);
        {
            std::ofstream out(fs::path(out_dir) / ev_rel, std::ios::binary);
            if (!out) throw IoError("cannot write " + ev_rel);
            out << match.events.dump() << "\n";
        }
        {
            std::ofstream out(fs::path(out_dir) / fr_rel, std::ios::binary);
            if (!out) throw IoError("cannot write " + fr_rel);
            out << match.frames.dump() << "\n";
        }
        manifest.push_back({{"match_id", match.meta.match_id},
                            {"event_path", ev_rel},
                            {"frames_path", fr_rel},
                            {"kickoff_date", match.meta.kickoff_date},
                            {"home_team_id", match.meta.home_team_id},
                            {"home_team", match.meta.home_team},
                            {"away_team_id", match.meta.away_team_id},
                            {"away_team", match.meta.away_team},
                            {"competition", match.meta.competition},
                            {"season", match.meta.season}});
        match.meta.event_path = (fs::path(out_dir) / ev_rel).string();
        match.meta.frames_path = (fs::path(out_dir) / fr_rel).string();
        metas.push_back(match.meta);
    }
    std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest.json");
    out << manifest.dump(2) << "\n";
    return metas;
}

// Test-only reference: forward scan for a possession change, kept independent
// of the label implementation it checks.
inline int oracle_label_scan(const std::vector<spadl::SpadlAction>& actions, int anchor, int k) {
    const int n = static_cast<int>(actions.size());
    const int defending = [&] {
        for (int j = 0; j < n; ++j)
            if (actions[j].team_id != actions[anchor].team_id) return actions[j].team_id;
        return 0;
    }();
    int seen = 0;
    for (int j = anchor + 1; j < n && seen < k; ++j, ++seen) {
        if (actions[j].period != actions[anchor].period) break;
        if (actions[j].team_id == defending) return 1;
    }
    return 0;
}

// Test-only reference integration: plain Euler accumulation at dt/10 with the
// sigmoid evaluated directly every step. No fast paths.
inline pc::PitchControlSurface oracle_pc_fine(const FreezeFrame& frame, Vec2 ball,
                                              pc::PcParams params, pc::GridSpec grid = {}) {
    params.validate();
    const double dt = params.dt_s / 10.0;
    const size_t n = frame.players.size();
    if (n == 0) throw RangeError("oracle_pc_fine: empty frame");

    pc::PitchControlSurface s;
    s.grid = grid;
    s.ball = ball;
    s.att_control.assign(grid.cells(), 0.0);
    s.per_player.assign(n, std::vector<double>(grid.cells(), 0.0));
    s.visible_mask.assign(grid.cells(), 0);
    s.is_attacker.resize(n);
    for (size_t j = 0; j < n; ++j) s.is_attacker[j] = frame.players[j].teammate ? 1 : 0;

    std::vector<double> ta(n), contrib(n);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const int idx = grid.index(r, c);
            const Vec2 center = grid.center(r, c);
            s.visible_mask[idx] = point_in_polygon(frame.visible_area, center) ? 1 : 0;
            for (size_t j = 0; j < n; ++j) {
                ta[j] = pc::time_to_reach(clamp_to_pitch(frame.players[j].pos), center, params);
                contrib[j] = 0.0;
            }
            double total = 0.0;
            const double stop = 1.0 - params.convergence_eps;
            for (double t = pc::ball_travel_time(ball, center, params);
                 total < stop && t <= params.max_t_s; t += dt) {
                const double free = 1.0 - total;
                for (size_t j = 0; j < n; ++j) {
                    const double z =
                        pc::detail::kSigmoidSlope * (t - ta[j]) / params.sigma_s;
                    const double f = 1.0 / (1.0 + std::exp(-z));
                    const double dc = free * f * params.lambda_per_s * dt;
                    contrib[j] += dc;
                    total += dc;
                }
            }
            if (total < stop && total > 0.0)
                for (size_t j = 0; j < n; ++j) contrib[j] /= total;
            double att = 0.0;
            for (size_t j = 0; j < n; ++j) {
                s.per_player[j][idx] = contrib[j];
                if (s.is_attacker[j]) att += contrib[j];
            }
            s.att_control[idx] = std::clamp(att, 0.0, 1.0);
        }
    }
    return s;
}

}  // namespace recov::fixtures
