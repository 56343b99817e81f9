#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "recov/match_record.hpp"
#include "recov/pitch_control.hpp"

namespace recov::features {

enum class SchemaId { A, AUT };

inline const char* to_string(SchemaId s) { return s == SchemaId::A ? "A" : "AUT"; }

struct FeatureParams {
    int k = 4;
    int tau1 = 3;  // actions described by action features
    int tau2 = 1;  // actions described by tracking features
    int n_att = 5;
    int n_def = 5;
    std::vector<double> p_set = {0.01, 0.1, 0.25, 0.5, 0.75};
    pc::PcParams pc_params;
    pc::GridSpec grid;

    uint64_t hash() const {
        std::string s = strfmt("k=%d;t1=%d;t2=%d;na=%d;nd=%d;", k, tau1, tau2, n_att, n_def);
        for (double p : p_set) s += fmt_double(p) + ",";
        s += strfmt(";grid=%dx%d;pc=%s", grid.rows, grid.cols, hex64(pc_params.hash()).c_str());
        return fnv1a(s);
    }
};

// Identifies the game state a row was built from.
struct StateKeys {
    int match_id = 0;
    int anchor_seq = 0;
    int acting_team = 0;
    int defending_team = 0;
    int player = 0;
    Vec2 ball;  // action start, acting-team-attacks-right frame
    int period = 1;
    double time_s = 0.0;
};

struct FeatureRow {
    StateKeys keys;
    int label = 0;
    std::vector<double> values;
};

struct FeatureTable {
    SchemaId schema = SchemaId::A;
    std::vector<std::string> feature_names;
    std::vector<FeatureRow> rows;
    uint64_t params_hash = 0;

    uint64_t schema_hash() const {
        std::string s(to_string(schema));
        for (const auto& n : feature_names) s += ";" + n;
        return fnv1a(s);
    }
};

struct EligibilityReport {
    long long total_states = 0;   // one per action in the dataset
    long long included = 0;       // rows in the A-union-T table
    long long short_window = 0;   // fewer than tau1-1 prior actions
    long long missing_frame = 0;
    long long att_below_min = 0;
    long long def_below_min = 0;
    long long ball_outside = 0;

    long long excluded() const {
        return short_window + missing_frame + att_below_min + def_below_min + ball_outside;
    }
    void add(const EligibilityReport& o) {
        total_states += o.total_states;
        included += o.included;
        short_window += o.short_window;
        missing_frame += o.missing_frame;
        att_below_min += o.att_below_min;
        def_below_min += o.def_below_min;
        ball_outside += o.ball_outside;
    }
};

namespace detail {

inline std::string p_tag(double p) {
    return strfmt("p%03d", static_cast<int>(std::lround(p * 100.0)));
}

}  // namespace detail

// Feature name list for a schema; fixes the column order of every table.
inline std::vector<std::string> feature_names(SchemaId schema, const FeatureParams& fp) {
    std::vector<std::string> names;
    for (int lag = 0; lag < fp.tau1; ++lag) {
        const std::string a = strfmt("a%d_", lag);
        for (const char* g : {"start_x", "start_y", "end_x", "end_y", "dist_start",
                              "angle_start", "dist_end", "angle_end", "dx", "dy"})
            names.push_back(a + g);
        for (int b = 0; b < spadl::kNumBodyParts; ++b)
            names.push_back(a + "body_" + spadl::to_string(static_cast<spadl::BodyPart>(b)));
        if (lag > 0) {  // the current action's type and result are withheld
            for (int t = 0; t < spadl::kNumActionTypes; ++t)
                names.push_back(a + "type_" + spadl::to_string(static_cast<spadl::ActionType>(t)));
            for (int r = 0; r < spadl::kNumResults; ++r)
                names.push_back(a + "result_" + spadl::to_string(static_cast<spadl::ResultType>(r)));
        }
    }
    names.push_back("goals_for");
    names.push_back("goals_against");
    names.push_back("goal_diff");

    if (schema == SchemaId::AUT) {
        for (int lag = 0; lag < fp.tau2; ++lag) {
            const std::string t = strfmt("t%d_", lag);
            names.push_back(t + "pc_ball_r4");
            for (const char* side : {"att", "def"}) {
                const int limit = side[0] == 'a' ? fp.n_att : fp.n_def;
                for (int r = 1; r <= limit; ++r) {
                    const std::string pp = t + side + std::to_string(r) + "_";
                    for (double p : fp.p_set) {
                        names.push_back(pp + "pcmean_" + detail::p_tag(p));
                        names.push_back(pp + "pccells_" + detail::p_tag(p));
                    }
                    names.push_back(pp + "x");
                    names.push_back(pp + "y");
                    names.push_back(pp + "dist_ball");
                }
            }
        }
    }
    return names;
}

// Action-derived block for the tau1-window ending at anchor. Actions by the
// defending team are re-expressed in the possessing team's orientation so
// goal distances stay coherent within one vector.
inline void action_features(const MatchRecord& m, int anchor, const FeatureParams& fp,
                            std::vector<double>& out) {
    const int possessing = m.actions[anchor].team_id;
    for (int lag = 0; lag < fp.tau1; ++lag) {
        const auto& a = m.actions[anchor - lag];
        Vec2 start = a.start, end = a.end;
        if (a.team_id != possessing) {
            start = flip_ltr(start);
            end = flip_ltr(end);
        }
        out.push_back(start.x);
        out.push_back(start.y);
        out.push_back(end.x);
        out.push_back(end.y);
        out.push_back(dist_to_goal(start));
        out.push_back(angle_to_goal(start));
        out.push_back(dist_to_goal(end));
        out.push_back(angle_to_goal(end));
        out.push_back(std::fabs(end.x - start.x));
        out.push_back(std::fabs(end.y - start.y));
        for (int b = 0; b < spadl::kNumBodyParts; ++b)
            out.push_back(static_cast<int>(a.bodypart) == b ? 1.0 : 0.0);
        if (lag > 0) {
            for (int t = 0; t < spadl::kNumActionTypes; ++t)
                out.push_back(static_cast<int>(a.action_type) == t ? 1.0 : 0.0);
            for (int r = 0; r < spadl::kNumResults; ++r)
                out.push_back(static_cast<int>(a.result) == r ? 1.0 : 0.0);
        }
    }
    const auto& ctx = m.contexts[anchor];
    out.push_back(ctx.goals_possession_team);
    out.push_back(ctx.goals_defending_team);
    out.push_back(ctx.goal_diff);
}

enum class IneligibleReason { eligible, short_window, missing_frame, att_below_min,
                              def_below_min, ball_outside };

// A state is tracking-eligible when each of the tau2 most recent actions has
// a frame with enough visible players per side and the ball inside the
// visible area. The actor belongs to the in-possession side by definition.
inline IneligibleReason eligibility(const MatchRecord& m, int anchor, const FeatureParams& fp) {
    if (anchor - (fp.tau1 - 1) < 0) return IneligibleReason::short_window;
    if (anchor - (fp.tau2 - 1) < 0) return IneligibleReason::short_window;
    const int possessing = m.actions[anchor].team_id;
    for (int lag = 0; lag < fp.tau2; ++lag) {
        const int idx = anchor - lag;
        if (!m.frames[idx]) return IneligibleReason::missing_frame;
        const FreezeFrame& f = *m.frames[idx];
        const bool same_side = m.actions[idx].team_id == possessing;
        int att = 0, def = 0;
        for (const auto& p : f.players)
            ((p.teammate == same_side) ? att : def) += 1;
        if (att < fp.n_att) return IneligibleReason::att_below_min;
        if (def < fp.n_def) return IneligibleReason::def_below_min;
        Vec2 ball = m.actions[idx].start;
        if (!point_in_polygon(f.visible_area, ball)) return IneligibleReason::ball_outside;
    }
    return IneligibleReason::eligible;
}

namespace detail {

// Frame of a window action, with teammate flags re-expressed relative to the
// possessing team and coordinates in its orientation.
inline FreezeFrame frame_in_possession_view(const MatchRecord& m, int idx, int possessing) {
    FreezeFrame f = *m.frames[idx];
    if (m.actions[idx].team_id != possessing) {
        for (auto& p : f.players) {
            p.teammate = !p.teammate;
            p.pos = flip_ltr(p.pos);
        }
        for (auto& v : f.visible_area) v = flip_ltr(v);
    }
    return f;
}

}  // namespace detail

// Tracking-derived block for one eligible state. Callers must gate on
// eligibility first.
inline void tracking_features(const MatchRecord& m, int anchor, const FeatureParams& fp,
                              std::vector<double>& out) {
    const int possessing = m.actions[anchor].team_id;
    for (int lag = 0; lag < fp.tau2; ++lag) {
        const int idx = anchor - lag;
        if (!m.frames[idx]) throw InternalError("tracking_features on ineligible state");
        const FreezeFrame frame = detail::frame_in_possession_view(m, idx, possessing);
        const Vec2 ball = m.actions[idx].team_id == possessing ? m.actions[idx].start
                                                               : flip_ltr(m.actions[idx].start);
        const pc::PitchControlSurface surf =
            pc::compute_surface(frame, ball, fp.pc_params, fp.grid);

        out.push_back(pc::avg_control_radius(surf, ball, 4.0));

        const auto weights =
            pc::relevance_weights(ball, fp.grid, fp.pc_params.rel_sigma_m, &surf.visible_mask);
        const auto ranking = pc::rank_players_rpc(surf, weights, frame);

        // ball carrier: the actor when the frame has one, else the ball point
        Vec2 carrier = ball;
        for (const auto& p : frame.players)
            if (p.actor) carrier = p.pos;

        auto emit_player = [&](const pc::RankedPlayer& rp) {
            const auto& cells = surf.per_player[rp.player_index];
            for (double p : fp.p_set) {
                double sum = 0.0;
                int count = 0;
                for (int i = 0; i < fp.grid.cells(); ++i) {
                    if (!surf.visible_mask[i]) continue;
                    const double c = cells[i];
                    if (c > 0.0 && c <= p) {
                        sum += c;
                        ++count;
                    }
                }
                out.push_back(count == 0 ? 0.0 : sum / count);
                out.push_back(count);
            }
            const Vec2 pos = frame.players[rp.player_index].pos;
            out.push_back(pos.x);
            out.push_back(pos.y);
            out.push_back(dist(pos, carrier));
        };
        for (int r = 0; r < fp.n_att; ++r) emit_player(ranking.attackers[r]);
        for (int r = 0; r < fp.n_def; ++r) emit_player(ranking.defenders[r]);
    }
}

// Positive when the defending team acts within the next k actions of the
// same period; truncated windows observe whatever remains.
inline int build_label(const std::vector<spadl::SpadlAction>& actions, int anchor, int k,
                       int defending_team) {
    const int n = static_cast<int>(actions.size());
    for (int j = anchor + 1; j <= anchor + k && j < n; ++j) {
        if (actions[j].period != actions[anchor].period) break;
        if (actions[j].team_id == defending_team) return 1;
    }
    return 0;
}

struct DatasetTables {
    FeatureTable table_a;
    FeatureTable table_aut;
    EligibilityReport report;
};

// All rows for one match; the caller concatenates matches in
// (match_id, anchor_seq) order to keep output deterministic.
inline DatasetTables assemble_match(const MatchRecord& m, const FeatureParams& fp) {
    DatasetTables out;
    out.table_a.schema = SchemaId::A;
    out.table_a.feature_names = feature_names(SchemaId::A, fp);
    out.table_a.params_hash = fp.hash();
    out.table_aut.schema = SchemaId::AUT;
    out.table_aut.feature_names = feature_names(SchemaId::AUT, fp);
    out.table_aut.params_hash = fp.hash();

    const int n = static_cast<int>(m.actions.size());
    out.report.total_states = n;
    for (int i = 0; i < n; ++i) {
        const IneligibleReason reason = eligibility(m, i, fp);
        if (reason == IneligibleReason::short_window) {
            ++out.report.short_window;
            continue;  // too little history for either schema
        }

        FeatureRow row;
        row.keys.match_id = m.meta.match_id;
        row.keys.anchor_seq = m.actions[i].action_seq;
        row.keys.acting_team = m.actions[i].team_id;
        row.keys.defending_team = m.other_team(m.actions[i].team_id);
        row.keys.player = m.actions[i].player_id;
        row.keys.ball = m.actions[i].start;
        row.keys.period = m.actions[i].period;
        row.keys.time_s = m.actions[i].time_s;
        row.label = build_label(m.actions, i, fp.k, row.keys.defending_team);
        action_features(m, i, fp, row.values);
        out.table_a.rows.push_back(row);

        switch (reason) {
            case IneligibleReason::eligible: {
                FeatureRow aut = row;
                tracking_features(m, i, fp, aut.values);
                out.table_aut.rows.push_back(std::move(aut));
                ++out.report.included;
                break;
            }
            case IneligibleReason::missing_frame: ++out.report.missing_frame; break;
            case IneligibleReason::att_below_min: ++out.report.att_below_min; break;
            case IneligibleReason::def_below_min: ++out.report.def_below_min; break;
            case IneligibleReason::ball_outside: ++out.report.ball_outside; break;
            case IneligibleReason::short_window: break;  // handled above
        }
    }
    return out;
}

}  // namespace recov::features
