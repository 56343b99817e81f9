#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recov/events.hpp"
#include "recov/geometry.hpp"

namespace recov::spadl {

enum class ActionType : uint8_t {
    pass, cross, throw_in, freekick_pass, freekick_cross, corner_pass, corner_cross,
    take_on, foul, tackle, interception, shot, shot_penalty, shot_freekick,
    keeper_save, keeper_claim, keeper_punch, keeper_pick_up, clearance, bad_touch,
    goalkick, carry,
};
inline constexpr int kNumActionTypes = 22;

enum class ResultType : uint8_t { success, fail, offside, owngoal, yellow, red };
inline constexpr int kNumResults = 6;

enum class BodyPart : uint8_t { foot, head, other };
inline constexpr int kNumBodyParts = 3;

inline const char* to_string(ActionType t) {
    static constexpr std::array<const char*, kNumActionTypes> names = {
        "pass", "cross", "throw_in", "freekick_pass", "freekick_cross", "corner_pass",
        "corner_cross", "take_on", "foul", "tackle", "interception", "shot",
        "shot_penalty", "shot_freekick", "keeper_save", "keeper_claim", "keeper_punch",
        "keeper_pick_up", "clearance", "bad_touch", "goalkick", "carry"};
    return names[static_cast<int>(t)];
}
inline const char* to_string(ResultType r) {
    static constexpr std::array<const char*, kNumResults> names = {
        "success", "fail", "offside", "owngoal", "yellow", "red"};
    return names[static_cast<int>(r)];
}
inline const char* to_string(BodyPart b) {
    static constexpr std::array<const char*, kNumBodyParts> names = {"foot", "head", "other"};
    return names[static_cast<int>(b)];
}

template <typename E, int N>
inline E enum_from_string(const std::string& s, const char* what) {
    for (int i = 0; i < N; ++i)
        if (s == to_string(static_cast<E>(i))) return static_cast<E>(i);
    throw SchemaError(std::string("unknown ") + what + " '" + s + "'");
}
inline ActionType action_type_from_string(const std::string& s) {
    return enum_from_string<ActionType, kNumActionTypes>(s, "action type");
}
inline ResultType result_from_string(const std::string& s) {
    return enum_from_string<ResultType, kNumResults>(s, "result");
}
inline BodyPart bodypart_from_string(const std::string& s) {
    return enum_from_string<BodyPart, kNumBodyParts>(s, "body part");
}

struct SpadlAction {
    int game_id = 0;
    int action_seq = 0;  // 0-based index within the match
    int period = 1;
    double time_s = 0.0;
    int team_id = 0;
    int player_id = 0;
    Vec2 start;  // internal units
    Vec2 end;
    ActionType action_type = ActionType::pass;
    ResultType result = ResultType::success;
    BodyPart bodypart = BodyPart::foot;
    std::string event_uuid;  // provider event this action came from
};

// Scoreline from the perspective of the team acting at the same index.
struct GameContext {
    int goals_possession_team = 0;
    int goals_defending_team = 0;
    int goal_diff = 0;
};

struct ConvertResult {
    std::vector<SpadlAction> actions;
    std::map<std::string, int> skipped;    // type name -> count
    int clamped_locations = 0;             // provider coords nudged into bounds
};

namespace detail {

inline BodyPart body_from_provider(const std::optional<std::string>& name) {
    if (!name) return BodyPart::foot;
    const std::string& s = *name;
    if (s == "Head") return BodyPart::head;
    if (s.find("Foot") != std::string::npos || s == "Drop Kick") return BodyPart::foot;
    if (s == "Keeper Arm" || s == "Other" || s == "No Touch" || s == "Chest")
        return BodyPart::other;
    return BodyPart::foot;
}

inline ResultType pass_result(const std::optional<std::string>& outcome) {
    if (!outcome) return ResultType::success;
    if (*outcome == "Pass Offside") return ResultType::offside;
    return ResultType::fail;  // Incomplete / Out / Unknown / Injury Clearance
}

inline bool won_outcome(const std::optional<std::string>& outcome) {
    if (!outcome) return true;
    const std::string& s = *outcome;
    return s == "Won" || s == "Success" || s == "Success In Play" || s == "Success Out" ||
           s == "Complete";
}

}  // namespace detail

// Map one provider event onto at most one SPADL action (type/result/bodypart
// only; positions are filled by the caller). Returns false for types outside
// the supported set.
inline bool classify_event(const RawEvent& e, ActionType& type, ResultType& result,
                           BodyPart& body) {
    body = detail::body_from_provider(e.body_part);
    result = ResultType::success;
    const std::string& t = e.type_name;
    if (t == "Pass") {
        const std::string& st = e.subtype_name;
        if (st == "Throw-in") type = ActionType::throw_in;
        else if (st == "Free Kick") type = e.is_cross ? ActionType::freekick_cross : ActionType::freekick_pass;
        else if (st == "Corner") type = e.is_cross ? ActionType::corner_cross : ActionType::corner_pass;
        else if (st == "Goal Kick") type = ActionType::goalkick;
        else type = e.is_cross ? ActionType::cross : ActionType::pass;
        result = detail::pass_result(e.outcome_name);
        return true;
    }
    if (t == "Carry") {
        type = ActionType::carry;
        result = ResultType::success;
        return true;
    }
    if (t == "Dribble") {
        type = ActionType::take_on;
        result = detail::won_outcome(e.outcome_name) ? ResultType::success : ResultType::fail;
        return true;
    }
    if (t == "Shot") {
        if (e.subtype_name == "Penalty") type = ActionType::shot_penalty;
        else if (e.subtype_name == "Free Kick") type = ActionType::shot_freekick;
        else type = ActionType::shot;
        result = e.is_goal ? ResultType::success : ResultType::fail;
        return true;
    }
    if (t == "Own Goal Against") {
        type = ActionType::bad_touch;
        result = ResultType::owngoal;
        return true;
    }
    if (t == "Duel") {
        if (e.subtype_name != "Tackle") return false;  // aerial duels are off-ball
        type = ActionType::tackle;
        result = detail::won_outcome(e.outcome_name) ? ResultType::success : ResultType::fail;
        return true;
    }
    if (t == "Interception") {
        type = ActionType::interception;
        result = detail::won_outcome(e.outcome_name) ? ResultType::success : ResultType::fail;
        return true;
    }
    if (t == "Clearance") {
        type = ActionType::clearance;
        return true;
    }
    if (t == "Miscontrol") {
        type = ActionType::bad_touch;
        result = ResultType::fail;
        return true;
    }
    if (t == "Foul Committed") {
        type = ActionType::foul;
        if (e.card_name && e.card_name->find("Red") != std::string::npos)
            result = ResultType::red;
        else if (e.card_name && e.card_name->find("Yellow") != std::string::npos)
            result = ResultType::yellow;
        else
            result = ResultType::fail;
        return true;
    }
    if (t == "Goal Keeper") {
        const std::string& st = e.subtype_name;
        if (st == "Save" || st == "Shot Saved" || st == "Penalty Saved") type = ActionType::keeper_save;
        else if (st == "Claim") type = ActionType::keeper_claim;
        else if (st == "Punch") type = ActionType::keeper_punch;
        else if (st == "Collected" || st == "Keeper Sweeper") type = ActionType::keeper_pick_up;
        else return false;  // goal conceded, smother, ... carry no on-ball action
        return true;
    }
    return false;
}

// Convert an ordered event stream to SPADL actions in not-yet-oriented
// internal coordinates. Events the representation does not cover are skipped
// and counted, never fabricated.
inline ConvertResult convert_match(const std::vector<RawEvent>& events) {
    ConvertResult out;
    for (const auto& e : events) {
        ActionType type;
        ResultType result;
        BodyPart body;
        if (!e.location || !e.player_id || !classify_event(e, type, result, body)) {
            ++out.skipped[e.type_name];
            continue;
        }
        SpadlAction a;
        a.game_id = e.match_id;
        a.action_seq = static_cast<int>(out.actions.size());
        a.period = e.period;
        a.time_s = e.clock_s;
        a.team_id = e.team_id;
        a.player_id = *e.player_id;
        a.action_type = type;
        a.result = result;
        a.bodypart = body;
        a.event_uuid = e.event_uuid;

        Vec2 start = *e.location;
        Vec2 clamped = clamp_to_provider(start);
        if (!(clamped == start)) ++out.clamped_locations;
        a.start = to_internal_xy(clamped);
        if (e.end_location) {
            Vec2 end = clamp_to_provider(*e.end_location);
            if (!(end == *e.end_location)) ++out.clamped_locations;
            a.end = to_internal_xy(end);
        } else {
            a.end = a.start;  // provider omitted the end position
        }
        out.actions.push_back(std::move(a));
    }
    return out;
}

enum class AttackDir { left_to_right, right_to_left };

inline AttackDir flipped(AttackDir d) {
    return d == AttackDir::left_to_right ? AttackDir::right_to_left : AttackDir::left_to_right;
}

struct DirectionTable {
    std::map<std::pair<int, int>, AttackDir> by_team_period;
    std::vector<std::string> warnings;

    AttackDir get(int team_id, int period) const {
        auto it = by_team_period.find({team_id, period});
        if (it != by_team_period.end()) return it->second;
        return AttackDir::left_to_right;
    }
};

// Infer each team's attack direction per period from the mean goalkeeper
// position in that period's freeze frames. A keeper on the left half means
// the team attacks rightward. Frames carry the acting team's keeper
// (teammate && keeper) and the opponent's (same flags negated), so one frame
// often votes for both teams.
inline DirectionTable infer_attack_directions(
    const std::vector<RawEvent>& events,
    const std::vector<std::optional<FreezeFrame>>& frames,
    const std::vector<int>& team_ids) {
    struct Acc {
        double sum_x = 0.0;
        int n = 0;
    };
    std::map<std::pair<int, int>, Acc> acc;
    std::map<int, bool> periods_seen;

    for (size_t i = 0; i < events.size() && i < frames.size(); ++i) {
        if (!frames[i]) continue;
        const RawEvent& e = events[i];
        periods_seen[e.period] = true;
        int other_team = 0;
        for (int t : team_ids)
            if (t != e.team_id) other_team = t;
        for (const auto& p : frames[i]->players) {
            if (!p.keeper) continue;
            const int owner = p.teammate ? e.team_id : other_team;
            if (owner == 0) continue;
            Vec2 internal = to_internal_xy(clamp_to_provider(p.pos));
            auto& a = acc[{owner, e.period}];
            a.sum_x += internal.x;
            a.n += 1;
        }
    }

    DirectionTable table;
    for (int team : team_ids) {
        std::optional<AttackDir> first_period;
        for (const auto& [period, seen] : periods_seen) {
            (void)seen;
            auto it = acc.find({team, period});
            if (it != acc.end() && it->second.n > 0) {
                const double mean_x = it->second.sum_x / it->second.n;
                const AttackDir d = mean_x < kPitchLength / 2.0 ? AttackDir::left_to_right
                                                                : AttackDir::right_to_left;
                table.by_team_period[{team, period}] = d;
                if (!first_period) {
                    // project the first resolved period back to period 1 parity
                    first_period = (period % 2 == 1) ? d : flipped(d);
                }
            }
        }
        for (const auto& [period, seen] : periods_seen) {
            (void)seen;
            if (table.by_team_period.count({team, period})) continue;
            if (first_period) {
                const AttackDir d =
                    (period % 2 == 1) ? *first_period : flipped(*first_period);
                table.by_team_period[{team, period}] = d;
                table.warnings.push_back(strfmt(
                    "team %d period %d: no keeper frames, direction carried over", team, period));
            } else {
                table.by_team_period[{team, period}] = AttackDir::left_to_right;
                table.warnings.push_back(strfmt(
                    "team %d period %d: no keeper frames at all, assuming left-to-right", team,
                    period));
            }
        }
    }
    return table;
}

// Orient one action so its team attacks rightward.
inline SpadlAction orient_ltr(SpadlAction a, AttackDir dir) {
    if (dir == AttackDir::right_to_left) {
        a.start = flip_ltr(a.start);
        a.end = flip_ltr(a.end);
    }
    return a;
}

// Orient a frame (already in internal units) with the same map as the action.
inline FreezeFrame orient_frame_ltr(FreezeFrame f, AttackDir dir) {
    if (dir == AttackDir::right_to_left) {
        for (auto& p : f.players) p.pos = flip_ltr(p.pos);
        for (auto& v : f.visible_area) v = flip_ltr(v);
    }
    return f;
}

// Frame in provider units -> internal units (players clamped into bounds).
inline FreezeFrame frame_to_internal(const FreezeFrame& f, int* clamped_count = nullptr) {
    FreezeFrame out = f;
    for (auto& p : out.players) {
        Vec2 c = clamp_to_provider(p.pos);
        if (clamped_count && !(c == p.pos)) ++*clamped_count;
        p.pos = to_internal_xy(c);
    }
    for (auto& v : out.visible_area) v = to_internal_xy(clamp_to_provider(v));
    return out;
}

// Goal bookkeeping per action, from the acting team's perspective, including
// the action itself. Own goals credit the opposing team.
inline std::vector<GameContext> track_score(const std::vector<SpadlAction>& actions) {
    std::vector<int> teams;
    for (const auto& a : actions)
        if (std::find(teams.begin(), teams.end(), a.team_id) == teams.end())
            teams.push_back(a.team_id);
    std::map<int, int> other_team;  // acting team -> opponent
    for (int t : teams)
        for (int u : teams)
            if (u != t) { other_team[t] = u; break; }

    std::map<int, int> goals_by_team;
    std::vector<GameContext> out;
    out.reserve(actions.size());
    for (const auto& a : actions) {
        const bool shot_goal =
            (a.action_type == ActionType::shot || a.action_type == ActionType::shot_penalty ||
             a.action_type == ActionType::shot_freekick) &&
            a.result == ResultType::success;
        if (shot_goal) goals_by_team[a.team_id] += 1;
        if (a.result == ResultType::owngoal && other_team.count(a.team_id))
            goals_by_team[other_team[a.team_id]] += 1;

        GameContext ctx;
        int for_goals = goals_by_team.count(a.team_id) ? goals_by_team[a.team_id] : 0;
        int against = 0;
        for (const auto& [team, g] : goals_by_team)
            if (team != a.team_id) against += g;
        ctx.goals_possession_team = for_goals;
        ctx.goals_defending_team = against;
        ctx.goal_diff = for_goals - against;
        out.push_back(ctx);
    }
    return out;
}

}  // namespace recov::spadl
