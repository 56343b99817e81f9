#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "recov/common.hpp"
#include "recov/features.hpp"
#include "recov/geometry.hpp"

namespace recov::ddi {

// Per-action probability pair and their difference, attributed to the
// defending team. Ball coordinates are re-expressed so the defending team
// attacks rightward.
struct DdiRecord {
    int match_id = 0;
    int anchor_seq = 0;
    int acting_team = 0;
    int defending_team = 0;
    int acting_player = 0;
    Vec2 ball;  // defending-team-attacks-right frame
    int period = 1;
    double time_s = 0.0;
    double p_a = 0.0;   // P(S, A)
    double p_at = 0.0;  // P(S, A u T)
    double ddi = 0.0;   // p_at - p_a
    int label = 0;
};

// Join the two prediction sets over the eligible-state key set. DDI exists
// only where both predictions do; uncovered keys are an error, not a skip.
inline std::vector<DdiRecord> compute_ddi(
    const std::vector<features::StateKeys>& keys_at, const std::vector<double>& preds_at,
    const std::vector<int>& labels,
    const std::map<std::pair<int, int>, double>& preds_a_by_state) {
    if (keys_at.size() != preds_at.size() || keys_at.size() != labels.size())
        throw RangeError("compute_ddi: misaligned inputs");
    std::vector<std::string> missing;
    std::vector<DdiRecord> out;
    out.reserve(keys_at.size());
    for (size_t i = 0; i < keys_at.size(); ++i) {
        const auto& k = keys_at[i];
        auto it = preds_a_by_state.find({k.match_id, k.anchor_seq});
        if (it == preds_a_by_state.end()) {
            if (missing.size() < 8)
                missing.push_back(strfmt("(%d,%d)", k.match_id, k.anchor_seq));
            continue;
        }
        DdiRecord r;
        r.match_id = k.match_id;
        r.anchor_seq = k.anchor_seq;
        r.acting_team = k.acting_team;
        r.defending_team = k.defending_team;
        r.acting_player = k.player;
        r.ball = flip_ltr(k.ball);  // acting-team frame -> defending-team frame
        r.period = k.period;
        r.time_s = k.time_s;
        r.p_a = it->second;
        r.p_at = preds_at[i];
        r.ddi = r.p_at - r.p_a;
        r.label = labels[i];
        out.push_back(r);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
        throw RangeError(strfmt("compute_ddi: %zu eligible states lack a schema-A prediction: %s",
                                keys_at.size() - out.size(), list.c_str()));
    }
    return out;
}

struct TeamDdiRow {
    int team_id = 0;
    double mean_ddi = 0.0;
    long long n = 0;
};

// Mean DDI per defending team, best first.
inline std::vector<TeamDdiRow> team_mean_ddi(const std::vector<DdiRecord>& records) {
    if (records.empty()) throw RangeError("team_mean_ddi: no records");
    std::map<int, std::pair<double, long long>> acc;
    for (const auto& r : records) {
        auto& a = acc[r.defending_team];
        a.first += r.ddi;
        a.second += 1;
    }
    std::vector<TeamDdiRow> rows;
    for (const auto& [team, a] : acc)
        rows.push_back({team, a.first / static_cast<double>(a.second), a.second});
    std::sort(rows.begin(), rows.end(), [](const TeamDdiRow& a, const TeamDdiRow& b) {
        if (a.mean_ddi != b.mean_ddi) return a.mean_ddi > b.mean_ddi;
        return a.team_id < b.team_id;
    });
    return rows;
}

// Columns x rows partition of the pitch, right/top edges inclusive at the
// boundary. Zone (0,0) is the defending team's own bottom-left corner.
struct ZoneGrid {
    int cols = 6;
    int rows = 3;

    int col_of(double x) const {
        const int c = static_cast<int>(x / kPitchLength * cols);
        return std::clamp(c, 0, cols - 1);
    }
    int row_of(double y) const {
        const int r = static_cast<int>(y / kPitchWidth * rows);
        return std::clamp(r, 0, rows - 1);
    }
};

struct ZoneStat {
    int col = 0;
    int row = 0;
    double mean_ddi = 0.0;
    long long n = 0;
};

// Mean DDI per occupied zone; empty zones are absent from the result.
inline std::vector<ZoneStat> zone_ddi(const std::vector<DdiRecord>& records,
                                      const ZoneGrid& grid = {}) {
    std::map<std::pair<int, int>, std::pair<double, long long>> acc;
    for (const auto& r : records) {
        auto& a = acc[{grid.col_of(r.ball.x), grid.row_of(r.ball.y)}];
        a.first += r.ddi;
        a.second += 1;
    }
    std::vector<ZoneStat> out;
    for (const auto& [key, a] : acc)
        out.push_back({key.first, key.second, a.first / static_cast<double>(a.second), a.second});
    return out;
}

struct DateRange {
    std::string label;
    std::string start;  // inclusive, ISO date
    std::string end;    // exclusive
};

struct PeriodStat {
    std::string label;
    double mean_ddi = 0.0;
    long long n_records = 0;
    long long n_games = 0;
};

// Bucket records by their match's kickoff date using closed-start/open-end
// ranges; dates outside every range fall into "unassigned".
inline std::vector<PeriodStat> period_split(const std::vector<DdiRecord>& records,
                                            const std::map<int, std::string>& match_dates,
                                            const std::vector<DateRange>& ranges) {
    for (size_t i = 0; i < ranges.size(); ++i)
        for (size_t j = i + 1; j < ranges.size(); ++j)
            if (ranges[i].start < ranges[j].end && ranges[j].start < ranges[i].end)
                throw RangeError(strfmt("period_split: ranges '%s' and '%s' overlap",
                                        ranges[i].label.c_str(), ranges[j].label.c_str()));

    std::map<std::string, std::pair<double, long long>> acc;
    std::map<std::string, std::map<int, bool>> games;
    for (const auto& r : records) {
        auto it = match_dates.find(r.match_id);
        if (it == match_dates.end())
            throw RangeError(strfmt("period_split: match %d has no kickoff date", r.match_id));
        std::string label = "unassigned";
        for (const auto& range : ranges)
            if (it->second >= range.start && it->second < range.end) label = range.label;
        auto& a = acc[label];
        a.first += r.ddi;
        a.second += 1;
        games[label][r.match_id] = true;
    }
    std::vector<PeriodStat> out;
    for (const auto& range : ranges) {
        auto it = acc.find(range.label);
        if (it == acc.end()) {
            out.push_back({range.label, 0.0, 0, 0});
        } else {
            out.push_back({range.label, it->second.first / it->second.second, it->second.second,
                           static_cast<long long>(games[range.label].size())});
        }
    }
    if (acc.count("unassigned"))
        out.push_back({"unassigned", acc["unassigned"].first / acc["unassigned"].second,
                       acc["unassigned"].second,
                       static_cast<long long>(games["unassigned"].size())});
    return out;
}

struct PlayerCount {
    int player_id = 0;
    long long count = 0;
};

// Actions the on-ball player kept despite a high predicted recovery
// probability: p_at > threshold and a negative label.
inline std::vector<PlayerCount> player_retention(const std::vector<DdiRecord>& records,
                                                 double threshold = 0.90) {
    std::map<int, long long> acc;
    for (const auto& r : records)
        if (r.p_at > threshold && r.label == 0) acc[r.acting_player] += 1;
    std::vector<PlayerCount> out;
    for (const auto& [player, count] : acc) out.push_back({player, count});
    std::sort(out.begin(), out.end(), [](const PlayerCount& a, const PlayerCount& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.player_id < b.player_id;
    });
    return out;
}

// Mirror of player_retention: p_at strictly below the threshold with a
// positive label.
inline std::vector<PlayerCount> player_turnover(const std::vector<DdiRecord>& records,
                                                double threshold = 0.10) {
    std::map<int, long long> acc;
    for (const auto& r : records)
        if (r.p_at < threshold && r.label == 1) acc[r.acting_player] += 1;
    std::vector<PlayerCount> out;
    for (const auto& [player, count] : acc) out.push_back({player, count});
    std::sort(out.begin(), out.end(), [](const PlayerCount& a, const PlayerCount& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.player_id < b.player_id;
    });
    return out;
}

struct HospitalBallRow {
    int player_id = 0;
    long long count = 0;
    double per_100_actions = 0.0;
};

// A hospital ball: the recovery probability jumps by at least `delta` from
// one eligible state to the next, the next action stays with a teammate, and
// possession is lost within the window. By default both states use the
// tracking model; `mixed_schemas` reproduces the variant that takes the
// action-only prediction at the earlier state.
inline std::vector<HospitalBallRow> hospital_balls(std::vector<DdiRecord> records,
                                                   const std::map<int, long long>& player_actions,
                                                   double delta = 0.75, long long min_count = 10,
                                                   bool mixed_schemas = false) {
    std::sort(records.begin(), records.end(), [](const DdiRecord& a, const DdiRecord& b) {
        if (a.match_id != b.match_id) return a.match_id < b.match_id;
        return a.anchor_seq < b.anchor_seq;
    });
    std::map<int, long long> flags;
    for (size_t i = 0; i + 1 < records.size(); ++i) {
        const DdiRecord& cur = records[i];
        const DdiRecord& nxt = records[i + 1];
        if (cur.match_id != nxt.match_id) continue;
        if (nxt.anchor_seq != cur.anchor_seq + 1) continue;  // needs consecutive states
        if (nxt.acting_team != cur.acting_team) continue;    // next action by a teammate
        const double before = mixed_schemas ? cur.p_a : cur.p_at;
        if (nxt.p_at - before < delta) continue;
        if (cur.label != 1) continue;  // possession must actually change
        flags[cur.acting_player] += 1;
    }
    std::vector<HospitalBallRow> out;
    for (const auto& [player, count] : flags) {
        if (count <= min_count) continue;
        auto it = player_actions.find(player);
        const long long total = it == player_actions.end() ? 0 : it->second;
        HospitalBallRow row{player, count, 0.0};
        if (total > 0) row.per_100_actions = 100.0 * static_cast<double>(count) / total;
        out.push_back(row);
    }
    std::sort(out.begin(), out.end(), [](const HospitalBallRow& a, const HospitalBallRow& b) {
        if (a.per_100_actions != b.per_100_actions) return a.per_100_actions > b.per_100_actions;
        return a.player_id < b.player_id;
    });
    return out;
}

}  // namespace recov::ddi
