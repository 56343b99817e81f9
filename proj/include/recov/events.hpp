#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "recov/common.hpp"
#include "recov/geometry.hpp"

namespace recov {

// One record of a provider event file, normalized just enough to convert
// downstream. Coordinates stay in provider units (120 x 80, y down) here.
struct RawEvent {
    std::string event_uuid;
    int match_id = 0;
    int index = 0;
    int period = 1;
    double clock_s = 0.0;  // seconds from period start
    int team_id = 0;
    std::optional<int> player_id;
    std::string type_name;
    std::optional<Vec2> location;
    std::optional<Vec2> end_location;
    std::optional<std::string> outcome_name;
    std::optional<std::string> body_part;
    bool is_goal = false;

    // Provider sub-type details the action conversion needs.
    std::string subtype_name;  // pass.type / duel.type / shot.type / goalkeeper.type
    bool is_cross = false;
    std::optional<std::string> card_name;
};

struct FramePlayer {
    bool teammate = false;  // relative to the event's acting team
    bool actor = false;
    bool keeper = false;
    Vec2 pos;  // provider units on load; internal after normalization
};

struct FreezeFrame {
    std::string event_uuid;
    Polygon visible_area;
    std::vector<FramePlayer> players;
};

struct MatchMeta {
    int match_id = 0;
    int home_team_id = 0;
    int away_team_id = 0;
    std::string home_team;
    std::string away_team;
    std::string kickoff_date;  // ISO YYYY-MM-DD
    std::string competition;
    std::string season;
    std::string event_path;
    std::string frames_path;
};

// id -> display name, filled while parsing so reports can print names.
struct NameTable {
    std::map<int, std::string> teams;
    std::map<int, std::string> players;

    void merge(const NameTable& other) {
        teams.insert(other.teams.begin(), other.teams.end());
        players.insert(other.players.begin(), other.players.end());
    }
};

namespace detail {

inline nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline double parse_timestamp_s(const std::string& ts, const std::string& where) {
    // "HH:MM:SS.mmm", clock restarts each period
    int h = 0, m = 0;
    double s = 0.0;
    if (std::sscanf(ts.c_str(), "%d:%d:%lf", &h, &m, &s) != 3)
        throw SchemaError("bad timestamp '" + ts + "' at " + where);
    return h * 3600.0 + m * 60.0 + s;
}

inline Vec2 parse_xy(const nlohmann::json& arr, const std::string& where) {
    if (!arr.is_array() || arr.size() < 2 || !arr[0].is_number() || !arr[1].is_number())
        throw SchemaError("expected [x, y] at " + where);
    return {arr[0].get<double>(), arr[1].get<double>()};
}

}  // namespace detail

// Parse one match's event array. Events come back sorted by index; unknown
// event types are retained with their type name.
inline std::vector<RawEvent> load_events(const std::string& path, int match_id,
                                         NameTable* names = nullptr) {
    const nlohmann::json root = detail::parse_json_file(path);
    if (!root.is_array()) throw SchemaError("event file " + path + " is not an array");

    std::vector<RawEvent> events;
    events.reserve(root.size());
    for (size_t i = 0; i < root.size(); ++i) {
        const auto& j = root[i];
        const std::string where = path + " record " + std::to_string(i);
        if (!j.is_object()) throw ParseError("non-object event at " + where);

        RawEvent e;
        e.match_id = match_id;
        if (!j.contains("id") || !j["id"].is_string())
            throw SchemaError("missing field 'id' at " + where);
        e.event_uuid = j["id"].get<std::string>();
        if (!j.contains("index") || !j["index"].is_number_integer())
            throw SchemaError("missing field 'index' at " + where);
        e.index = j["index"].get<int>();
        if (!j.contains("period") || !j["period"].is_number_integer())
            throw SchemaError("missing field 'period' at " + where);
        e.period = j["period"].get<int>();
        if (!j.contains("timestamp") || !j["timestamp"].is_string())
            throw SchemaError("missing field 'timestamp' at " + where);
        e.clock_s = detail::parse_timestamp_s(j["timestamp"].get<std::string>(), where);
        if (!j.contains("type") || !j["type"].is_object() || !j["type"].contains("name"))
            throw SchemaError("missing field 'type.name' at " + where);
        e.type_name = j["type"]["name"].get<std::string>();
        if (!j.contains("team") || !j["team"].contains("id"))
            throw SchemaError("missing field 'team.id' at " + where);
        e.team_id = j["team"]["id"].get<int>();
        if (names && j["team"].contains("name"))
            names->teams[e.team_id] = j["team"]["name"].get<std::string>();
        if (j.contains("player") && j["player"].is_object() && j["player"].contains("id")) {
            e.player_id = j["player"]["id"].get<int>();
            if (names && j["player"].contains("name"))
                names->players[*e.player_id] = j["player"]["name"].get<std::string>();
        }
        if (j.contains("location")) e.location = detail::parse_xy(j["location"], where + " location");

        const char* end_holder = nullptr;
        if (e.type_name == "Pass") end_holder = "pass";
        else if (e.type_name == "Carry") end_holder = "carry";
        else if (e.type_name == "Shot") end_holder = "shot";
        if (end_holder && j.contains(end_holder) && j[end_holder].is_object()) {
            const auto& sub = j[end_holder];
            if (sub.contains("end_location")) {
                const auto& el = sub["end_location"];
                if (el.is_array() && el.size() >= 2)
                    e.end_location = Vec2{el[0].get<double>(), el[1].get<double>()};
            }
            if (sub.contains("type") && sub["type"].contains("name"))
                e.subtype_name = sub["type"]["name"].get<std::string>();
            if (sub.contains("outcome") && sub["outcome"].contains("name"))
                e.outcome_name = sub["outcome"]["name"].get<std::string>();
            if (sub.contains("body_part") && sub["body_part"].contains("name"))
                e.body_part = sub["body_part"]["name"].get<std::string>();
            if (sub.contains("cross") && sub["cross"].is_boolean())
                e.is_cross = sub["cross"].get<bool>();
        }
        // outcome/type nested under the event-type object for the remaining types
        for (const char* holder : {"dribble", "duel", "interception", "goalkeeper",
                                   "clearance", "miscontrol", "foul_committed"}) {
            if (!j.contains(holder) || !j[holder].is_object()) continue;
            const auto& sub = j[holder];
            if (sub.contains("type") && sub["type"].contains("name"))
                e.subtype_name = sub["type"]["name"].get<std::string>();
            if (sub.contains("outcome") && sub["outcome"].contains("name"))
                e.outcome_name = sub["outcome"]["name"].get<std::string>();
            if (sub.contains("body_part") && sub["body_part"].contains("name"))
                e.body_part = sub["body_part"]["name"].get<std::string>();
            if (sub.contains("card") && sub["card"].contains("name"))
                e.card_name = sub["card"]["name"].get<std::string>();
        }
        if (e.type_name == "Shot" && e.outcome_name && *e.outcome_name == "Goal") e.is_goal = true;
        if (e.type_name == "Own Goal Against") e.is_goal = true;

        events.push_back(std::move(e));
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const RawEvent& a, const RawEvent& b) { return a.index < b.index; });
    for (size_t i = 1; i < events.size(); ++i)
        if (events[i].index <= events[i - 1].index)
            throw SchemaError(strfmt("%s: event index %d not strictly increasing",
                                     path.c_str(), events[i].index));
    return events;
}

// Parse one match's 360-frame array keyed by event_uuid.
inline std::vector<FreezeFrame> load_frames(const std::string& path) {
    const nlohmann::json root = detail::parse_json_file(path);
    if (!root.is_array()) throw SchemaError("frames file " + path + " is not an array");

    std::vector<FreezeFrame> frames;
    frames.reserve(root.size());
    std::map<std::string, size_t> seen;
    for (size_t i = 0; i < root.size(); ++i) {
        const auto& j = root[i];
        const std::string where = path + " record " + std::to_string(i);
        FreezeFrame f;
        if (!j.contains("event_uuid") || !j["event_uuid"].is_string())
            throw SchemaError("missing field 'event_uuid' at " + where);
        f.event_uuid = j["event_uuid"].get<std::string>();
        if (auto [it, inserted] = seen.emplace(f.event_uuid, i); !inserted)
            throw SchemaError("duplicate event_uuid '" + f.event_uuid + "' in " + path);

        if (!j.contains("visible_area") || !j["visible_area"].is_array())
            throw SchemaError("missing field 'visible_area' at " + where);
        const auto& va = j["visible_area"];
        if (va.size() % 2 != 0)
            throw SchemaError("odd visible_area coordinate list at " + where);
        for (size_t v = 0; v + 1 < va.size(); v += 2)
            f.visible_area.push_back({va[v].get<double>(), va[v + 1].get<double>()});
        // provider polygons repeat the first vertex at the end
        if (f.visible_area.size() >= 2 &&
            dist(f.visible_area.front(), f.visible_area.back()) < 1e-9)
            f.visible_area.pop_back();
        if (f.visible_area.size() < 3)
            throw SchemaError("visible_area with fewer than 3 vertices at " + where);

        if (!j.contains("freeze_frame") || !j["freeze_frame"].is_array())
            throw SchemaError("missing field 'freeze_frame' at " + where);
        int actors = 0;
        for (const auto& pj : j["freeze_frame"]) {
            FramePlayer p;
            p.teammate = pj.value("teammate", false);
            p.actor = pj.value("actor", false);
            p.keeper = pj.value("keeper", false);
            if (!pj.contains("location"))
                throw SchemaError("freeze_frame player without location at " + where);
            p.pos = detail::parse_xy(pj["location"], where + " freeze_frame");
            actors += p.actor ? 1 : 0;
            f.players.push_back(p);
        }
        if (actors > 1)
            throw SchemaError("more than one actor=true player at " + where);
        frames.push_back(std::move(f));
    }
    return frames;
}

struct JoinSummary {
    size_t events = 0;
    size_t matched = 0;
    std::vector<std::string> unmatched_frame_uuids;  // frames with no event
};

// Pair events with their frames by uuid. Every event yields exactly one pair;
// frames without an event are reported, never dropped silently.
inline std::pair<std::vector<std::optional<FreezeFrame>>, JoinSummary> join_frames(
    const std::vector<RawEvent>& events, const std::vector<FreezeFrame>& frames) {
    std::map<std::string, const FreezeFrame*> by_uuid;
    for (const auto& f : frames) by_uuid.emplace(f.event_uuid, &f);

    std::vector<std::optional<FreezeFrame>> out(events.size());
    JoinSummary summary;
    summary.events = events.size();
    std::map<std::string, bool> used;
    for (size_t i = 0; i < events.size(); ++i) {
        auto it = by_uuid.find(events[i].event_uuid);
        if (it != by_uuid.end()) {
            out[i] = *it->second;
            used[it->first] = true;
            ++summary.matched;
        }
    }
    for (const auto& f : frames)
        if (!used.count(f.event_uuid)) summary.unmatched_frame_uuids.push_back(f.event_uuid);
    return {std::move(out), std::move(summary)};
}

// Matches manifest: JSON array of
//   {match_id, event_path, frames_path, kickoff_date, home_team, away_team, ...}
// Relative paths resolve against the manifest's directory.
inline std::vector<MatchMeta> load_manifest(const std::string& path) {
    const nlohmann::json root = detail::parse_json_file(path);
    if (!root.is_array()) throw SchemaError("manifest " + path + " is not an array");
    std::string dir;
    if (auto slash = path.find_last_of('/'); slash != std::string::npos)
        dir = path.substr(0, slash + 1);
    auto resolve = [&dir](const std::string& p) {
        return (p.empty() || p[0] == '/') ? p : dir + p;
    };

    std::vector<MatchMeta> out;
    std::map<int, bool> ids;
    for (size_t i = 0; i < root.size(); ++i) {
        const auto& j = root[i];
        const std::string where = path + " record " + std::to_string(i);
        MatchMeta m;
        if (!j.contains("match_id")) throw SchemaError("missing 'match_id' at " + where);
        m.match_id = j["match_id"].get<int>();
        if (auto [it, inserted] = ids.emplace(m.match_id, true); !inserted)
            throw SchemaError(strfmt("duplicate match_id %d in manifest", m.match_id));
        if (!j.contains("event_path")) throw SchemaError("missing 'event_path' at " + where);
        m.event_path = resolve(j["event_path"].get<std::string>());
        m.frames_path = j.contains("frames_path") ? resolve(j["frames_path"].get<std::string>()) : "";
        m.kickoff_date = j.value("kickoff_date", "");
        m.home_team_id = j.value("home_team_id", 0);
        m.away_team_id = j.value("away_team_id", 0);
        m.home_team = j.value("home_team", "");
        m.away_team = j.value("away_team", "");
        m.competition = j.value("competition", "");
        m.season = j.value("season", "");
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace recov
