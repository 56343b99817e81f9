#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "recov/common.hpp"
#include "recov/ddi.hpp"
#include "recov/features.hpp"
#include "recov/match_record.hpp"
#include "recov/metrics.hpp"

// On-disk formats of the pipeline stages. Everything is line-oriented text
// with a version header so stages can reject files they do not understand,
// and all numeric output is canonical: re-running a stage with the same
// inputs reproduces files byte for byte.
namespace recov::store {

inline constexpr int kStoreVersion = 1;

namespace fs = std::filesystem;

// ---- per-stage metadata, used to detect stale outputs ----

inline void write_stage_meta(const std::string& dir, const std::string& stage,
                             uint64_t params_hash) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / "_meta.txt", std::ios::binary);
    if (!out) throw IoError("cannot write stage meta in " + dir);
    out << "stage " << stage << "\nversion " << kStoreVersion << "\nparams_hash "
        << hex64(params_hash) << "\n";
}

inline uint64_t read_stage_meta(const std::string& dir, const std::string& stage) {
    std::ifstream in(fs::path(dir) / "_meta.txt");
    if (!in)
        throw InputError("missing outputs for stage '" + stage + "' in " + dir +
                         "; run that stage first");
    std::string s, name;
    int version = 0;
    char hex[32] = {0};
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    if (std::sscanf(l1.c_str(), "stage %255s", hex) != 1)
        throw ParseError("corrupt stage meta in " + dir);
    name = hex;
    if (name != stage)
        throw InputError("directory " + dir + " holds stage '" + name + "', expected '" +
                         stage + "'");
    if (std::sscanf(l2.c_str(), "version %d", &version) != 1 || version != kStoreVersion)
        throw InputError("unsupported store version in " + dir);
    if (std::sscanf(l3.c_str(), "params_hash %31s", hex) != 1)
        throw ParseError("corrupt stage meta in " + dir);
    return std::strtoull(hex, nullptr, 16);
}

inline void require_fresh(const std::string& dir, const std::string& stage, uint64_t expected) {
    const uint64_t found = read_stage_meta(dir, stage);
    if (found != expected)
        throw InputError("outputs of stage '" + stage + "' in " + dir +
                         " were produced under a different configuration (" + hex64(found) +
                         " vs " + hex64(expected) + "); re-run that stage");
}

// ---- normalized per-match action store (newline-delimited JSON) ----

inline void write_match(const MatchRecord& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    nlohmann::ordered_json header{{"format", "recov.actions"},
                                  {"version", kStoreVersion},
                                  {"match_id", m.meta.match_id},
                                  {"home_team_id", m.meta.home_team_id},
                                  {"away_team_id", m.meta.away_team_id},
                                  {"kickoff_date", m.meta.kickoff_date},
                                  {"n_actions", m.actions.size()}};
    out << header.dump() << "\n";
    for (size_t i = 0; i < m.actions.size(); ++i) {
        const auto& a = m.actions[i];
        const auto& c = m.contexts[i];
        nlohmann::ordered_json j{{"seq", a.action_seq},
                                 {"uuid", a.event_uuid},
                                 {"p", a.period},
                                 {"t", a.time_s},
                                 {"team", a.team_id},
                                 {"pl", a.player_id},
                                 {"ty", spadl::to_string(a.action_type)},
                                 {"res", spadl::to_string(a.result)},
                                 {"bp", spadl::to_string(a.bodypart)},
                                 {"sx", a.start.x},
                                 {"sy", a.start.y},
                                 {"ex", a.end.x},
                                 {"ey", a.end.y},
                                 {"gf", c.goals_possession_team},
                                 {"ga", c.goals_defending_team}};
        if (m.frames[i]) {
            const auto& f = *m.frames[i];
            nlohmann::ordered_json va = nlohmann::ordered_json::array();
            for (const auto& v : f.visible_area) {
                va.push_back(v.x);
                va.push_back(v.y);
            }
            nlohmann::ordered_json pl = nlohmann::ordered_json::array();
            for (const auto& p : f.players)
                pl.push_back({p.teammate ? 1 : 0, p.actor ? 1 : 0, p.keeper ? 1 : 0, p.pos.x,
                              p.pos.y});
            j["frame"] = {{"va", std::move(va)}, {"pl", std::move(pl)}};
        }
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failure on " + path);
}

inline MatchRecord read_match(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty store file");
    MatchRecord m;
    try {
        const auto header = nlohmann::json::parse(line);
        if (header.value("format", "") != "recov.actions")
            throw ParseError(path + ": not an action store file");
        if (header.value("version", 0) != kStoreVersion)
            throw ParseError(path + ": unsupported store version");
        m.meta.match_id = header.value("match_id", 0);
        m.meta.home_team_id = header.value("home_team_id", 0);
        m.meta.away_team_id = header.value("away_team_id", 0);
        m.meta.kickoff_date = header.value("kickoff_date", "");
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            spadl::SpadlAction a;
            a.game_id = m.meta.match_id;
            a.action_seq = j.at("seq").get<int>();
            a.event_uuid = j.value("uuid", "");
            a.period = j.at("p").get<int>();
            a.time_s = j.at("t").get<double>();
            a.team_id = j.at("team").get<int>();
            a.player_id = j.at("pl").get<int>();
            a.action_type = spadl::action_type_from_string(j.at("ty").get<std::string>());
            a.result = spadl::result_from_string(j.at("res").get<std::string>());
            a.bodypart = spadl::bodypart_from_string(j.at("bp").get<std::string>());
            a.start = {j.at("sx").get<double>(), j.at("sy").get<double>()};
            a.end = {j.at("ex").get<double>(), j.at("ey").get<double>()};
            spadl::GameContext c;
            c.goals_possession_team = j.at("gf").get<int>();
            c.goals_defending_team = j.at("ga").get<int>();
            c.goal_diff = c.goals_possession_team - c.goals_defending_team;
            std::optional<FreezeFrame> frame;
            if (j.contains("frame")) {
                FreezeFrame f;
                f.event_uuid = a.event_uuid;
                const auto& va = j["frame"]["va"];
                for (size_t v = 0; v + 1 < va.size(); v += 2)
                    f.visible_area.push_back({va[v].get<double>(), va[v + 1].get<double>()});
                for (const auto& pj : j["frame"]["pl"]) {
                    FramePlayer p;
                    p.teammate = pj[0].get<int>() != 0;
                    p.actor = pj[1].get<int>() != 0;
                    p.keeper = pj[2].get<int>() != 0;
                    p.pos = {pj[3].get<double>(), pj[4].get<double>()};
                    f.players.push_back(p);
                }
                frame = std::move(f);
            }
            m.actions.push_back(std::move(a));
            m.contexts.push_back(c);
            m.frames.push_back(std::move(frame));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": corrupt store record: " + e.what());
    }
    return m;
}

// ---- dataset-level metadata ----

inline void write_matches_meta(const std::vector<MatchMeta>& metas, const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& m : metas)
        arr.push_back({{"match_id", m.match_id},
                       {"kickoff_date", m.kickoff_date},
                       {"home_team_id", m.home_team_id},
                       {"home_team", m.home_team},
                       {"away_team_id", m.away_team_id},
                       {"away_team", m.away_team},
                       {"competition", m.competition},
                       {"season", m.season}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << arr.dump(2) << "\n";
}

inline std::vector<MatchMeta> read_matches_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json arr;
    in >> arr;
    std::vector<MatchMeta> out;
    for (const auto& j : arr) {
        MatchMeta m;
        m.match_id = j.value("match_id", 0);
        m.kickoff_date = j.value("kickoff_date", "");
        m.home_team_id = j.value("home_team_id", 0);
        m.home_team = j.value("home_team", "");
        m.away_team_id = j.value("away_team_id", 0);
        m.away_team = j.value("away_team", "");
        m.competition = j.value("competition", "");
        m.season = j.value("season", "");
        out.push_back(std::move(m));
    }
    return out;
}

inline void write_names(const NameTable& names, const std::string& path) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json teams, players;
    for (const auto& [id, name] : names.teams) teams[std::to_string(id)] = name;
    for (const auto& [id, name] : names.players) players[std::to_string(id)] = name;
    j["teams"] = std::move(teams);
    j["players"] = std::move(players);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline NameTable read_names(const std::string& path) {
    NameTable names;
    std::ifstream in(path);
    if (!in) return names;  // names are a nicety, not a requirement
    nlohmann::json j;
    in >> j;
    for (const auto& [id, name] : j.value("teams", nlohmann::json::object()).items())
        names.teams[std::stoi(id)] = name.get<std::string>();
    for (const auto& [id, name] : j.value("players", nlohmann::json::object()).items())
        names.players[std::stoi(id)] = name.get<std::string>();
    return names;
}

// ---- feature tables: TSV plus a sidecar schema listing names and params ----

inline void write_table(const features::FeatureTable& table, const features::FeatureParams& fp,
                        const std::string& base_path) {
    {
        std::ofstream out(base_path + ".schema.txt", std::ios::binary);
        if (!out) throw IoError("cannot write " + base_path + ".schema.txt");
        out << "recov-feature-schema v" << kStoreVersion << "\n";
        out << "schema " << features::to_string(table.schema) << "\n";
        out << "params_hash " << hex64(table.params_hash) << "\n";
        out << "schema_hash " << hex64(table.schema_hash()) << "\n";
        out << "k " << fp.k << "\ntau1 " << fp.tau1 << "\ntau2 " << fp.tau2 << "\nn_att "
            << fp.n_att << "\nn_def " << fp.n_def << "\n";
        out << "p_set ";
        for (size_t i = 0; i < fp.p_set.size(); ++i)
            out << (i ? "," : "") << fmt_shortest(fp.p_set[i]);
        out << "\npc_params_hash " << hex64(fp.pc_params.hash()) << "\n";
        out << "n_features " << table.feature_names.size() << "\n";
        for (size_t i = 0; i < table.feature_names.size(); ++i)
            out << "feature " << i << " " << table.feature_names[i] << "\n";
    }
    std::ofstream out(base_path + ".tsv", std::ios::binary);
    if (!out) throw IoError("cannot write " + base_path + ".tsv");
    out << "#recov-features v" << kStoreVersion << "\n";
    out << "#schema " << features::to_string(table.schema) << "\n";
    out << "#params_hash " << hex64(table.params_hash) << "\n";
    out << "#schema_hash " << hex64(table.schema_hash()) << "\n";
    out << "#n_rows " << table.rows.size() << "\n";
    out << "#columns match_id anchor_seq acting_team defending_team player ball_x ball_y "
           "period time_s label values["
        << table.feature_names.size() << "]\n";
    std::string line;
    for (const auto& r : table.rows) {
        line.clear();
        line += std::to_string(r.keys.match_id);
        line += '\t';
        line += std::to_string(r.keys.anchor_seq);
        line += '\t';
        line += std::to_string(r.keys.acting_team);
        line += '\t';
        line += std::to_string(r.keys.defending_team);
        line += '\t';
        line += std::to_string(r.keys.player);
        line += '\t';
        line += fmt_shortest(r.keys.ball.x);
        line += '\t';
        line += fmt_shortest(r.keys.ball.y);
        line += '\t';
        line += std::to_string(r.keys.period);
        line += '\t';
        line += fmt_shortest(r.keys.time_s);
        line += '\t';
        line += std::to_string(r.label);
        for (double v : r.values) {
            line += '\t';
            line += fmt_shortest(v);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failure on " + base_path + ".tsv");
}

inline features::FeatureTable read_table(const std::string& base_path) {
    std::ifstream in(base_path + ".tsv", std::ios::binary);
    if (!in) throw IoError("cannot open " + base_path + ".tsv");
    features::FeatureTable table;

    {
        std::ifstream schema(base_path + ".schema.txt");
        if (!schema) throw IoError("cannot open " + base_path + ".schema.txt");
        std::string line;
        std::getline(schema, line);
        if (line.rfind("recov-feature-schema", 0) != 0)
            throw ParseError(base_path + ": bad schema sidecar header");
        while (std::getline(schema, line)) {
            std::istringstream is(line);
            std::string key;
            is >> key;
            if (key == "schema") {
                std::string v;
                is >> v;
                table.schema = v == "AUT" ? features::SchemaId::AUT : features::SchemaId::A;
            } else if (key == "params_hash") {
                std::string v;
                is >> v;
                table.params_hash = std::strtoull(v.c_str(), nullptr, 16);
            } else if (key == "feature") {
                int idx;
                std::string name;
                is >> idx >> name;
                table.feature_names.push_back(name);
            }
        }
    }

    std::string line;
    size_t expected_rows = 0;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::sscanf(line.c_str(), "#n_rows %zu", &expected_rows);
            continue;
        }
        features::FeatureRow row;
        const char* p = line.c_str();
        char* end = nullptr;
        auto next_ll = [&]() {
            const long long v = std::strtoll(p, &end, 10);
            if (end == p) throw ParseError(strfmt("%s.tsv:%d: bad field", base_path.c_str(), lineno));
            p = *end == '\t' ? end + 1 : end;
            return v;
        };
        auto next_d = [&]() {
            const double v = std::strtod(p, &end);
            if (end == p) throw ParseError(strfmt("%s.tsv:%d: bad field", base_path.c_str(), lineno));
            p = *end == '\t' ? end + 1 : end;
            return v;
        };
        row.keys.match_id = static_cast<int>(next_ll());
        row.keys.anchor_seq = static_cast<int>(next_ll());
        row.keys.acting_team = static_cast<int>(next_ll());
        row.keys.defending_team = static_cast<int>(next_ll());
        row.keys.player = static_cast<int>(next_ll());
        row.keys.ball.x = next_d();
        row.keys.ball.y = next_d();
        row.keys.period = static_cast<int>(next_ll());
        row.keys.time_s = next_d();
        row.label = static_cast<int>(next_ll());
        row.values.reserve(table.feature_names.size());
        while (*p != '\0' && *p != '\n') row.values.push_back(next_d());
        if (row.values.size() != table.feature_names.size())
            throw ParseError(strfmt("%s.tsv:%d: %zu values, schema lists %zu", base_path.c_str(),
                                    lineno, row.values.size(), table.feature_names.size()));
        table.rows.push_back(std::move(row));
    }
    if (expected_rows != table.rows.size())
        throw ParseError(strfmt("%s.tsv: header says %zu rows, found %zu", base_path.c_str(),
                                expected_rows, table.rows.size()));
    return table;
}

// ---- evaluation reports: flat key-value text ----

inline void write_eval(const metrics::EvalReport& r, const std::string& schema, int k,
                       double baseline_rate, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "recov-eval v" << kStoreVersion << "\n";
    out << "schema " << schema << "\n";
    out << "k " << k << "\n";
    out << "n " << r.n << "\n";
    out << "baseline_rate " << fmt_shortest(baseline_rate) << "\n";
    out << "positive_rate " << fmt_shortest(r.positive_rate) << "\n";
    out << "mean_prediction " << fmt_shortest(r.mean_prediction) << "\n";
    out << "brier " << fmt_shortest(r.brier) << "\n";
    out << "nbs " << fmt_shortest(r.nbs) << "\n";
    out << "logloss " << fmt_shortest(r.logloss) << "\n";
    out << "nll " << fmt_shortest(r.nll) << "\n";
    out << "auroc " << fmt_shortest(r.auroc) << "\n";
}

// ---- DDI record store ----

inline void write_ddi(const std::vector<ddi::DdiRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "#recov-ddi v" << kStoreVersion << "\n";
    out << "#columns match_id anchor_seq acting_team defending_team player ball_x ball_y "
           "period time_s p_a p_at ddi label\n";
    for (const auto& r : records) {
        out << r.match_id << '\t' << r.anchor_seq << '\t' << r.acting_team << '\t'
            << r.defending_team << '\t' << r.acting_player << '\t' << fmt_shortest(r.ball.x)
            << '\t' << fmt_shortest(r.ball.y) << '\t' << r.period << '\t'
            << fmt_shortest(r.time_s) << '\t' << fmt_shortest(r.p_a) << '\t'
            << fmt_shortest(r.p_at) << '\t' << fmt_shortest(r.ddi) << '\t' << r.label << '\n';
    }
    if (!out) throw IoError("write failure on " + path);
}

inline std::vector<ddi::DdiRecord> read_ddi(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<ddi::DdiRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        ddi::DdiRecord r;
        if (std::sscanf(line.c_str(),
                        "%d\t%d\t%d\t%d\t%d\t%lf\t%lf\t%d\t%lf\t%lf\t%lf\t%lf\t%d",
                        &r.match_id, &r.anchor_seq, &r.acting_team, &r.defending_team,
                        &r.acting_player, &r.ball.x, &r.ball.y, &r.period, &r.time_s, &r.p_a,
                        &r.p_at, &r.ddi, &r.label) != 13)
            throw ParseError(strfmt("%s:%d: bad DDI record", path.c_str(), lineno));
        out.push_back(r);
    }
    return out;
}

}  // namespace recov::store
