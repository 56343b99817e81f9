#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "recov/config.hpp"
#include "recov/ddi.hpp"
#include "recov/features.hpp"
#include "recov/fixtures.hpp"
#include "recov/gbt.hpp"
#include "recov/metrics.hpp"
#include "recov/parallel.hpp"
#include "recov/plot.hpp"
#include "recov/store.hpp"

namespace recov::pipeline {

namespace fs = std::filesystem;

// ---- stage parameter hashes: downstream stages refuse stale outputs ----

inline uint64_t ingest_params_hash(const RunConfig& cfg) {
    return fnv1a("ingest;v1;" + cfg.manifest);
}
inline uint64_t features_params_hash(const RunConfig& cfg) {
    return fnv1a(strfmt("features;v1;%s;%s", hex64(ingest_params_hash(cfg)).c_str(),
                        hex64(cfg.features.hash()).c_str()));
}
inline uint64_t train_params_hash(const RunConfig& cfg) {
    return fnv1a(strfmt("train;v1;%s;%s;split=%s", hex64(features_params_hash(cfg)).c_str(),
                        cfg.train.canonical().c_str(), fmt_double(cfg.split_fraction).c_str()));
}

inline std::string store_dir(const RunConfig& cfg) { return cfg.out_dir + "/store"; }
inline std::string features_dir(const RunConfig& cfg) { return cfg.out_dir + "/features"; }
inline std::string models_dir(const RunConfig& cfg) { return cfg.out_dir + "/models"; }
inline std::string reports_dir(const RunConfig& cfg) { return cfg.out_dir + "/reports"; }
inline std::string ddi_dir(const RunConfig& cfg) { return cfg.out_dir + "/ddi"; }
inline std::string plots_dir(const RunConfig& cfg) { return cfg.out_dir + "/plots"; }

// ---- gen: synthetic dataset in the ingest layout ----

inline std::string cmd_gen(const RunConfig& cfg, std::ostream& log) {
    const std::string dir = cfg.out_dir + "/dataset";
    fixtures::write_dataset(cfg.synth, dir);
    log << "gen: wrote " << cfg.synth.n_matches << " matches under " << dir << "\n";
    log << "gen: manifest " << dir << "/manifest.json\n";
    return dir + "/manifest.json";
}

// ---- ingest: provider files -> normalized per-match stores ----

struct IngestResult {
    int ok = 0;
    int failed = 0;
    std::vector<std::string> errors;
};

namespace detail {

struct IngestedMatch {
    bool ok = false;
    std::string error;
    MatchRecord record;
    NameTable names;
    JoinSummary join;
    std::map<std::string, int> skipped;
    int clamped = 0;
    std::vector<std::string> direction_warnings;
};

inline IngestedMatch ingest_one(const MatchMeta& meta) {
    IngestedMatch out;
    try {
        std::vector<RawEvent> events = load_events(meta.event_path, meta.match_id, &out.names);
        std::vector<FreezeFrame> frames;
        if (!meta.frames_path.empty() && fs::exists(meta.frames_path))
            frames = load_frames(meta.frames_path);
        auto [joined, join_summary] = join_frames(events, frames);
        out.join = join_summary;

        std::vector<int> team_ids;
        for (const auto& e : events)
            if (std::find(team_ids.begin(), team_ids.end(), e.team_id) == team_ids.end())
                team_ids.push_back(e.team_id);
        const auto directions = spadl::infer_attack_directions(events, joined, team_ids);
        out.direction_warnings = directions.warnings;

        auto converted = spadl::convert_match(events);
        out.skipped = converted.skipped;
        out.clamped = converted.clamped_locations;

        // frames by uuid, normalized to internal units
        std::map<std::string, FreezeFrame> frame_by_uuid;
        for (size_t i = 0; i < events.size(); ++i)
            if (joined[i])
                frame_by_uuid.emplace(events[i].event_uuid,
                                      spadl::frame_to_internal(*joined[i], &out.clamped));

        MatchRecord rec;
        rec.meta = meta;
        for (auto& a : converted.actions) {
            const spadl::AttackDir dir = directions.get(a.team_id, a.period);
            std::optional<FreezeFrame> frame;
            if (auto it = frame_by_uuid.find(a.event_uuid); it != frame_by_uuid.end())
                frame = spadl::orient_frame_ltr(it->second, dir);
            rec.actions.push_back(spadl::orient_ltr(a, dir));
            rec.frames.push_back(std::move(frame));
        }
        rec.contexts = spadl::track_score(rec.actions);
        out.record = std::move(rec);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace detail

inline IngestResult cmd_ingest(const RunConfig& cfg, std::ostream& log) {
    if (cfg.manifest.empty()) throw InputError("ingest: no manifest configured");
    const auto metas = load_manifest(cfg.manifest);
    if (metas.empty()) throw InputError("ingest: manifest lists no matches");

    const std::string dir = store_dir(cfg);
    fs::create_directories(dir);

    std::vector<detail::IngestedMatch> results(metas.size());
    parallel_for(metas.size(), cfg.threads,
                 [&](size_t i) { results[i] = detail::ingest_one(metas[i]); });

    IngestResult summary;
    NameTable names;
    std::vector<MatchMeta> ok_metas;
    std::ofstream sum(fs::path(dir) / "summary.txt", std::ios::binary);
    std::ofstream index(fs::path(dir) / "actions_index.tsv", std::ios::binary);
    index << "#recov-actions-index v1\n#columns match_id seq period team player\n";
    for (size_t i = 0; i < metas.size(); ++i) {
        auto& r = results[i];
        if (!r.ok) {
            ++summary.failed;
            summary.errors.push_back(strfmt("match %d: %s", metas[i].match_id, r.error.c_str()));
            sum << "match " << metas[i].match_id << " FAILED: " << r.error << "\n";
            log << "ingest: match " << metas[i].match_id << " failed: " << r.error << "\n";
            continue;
        }
        ++summary.ok;
        store::write_match(r.record, (fs::path(dir) / strfmt("%d.ndjson", metas[i].match_id)).string());
        for (const auto& a : r.record.actions)
            index << a.game_id << '\t' << a.action_seq << '\t' << a.period << '\t' << a.team_id
                  << '\t' << a.player_id << '\n';
        names.merge(r.names);
        ok_metas.push_back(metas[i]);

        sum << "match " << metas[i].match_id << ": events=" << r.join.events
            << " actions=" << r.record.actions.size() << " frames_matched=" << r.join.matched
            << " frames_unmatched=" << r.join.unmatched_frame_uuids.size()
            << " clamped_coords=" << r.clamped << "\n";
        for (const auto& [type, count] : r.skipped)
            sum << "  skipped " << type << " x" << count << "\n";
        for (const auto& w : r.direction_warnings) sum << "  warn " << w << "\n";
        for (const auto& uuid : r.join.unmatched_frame_uuids)
            sum << "  orphan frame " << uuid << "\n";
    }
    store::write_matches_meta(ok_metas, (fs::path(dir) / "matches.json").string());
    store::write_names(names, (fs::path(dir) / "names.json").string());
    store::write_stage_meta(dir, "ingest", ingest_params_hash(cfg));
    log << "ingest: " << summary.ok << " matches ok, " << summary.failed << " failed\n";
    if (summary.ok == 0) throw InputError("ingest: every match failed");
    return summary;
}

// ---- features: normalized stores -> two schema tables ----

inline features::EligibilityReport cmd_features(const RunConfig& cfg, std::ostream& log) {
    const std::string sdir = store_dir(cfg);
    store::require_fresh(sdir, "ingest", ingest_params_hash(cfg));
    const auto metas = store::read_matches_meta((fs::path(sdir) / "matches.json").string());
    if (metas.empty()) throw InputError("features: store holds no matches");

    std::vector<features::DatasetTables> parts(metas.size());
    parallel_for(metas.size(), cfg.threads, [&](size_t i) {
        const MatchRecord rec =
            store::read_match((fs::path(sdir) / strfmt("%d.ndjson", metas[i].match_id)).string());
        parts[i] = features::assemble_match(rec, cfg.features);
    });

    // concatenate in match order (metas are manifest-ordered; sort by id)
    std::vector<size_t> order(parts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return metas[a].match_id < metas[b].match_id; });

    features::DatasetTables all;
    all.table_a.schema = features::SchemaId::A;
    all.table_a.feature_names = features::feature_names(features::SchemaId::A, cfg.features);
    all.table_a.params_hash = cfg.features.hash();
    all.table_aut.schema = features::SchemaId::AUT;
    all.table_aut.feature_names = features::feature_names(features::SchemaId::AUT, cfg.features);
    all.table_aut.params_hash = cfg.features.hash();
    for (size_t i : order) {
        auto& p = parts[i];
        all.report.add(p.report);
        std::move(p.table_a.rows.begin(), p.table_a.rows.end(),
                  std::back_inserter(all.table_a.rows));
        std::move(p.table_aut.rows.begin(), p.table_aut.rows.end(),
                  std::back_inserter(all.table_aut.rows));
    }

    const std::string fdir = features_dir(cfg);
    fs::create_directories(fdir);
    store::write_table(all.table_a, cfg.features, fdir + "/table_A");
    store::write_table(all.table_aut, cfg.features, fdir + "/table_AUT");
    {
        std::ofstream out(fs::path(fdir) / "eligibility.txt", std::ios::binary);
        const auto& r = all.report;
        out << "recov-eligibility v1\n";
        out << "total_states " << r.total_states << "\n";
        out << "included " << r.included << "\n";
        out << "short_window " << r.short_window << "\n";
        out << "missing_frame " << r.missing_frame << "\n";
        out << "att_below_min " << r.att_below_min << "\n";
        out << "def_below_min " << r.def_below_min << "\n";
        out << "ball_outside " << r.ball_outside << "\n";
    }
    store::write_stage_meta(fdir, "features", features_params_hash(cfg));
    log << "features: " << all.table_a.rows.size() << " states, " << all.table_aut.rows.size()
        << " tracking-eligible\n";
    return all.report;
}

// ---- matrices over table rows ----

struct TableMatrix {
    std::vector<double> data;
    size_t n_rows = 0;
    size_t n_cols = 0;
    std::vector<int> labels;
    std::vector<features::StateKeys> keys;
    uint64_t schema_hash = 0;

    model::DataView view() const { return {data.data(), n_rows, n_cols}; }
};

inline TableMatrix to_matrix(const features::FeatureTable& table) {
    TableMatrix m;
    m.n_rows = table.rows.size();
    m.n_cols = table.feature_names.size();
    m.schema_hash = table.schema_hash();
    m.data.reserve(m.n_rows * m.n_cols);
    for (const auto& r : table.rows) {
        m.data.insert(m.data.end(), r.values.begin(), r.values.end());
        m.labels.push_back(r.label);
        m.keys.push_back(r.keys);
    }
    return m;
}

inline TableMatrix subset_by_match(const TableMatrix& m, const std::set<int>& ids) {
    TableMatrix out;
    out.n_cols = m.n_cols;
    out.schema_hash = m.schema_hash;
    for (size_t r = 0; r < m.n_rows; ++r) {
        if (!ids.count(m.keys[r].match_id)) continue;
        out.data.insert(out.data.end(), m.data.begin() + r * m.n_cols,
                        m.data.begin() + (r + 1) * m.n_cols);
        out.labels.push_back(m.labels[r]);
        out.keys.push_back(m.keys[r]);
        ++out.n_rows;
    }
    return out;
}

// ---- train: chronological split, two models, eval reports ----

struct TrainResult {
    metrics::EvalReport eval_a;
    metrics::EvalReport eval_aut;
    model::GameSplit split;
};

namespace detail {

inline double positive_rate(const std::vector<int>& y) {
    double s = 0.0;
    for (int v : y) s += v;
    return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

inline void write_train_log(const model::GbtModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << "#round logloss\n";
    for (size_t i = 0; i < m.round_losses.size(); ++i)
        out << i << " " << fmt_shortest(m.round_losses[i]) << "\n";
}

}  // namespace detail

inline TrainResult cmd_train(const RunConfig& cfg, std::ostream& log) {
    const std::string fdir = features_dir(cfg);
    store::require_fresh(fdir, "features", features_params_hash(cfg));
    const auto metas =
        store::read_matches_meta((fs::path(store_dir(cfg)) / "matches.json").string());

    TrainResult result;
    result.split = model::split_by_games(metas, cfg.split_fraction);
    if (result.split.empty_validation)
        log << "train: warning, validation split is empty at this match count\n";
    const std::set<int> train_ids(result.split.train_ids.begin(), result.split.train_ids.end());
    const std::set<int> valid_ids(result.split.valid_ids.begin(), result.split.valid_ids.end());

    const std::string mdir = models_dir(cfg);
    const std::string rdir = reports_dir(cfg);
    fs::create_directories(mdir);
    fs::create_directories(rdir);

    auto run_schema = [&](const char* name, const std::string& base_path,
                          metrics::EvalReport& eval_out) {
        const auto table = store::read_table(base_path);
        if (table.params_hash != cfg.features.hash())
            throw InputError(std::string("train: table ") + name +
                             " was built under a different feature configuration; re-run the "
                             "features stage");
        const TableMatrix all = to_matrix(table);
        const TableMatrix train = subset_by_match(all, train_ids);
        const TableMatrix valid = subset_by_match(all, valid_ids);
        if (train.n_rows == 0)
            throw InputError(std::string("train: schema ") + name + " has no training rows");
        const double rate = detail::positive_rate(train.labels);
        if (rate == 0.0 || rate == 1.0)
            throw InputError(strfmt("train: schema %s training labels are single-class "
                                    "(rate %g over %zu rows)",
                                    name, rate, train.n_rows));

        std::vector<std::string> fit_warnings;
        const model::GbtModel m = model::fit(train.view(), train.labels, cfg.train,
                                             train.schema_hash, cfg.threads, &fit_warnings);
        for (const auto& w : fit_warnings) log << "train: " << w << "\n";
        model::save_model(m, mdir + strfmt("/model_%s.txt", name));
        detail::write_train_log(m, mdir + strfmt("/train_log_%s.txt", name));

        std::vector<double> preds;
        if (valid.n_rows > 0) preds = model::predict_proba(m, valid.view(), valid.schema_hash,
                                                           cfg.threads);
        eval_out = metrics::evaluate(preds, valid.labels, rate);
        store::write_eval(eval_out, name, cfg.features.k, rate,
                          rdir + strfmt("/eval_%s_k%d.txt", name, cfg.features.k));
        log << "train: schema " << name << " n_train=" << train.n_rows
            << " n_valid=" << valid.n_rows << " nbs=" << fmt_shortest(eval_out.nbs) << "\n";
    };

    run_schema("A", fdir + "/table_A", result.eval_a);
    run_schema("AUT", fdir + "/table_AUT", result.eval_aut);
    store::write_stage_meta(mdir, "train", train_params_hash(cfg));
    return result;
}

// ---- sweep: retrain across k = 1..10 with relabeled windows ----

// Minimal per-action view used to rebuild labels for any k.
struct ActionIndex {
    struct Entry {
        int seq, period, team, player;
    };
    std::map<int, std::vector<Entry>> by_match;

    static ActionIndex read(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path);
        ActionIndex idx;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            int match, seq, period, team, player;
            if (std::sscanf(line.c_str(), "%d\t%d\t%d\t%d\t%d", &match, &seq, &period, &team,
                            &player) != 5)
                throw ParseError(path + ": bad index line: " + line);
            idx.by_match[match].push_back({seq, period, team, player});
        }
        return idx;
    }

    // label with window k for the state anchored at (match, seq)
    int label(int match, int seq, int k, int defending_team) const {
        const auto& v = by_match.at(match);
        const auto& a = v.at(seq);
        for (int j = seq + 1; j <= seq + k && j < static_cast<int>(v.size()); ++j) {
            if (v[j].period != a.period) break;
            if (v[j].team == defending_team) return 1;
        }
        return 0;
    }

    std::map<int, long long> player_action_counts() const {
        std::map<int, long long> counts;
        for (const auto& [match, v] : by_match)
            for (const auto& e : v) counts[e.player] += 1;
        return counts;
    }
};

struct SweepRow {
    int k = 0;
    double mu_a = 0.0, mu_aut = 0.0, mean_abs_diff = 0.0;
    double rate_a = 0.0, rate_aut = 0.0;
    double nbs_a = 0.0, nbs_aut = 0.0;
};

inline std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, std::ostream& log, int k_min = 1,
                                       int k_max = 10) {
    const std::string fdir = features_dir(cfg);
    store::require_fresh(fdir, "features", features_params_hash(cfg));
    const auto metas =
        store::read_matches_meta((fs::path(store_dir(cfg)) / "matches.json").string());
    const auto index =
        ActionIndex::read((fs::path(store_dir(cfg)) / "actions_index.tsv").string());

    const auto split = model::split_by_games(metas, cfg.split_fraction);
    const std::set<int> train_ids(split.train_ids.begin(), split.train_ids.end());
    const std::set<int> valid_ids(split.valid_ids.begin(), split.valid_ids.end());

    TableMatrix all_a = to_matrix(store::read_table(fdir + "/table_A"));
    TableMatrix all_aut = to_matrix(store::read_table(fdir + "/table_AUT"));

    std::vector<SweepRow> rows;
    for (int k = k_min; k <= k_max; ++k) {
        auto relabel = [&](TableMatrix& m) {
            for (size_t r = 0; r < m.n_rows; ++r)
                m.labels[r] = index.label(m.keys[r].match_id, m.keys[r].anchor_seq, k,
                                          m.keys[r].defending_team);
        };
        relabel(all_a);
        relabel(all_aut);

        const TableMatrix tr_a = subset_by_match(all_a, train_ids);
        const TableMatrix va_a = subset_by_match(all_a, valid_ids);
        const TableMatrix tr_t = subset_by_match(all_aut, train_ids);
        const TableMatrix va_t = subset_by_match(all_aut, valid_ids);
        const double rate_a = detail::positive_rate(tr_a.labels);
        const double rate_t = detail::positive_rate(tr_t.labels);

        const auto m_a = model::fit(tr_a.view(), tr_a.labels, cfg.train, tr_a.schema_hash,
                                    cfg.threads);
        const auto m_t = model::fit(tr_t.view(), tr_t.labels, cfg.train, tr_t.schema_hash,
                                    cfg.threads);

        const auto p_a = model::predict_proba(m_a, va_a.view(), va_a.schema_hash, cfg.threads);
        const auto p_t = model::predict_proba(m_t, va_t.view(), va_t.schema_hash, cfg.threads);

        SweepRow row;
        row.k = k;
        const auto ca = metrics::calibration_summary(p_a, va_a.labels);
        const auto ct = metrics::calibration_summary(p_t, va_t.labels);
        row.mu_a = ca.mean_prediction;
        row.rate_a = ca.positive_rate;
        row.mu_aut = ct.mean_prediction;
        row.rate_aut = ct.positive_rate;
        row.nbs_a = metrics::normalized_brier(p_a, va_a.labels, rate_a);
        row.nbs_aut = metrics::normalized_brier(p_t, va_t.labels, rate_t);

        // paired difference on the tracking-eligible validation states
        std::map<std::pair<int, int>, double> a_by_state;
        for (size_t r = 0; r < va_a.n_rows; ++r)
            a_by_state[{va_a.keys[r].match_id, va_a.keys[r].anchor_seq}] = p_a[r];
        double abs_sum = 0.0;
        for (size_t r = 0; r < va_t.n_rows; ++r)
            abs_sum += std::fabs(p_t[r] -
                                 a_by_state.at({va_t.keys[r].match_id, va_t.keys[r].anchor_seq}));
        row.mean_abs_diff = va_t.n_rows ? abs_sum / static_cast<double>(va_t.n_rows) : 0.0;

        rows.push_back(row);
        log << strfmt("sweep: k=%d mu_A=%.4f mu_AUT=%.4f mean|diff|=%.4f nbs_A=%.3f "
                      "nbs_AUT=%.3f\n",
                      k, row.mu_a, row.mu_aut, row.mean_abs_diff, row.nbs_a, row.nbs_aut);
    }

    const std::string rdir = reports_dir(cfg);
    fs::create_directories(rdir);
    {
        std::ofstream out(fs::path(rdir) / "sweep.tsv", std::ios::binary);
        out << "#recov-sweep v1\n#columns k mu_A mu_AUT mean_abs_diff rate_A rate_AUT nbs_A "
               "nbs_AUT\n";
        for (const auto& r : rows)
            out << r.k << '\t' << fmt_shortest(r.mu_a) << '\t' << fmt_shortest(r.mu_aut) << '\t'
                << fmt_shortest(r.mean_abs_diff) << '\t' << fmt_shortest(r.rate_a) << '\t'
                << fmt_shortest(r.rate_aut) << '\t' << fmt_shortest(r.nbs_a) << '\t'
                << fmt_shortest(r.nbs_aut) << '\n';
    }
    {
        std::ofstream out(fs::path(rdir) / "sweep.txt", std::ios::binary);
        out << strfmt("%3s %10s %10s %12s %8s %8s\n", "k", "mu(A)", "mu(AUT)", "mean|diff|",
                      "NBS_A", "NBS_AUT");
        for (const auto& r : rows)
            out << strfmt("%3d %10.4f %10.4f %12.4f %8.3f %8.3f\n", r.k, r.mu_a, r.mu_aut,
                          r.mean_abs_diff, r.nbs_a, r.nbs_aut);
    }
    return rows;
}

// ---- ddi: predictions for every state, paired into DDI records ----

inline std::vector<ddi::DdiRecord> cmd_ddi(const RunConfig& cfg, std::ostream& log) {
    const std::string fdir = features_dir(cfg);
    const std::string mdir = models_dir(cfg);
    store::require_fresh(fdir, "features", features_params_hash(cfg));
    store::require_fresh(mdir, "train", train_params_hash(cfg));

    const TableMatrix all_a = to_matrix(store::read_table(fdir + "/table_A"));
    const TableMatrix all_t = to_matrix(store::read_table(fdir + "/table_AUT"));
    const auto model_a = model::load_model(mdir + "/model_A.txt");
    const auto model_t = model::load_model(mdir + "/model_AUT.txt");

    const auto p_a = model::predict_proba(model_a, all_a.view(), all_a.schema_hash, cfg.threads);
    const auto p_t = model::predict_proba(model_t, all_t.view(), all_t.schema_hash, cfg.threads);

    std::map<std::pair<int, int>, double> a_by_state;
    for (size_t r = 0; r < all_a.n_rows; ++r)
        a_by_state[{all_a.keys[r].match_id, all_a.keys[r].anchor_seq}] = p_a[r];

    const auto records = ddi::compute_ddi(all_t.keys, p_t, all_t.labels, a_by_state);
    const std::string ddir = ddi_dir(cfg);
    fs::create_directories(ddir);
    store::write_ddi(records, ddir + "/records.tsv");
    store::write_stage_meta(ddir, "ddi", train_params_hash(cfg));
    log << "ddi: " << records.size() << " records\n";
    return records;
}

// ---- report: every aggregation over the DDI store ----

namespace detail {

inline std::string team_label(const NameTable& names, int id) {
    auto it = names.teams.find(id);
    return it == names.teams.end() ? std::to_string(id) : it->second;
}
inline std::string player_label(const NameTable& names, int id) {
    auto it = names.players.find(id);
    return it == names.players.end() ? std::to_string(id) : it->second;
}

}  // namespace detail

inline void cmd_report(const RunConfig& cfg, std::ostream& log) {
    const std::string ddir = ddi_dir(cfg);
    store::require_fresh(ddir, "ddi", train_params_hash(cfg));
    const auto records = store::read_ddi(ddir + "/records.tsv");
    if (records.empty()) throw InputError("report: DDI store is empty");
    const auto names = store::read_names((fs::path(store_dir(cfg)) / "names.json").string());
    const auto metas =
        store::read_matches_meta((fs::path(store_dir(cfg)) / "matches.json").string());
    const auto index =
        ActionIndex::read((fs::path(store_dir(cfg)) / "actions_index.tsv").string());

    const std::string rdir = reports_dir(cfg);
    fs::create_directories(rdir);

    {
        const auto rows = ddi::team_mean_ddi(records);
        std::ofstream tsv(fs::path(rdir) / "team_ddi.tsv", std::ios::binary);
        tsv << "#recov-team-ddi v1\n#columns rank team_id team mean_ddi n\n";
        std::ofstream txt(fs::path(rdir) / "team_ddi.txt", std::ios::binary);
        txt << strfmt("%4s %-24s %12s %8s\n", "pos", "team", "mean DDI", "n");
        for (size_t i = 0; i < rows.size(); ++i) {
            tsv << i + 1 << '\t' << rows[i].team_id << '\t'
                << detail::team_label(names, rows[i].team_id) << '\t'
                << fmt_shortest(rows[i].mean_ddi) << '\t' << rows[i].n << '\n';
            txt << strfmt("%4zu %-24s %12.6f %8lld\n", i + 1,
                          detail::team_label(names, rows[i].team_id).c_str(), rows[i].mean_ddi,
                          rows[i].n);
        }
    }
    {
        const auto stats = ddi::zone_ddi(records, cfg.zones);
        plot::write_zone_svg(stats, cfg.zones, rdir + "/zones.svg");
        plot::write_zone_sidecar(stats, cfg.zones, rdir + "/zones.tsv");
    }
    if (!cfg.period_ranges.empty()) {
        std::map<int, std::string> dates;
        for (const auto& m : metas) dates[m.match_id] = m.kickoff_date;
        const auto stats = ddi::period_split(records, dates, cfg.period_ranges);
        std::ofstream txt(fs::path(rdir) / "period_split.txt", std::ios::binary);
        txt << strfmt("%-20s %8s %12s %10s\n", "period", "games", "mean DDI", "records");
        std::ofstream tsv(fs::path(rdir) / "period_split.tsv", std::ios::binary);
        tsv << "#recov-period-split v1\n#columns label games mean_ddi n\n";
        for (const auto& s : stats) {
            txt << strfmt("%-20s %8lld %12.7f %10lld\n", s.label.c_str(), s.n_games, s.mean_ddi,
                          s.n_records);
            tsv << s.label << '\t' << s.n_games << '\t' << fmt_shortest(s.mean_ddi) << '\t'
                << s.n_records << '\n';
        }
    }
    auto player_table = [&](const std::vector<ddi::PlayerCount>& rows, const char* base,
                            const char* column) {
        std::ofstream tsv(fs::path(rdir) / (std::string(base) + ".tsv"), std::ios::binary);
        tsv << "#recov-" << base << " v1\n#columns rank player_id player " << column << "\n";
        std::ofstream txt(fs::path(rdir) / (std::string(base) + ".txt"), std::ios::binary);
        txt << strfmt("%4s %-28s %8s\n", "pos", "player", column);
        for (size_t i = 0; i < rows.size(); ++i) {
            tsv << i + 1 << '\t' << rows[i].player_id << '\t'
                << detail::player_label(names, rows[i].player_id) << '\t' << rows[i].count
                << '\n';
            txt << strfmt("%4zu %-28s %8lld\n", i + 1,
                          detail::player_label(names, rows[i].player_id).c_str(), rows[i].count);
        }
    };
    player_table(ddi::player_retention(records, cfg.retention_threshold), "retention", "count");
    player_table(ddi::player_turnover(records, cfg.turnover_threshold), "turnover", "count");
    {
        const auto rows =
            ddi::hospital_balls(records, index.player_action_counts(), cfg.hospital_delta,
                                cfg.hospital_min_count, cfg.hospital_mixed_schemas);
        std::ofstream tsv(fs::path(rdir) / "hospital.tsv", std::ios::binary);
        tsv << "#recov-hospital v1\n#columns rank player_id player count per_100_actions\n";
        std::ofstream txt(fs::path(rdir) / "hospital.txt", std::ios::binary);
        txt << strfmt("%4s %-28s %8s %16s\n", "pos", "player", "count", "per 100 actions");
        for (size_t i = 0; i < rows.size(); ++i) {
            tsv << i + 1 << '\t' << rows[i].player_id << '\t'
                << detail::player_label(names, rows[i].player_id) << '\t' << rows[i].count
                << '\t' << fmt_shortest(rows[i].per_100_actions) << '\n';
            txt << strfmt("%4zu %-28s %8lld %16.6f\n", i + 1,
                          detail::player_label(names, rows[i].player_id).c_str(), rows[i].count,
                          rows[i].per_100_actions);
        }
    }
    log << "report: wrote tables under " << rdir << "\n";
}

// ---- plot: surface / timeline / zones ----

inline void cmd_plot(const RunConfig& cfg, const std::string& what, const std::string& selector,
                     std::ostream& log) {
    const std::string pdir = plots_dir(cfg);
    fs::create_directories(pdir);

    auto parse_ints = [&](const std::string& s) {
        std::vector<int> out;
        std::istringstream is(s);
        std::string tok;
        while (std::getline(is, tok, ':')) out.push_back(std::atoi(tok.c_str()));
        return out;
    };

    if (what == "surface") {
        const auto sel = parse_ints(selector);
        if (sel.size() != 2)
            throw InputError("plot surface expects selector <match_id>:<anchor_seq>");
        const std::string path =
            (fs::path(store_dir(cfg)) / strfmt("%d.ndjson", sel[0])).string();
        if (!fs::exists(path)) {
            std::string ids;
            for (const auto& e : fs::directory_iterator(store_dir(cfg)))
                if (e.path().extension() == ".ndjson")
                    ids += (ids.empty() ? "" : ", ") + e.path().stem().string();
            throw InputError(strfmt("plot: no store for match %d; available: %s", sel[0],
                                    ids.c_str()));
        }
        const MatchRecord rec = store::read_match(path);
        if (sel[1] < 0 || sel[1] >= static_cast<int>(rec.actions.size()))
            throw InputError(strfmt("plot: anchor_seq %d out of range [0, %zu)", sel[1],
                                    rec.actions.size()));
        if (!rec.frames[sel[1]])
            throw InputError(strfmt("plot: action %d:%d has no freeze frame", sel[0], sel[1]));
        const auto surf = pc::compute_surface(*rec.frames[sel[1]], rec.actions[sel[1]].start,
                                              cfg.features.pc_params, cfg.features.grid);
        const std::string base = strfmt("%s/surface_%d_%d", pdir.c_str(), sel[0], sel[1]);
        plot::write_surface_svg(surf, base + ".svg");
        plot::write_surface_sidecar(surf, sel[0], rec.actions[sel[1]].event_uuid,
                                    cfg.features.pc_params.hash(), base + ".values.txt");
        log << "plot: wrote " << base << ".svg\n";
        return;
    }

    const auto records = store::read_ddi(ddi_dir(cfg) + "/records.tsv");
    if (what == "timeline") {
        const auto sel = parse_ints(selector);
        if (sel.size() != 3)
            throw InputError("plot timeline expects selector <match_id>:<from_seq>:<to_seq>");
        std::vector<ddi::DdiRecord> slice;
        for (const auto& r : records)
            if (r.match_id == sel[0] && r.anchor_seq >= sel[1] && r.anchor_seq <= sel[2])
                slice.push_back(r);
        std::sort(slice.begin(), slice.end(), [](const ddi::DdiRecord& a, const ddi::DdiRecord& b) {
            return a.anchor_seq < b.anchor_seq;
        });
        if (slice.empty()) {
            std::set<int> ids;
            for (const auto& r : records) ids.insert(r.match_id);
            std::string avail;
            for (int id : ids) avail += (avail.empty() ? "" : ", ") + std::to_string(id);
            throw InputError(strfmt("plot: no DDI records in %s; matches with records: %s",
                                    selector.c_str(), avail.c_str()));
        }
        const std::string base = strfmt("%s/timeline_%d_%d_%d", pdir.c_str(), sel[0], sel[1],
                                        sel[2]);
        plot::write_timeline_svg(slice, base + ".svg");
        plot::write_timeline_sidecar(slice, base + ".values.tsv");
        log << "plot: wrote " << base << ".svg (" << slice.size() << " states)\n";
        return;
    }
    if (what == "zones") {
        std::vector<ddi::DdiRecord> subset = records;
        std::string tag = "all";
        if (!selector.empty() && selector != "all") {
            const int team = std::atoi(selector.c_str());
            subset.clear();
            for (const auto& r : records)
                if (r.defending_team == team) subset.push_back(r);
            if (subset.empty()) {
                std::set<int> ids;
                for (const auto& r : records) ids.insert(r.defending_team);
                std::string avail;
                for (int id : ids) avail += (avail.empty() ? "" : ", ") + std::to_string(id);
                throw InputError(strfmt("plot: no records for defending team '%s'; teams: %s",
                                        selector.c_str(), avail.c_str()));
            }
            tag = selector;
        }
        const auto stats = ddi::zone_ddi(subset, cfg.zones);
        const std::string base = pdir + "/zones_" + tag;
        plot::write_zone_svg(stats, cfg.zones, base + ".svg");
        plot::write_zone_sidecar(stats, cfg.zones, base + ".values.tsv");
        log << "plot: wrote " << base << ".svg\n";
        return;
    }
    throw InputError("plot: unknown kind '" + what + "' (surface, timeline, zones)");
}

}  // namespace recov::pipeline
