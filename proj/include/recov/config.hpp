#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "recov/common.hpp"
#include "recov/ddi.hpp"
#include "recov/features.hpp"
#include "recov/fixtures.hpp"
#include "recov/gbt.hpp"

namespace recov {

// Full parameter set of one pipeline run. Defaults follow the framework's
// published parameter choices (k=4, tau1=3, tau2=1, five players per side,
// 80/20 chronological split); everything is overridable through the config
// file or --set flags.
struct RunConfig {
    std::string manifest;
    std::string out_dir = "out";
    int threads = 1;
    double split_fraction = 0.8;

    features::FeatureParams features;
    model::TrainConfig train;
    fixtures::SynthConfig synth;

    double retention_threshold = 0.90;
    double turnover_threshold = 0.10;
    double hospital_delta = 0.75;
    long long hospital_min_count = 10;
    bool hospital_mixed_schemas = false;
    ddi::ZoneGrid zones;
    std::vector<ddi::DateRange> period_ranges;

    // Canonical text form; hashed to version every output.
    std::string canonical() const {
        std::ostringstream os;
        os << "k=" << features.k << "\ntau1=" << features.tau1 << "\ntau2=" << features.tau2
           << "\nn_att=" << features.n_att << "\nn_def=" << features.n_def << "\np_set=";
        for (size_t i = 0; i < features.p_set.size(); ++i)
            os << (i ? "," : "") << fmt_double(features.p_set[i]);
        os << "\ngrid=" << features.grid.rows << "x" << features.grid.cols;
        const auto& pp = features.pc_params;
        os << "\npc=" << fmt_double(pp.reaction_time_s) << "," << fmt_double(pp.max_speed_mps)
           << "," << fmt_double(pp.ball_speed_mps) << "," << fmt_double(pp.sigma_s) << ","
           << fmt_double(pp.lambda_per_s) << "," << fmt_double(pp.dt_s) << ","
           << fmt_double(pp.max_t_s) << "," << fmt_double(pp.convergence_eps) << ","
           << fmt_double(pp.rel_sigma_m);
        os << "\ntrain=" << train.canonical();
        os << "\nsplit_fraction=" << fmt_double(split_fraction);
        os << "\nretention=" << fmt_double(retention_threshold)
           << "\nturnover=" << fmt_double(turnover_threshold)
           << "\nhospital=" << fmt_double(hospital_delta) << "," << hospital_min_count << ","
           << (hospital_mixed_schemas ? 1 : 0);
        os << "\nzones=" << zones.cols << "x" << zones.rows;
        os << "\nsynth=" << synth.seed << "," << synth.n_matches << ","
           << synth.actions_per_match << "," << fmt_double(synth.base_recovery_hazard) << ","
           << fmt_double(synth.crowding_boost) << "," << synth.n_teams << ","
           << fmt_double(synth.frame_visibility);
        for (const auto& r : period_ranges)
            os << "\nperiod=" << r.label << ":" << r.start << ":" << r.end;
        os << "\n";
        return os.str();
    }
    uint64_t hash() const { return fnv1a(canonical()); }
};

namespace config_detail {

inline double to_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw SchemaError("config key '" + key + "' expects a number, got '" + v + "'");
    return d;
}
inline int to_int(const std::string& v, const std::string& key) {
    return static_cast<int>(to_double(v, key));
}
inline bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw SchemaError("config key '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace config_detail

// Apply one key=value setting. Unknown keys are an error so typos never pass
// silently.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    using namespace config_detail;
    if (key == "manifest") cfg.manifest = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "threads") cfg.threads = to_int(value, key);
    else if (key == "split_fraction") cfg.split_fraction = to_double(value, key);
    else if (key == "k") cfg.features.k = to_int(value, key);
    else if (key == "tau1") cfg.features.tau1 = to_int(value, key);
    else if (key == "tau2") cfg.features.tau2 = to_int(value, key);
    else if (key == "n_att") cfg.features.n_att = to_int(value, key);
    else if (key == "n_def") cfg.features.n_def = to_int(value, key);
    else if (key == "p_set") {
        cfg.features.p_set.clear();
        std::istringstream is(value);
        std::string tok;
        while (std::getline(is, tok, ',')) cfg.features.p_set.push_back(to_double(tok, key));
        if (cfg.features.p_set.empty()) throw SchemaError("config key 'p_set' is empty");
    } else if (key == "grid_rows") cfg.features.grid.rows = to_int(value, key);
    else if (key == "grid_cols") cfg.features.grid.cols = to_int(value, key);
    else if (key == "pc_reaction_time_s") cfg.features.pc_params.reaction_time_s = to_double(value, key);
    else if (key == "pc_max_speed_mps") cfg.features.pc_params.max_speed_mps = to_double(value, key);
    else if (key == "pc_ball_speed_mps") cfg.features.pc_params.ball_speed_mps = to_double(value, key);
    else if (key == "pc_sigma_s") cfg.features.pc_params.sigma_s = to_double(value, key);
    else if (key == "pc_lambda_per_s") cfg.features.pc_params.lambda_per_s = to_double(value, key);
    else if (key == "pc_dt_s") cfg.features.pc_params.dt_s = to_double(value, key);
    else if (key == "pc_max_t_s") cfg.features.pc_params.max_t_s = to_double(value, key);
    else if (key == "pc_convergence_eps") cfg.features.pc_params.convergence_eps = to_double(value, key);
    else if (key == "pc_rel_sigma_m") cfg.features.pc_params.rel_sigma_m = to_double(value, key);
    else if (key == "n_trees") cfg.train.n_trees = to_int(value, key);
    else if (key == "max_depth") cfg.train.max_depth = to_int(value, key);
    else if (key == "learning_rate") cfg.train.learning_rate = to_double(value, key);
    else if (key == "min_samples_leaf") cfg.train.min_samples_leaf = to_int(value, key);
    else if (key == "subsample_fraction") cfg.train.subsample_fraction = to_double(value, key);
    else if (key == "histogram_bins") cfg.train.histogram_bins = to_int(value, key);
    else if (key == "seed") {
        cfg.train.seed = std::strtoull(value.c_str(), nullptr, 10);
        cfg.synth.seed = cfg.train.seed;
    } else if (key == "retention_threshold") cfg.retention_threshold = to_double(value, key);
    else if (key == "turnover_threshold") cfg.turnover_threshold = to_double(value, key);
    else if (key == "hospital_delta") cfg.hospital_delta = to_double(value, key);
    else if (key == "hospital_min_count") cfg.hospital_min_count = to_int(value, key);
    else if (key == "hospital_mixed_schemas") cfg.hospital_mixed_schemas = to_bool(value, key);
    else if (key == "zone_cols") cfg.zones.cols = to_int(value, key);
    else if (key == "zone_rows") cfg.zones.rows = to_int(value, key);
    else if (key == "period_range") {
        // label:start:end, may repeat
        const auto c1 = value.find(':');
        const auto c2 = value.find(':', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw SchemaError("period_range expects label:YYYY-MM-DD:YYYY-MM-DD");
        cfg.period_ranges.push_back(
            {value.substr(0, c1), value.substr(c1 + 1, c2 - c1 - 1), value.substr(c2 + 1)});
    } else if (key == "synth_matches") cfg.synth.n_matches = to_int(value, key);
    else if (key == "synth_actions_per_match") cfg.synth.actions_per_match = to_int(value, key);
    else if (key == "synth_base_hazard") cfg.synth.base_recovery_hazard = to_double(value, key);
    else if (key == "synth_crowding_boost") cfg.synth.crowding_boost = to_double(value, key);
    else if (key == "synth_teams") cfg.synth.n_teams = to_int(value, key);
    else if (key == "synth_frame_visibility") cfg.synth.frame_visibility = to_double(value, key);
    else throw SchemaError("unknown config key '" + key + "'");
}

// key = value lines, '#' comments, blank lines ignored.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SchemaError(strfmt("%s:%d: expected key = value", path.c_str(), lineno));
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace recov
