// Command-line front end for the ball-recovery pipeline: generate or ingest
// data, build feature tables, train the two classifiers, compute DDI records
// and emit reports and plots.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recov/config.hpp"
#include "recov/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::string manifest;
    std::string out_dir;
    int threads = 0;
    int k = 0;
    long long seed = -1;
    std::string plot_what;
    std::string plot_selector;
};

recov::RunConfig build_config(const CliOptions& opt) {
    recov::RunConfig cfg;
    if (!opt.config_path.empty()) cfg = recov::load_config(opt.config_path);
    if (const char* env_out = std::getenv("RECOV_OUT"); env_out && *env_out)
        cfg.out_dir = env_out;
    for (const auto& kv : opt.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw recov::InputError("--set expects key=value, got '" + kv + "'");
        recov::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!opt.manifest.empty()) cfg.manifest = opt.manifest;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.threads > 0) cfg.threads = opt.threads;
    if (opt.k > 0) cfg.features.k = opt.k;
    if (opt.seed >= 0) {
        cfg.train.seed = static_cast<uint64_t>(opt.seed);
        cfg.synth.seed = static_cast<uint64_t>(opt.seed);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ball-recovery probability models and defensive-positioning reports"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "run configuration file (key = value lines)");
    app.add_option("--set", opt.sets, "override any config key, e.g. --set k=6")
        ->take_all();
    app.add_option("--manifest", opt.manifest, "matches manifest path");
    app.add_option("--out", opt.out_dir, "output root (also RECOV_OUT)");
    app.add_option("--threads", opt.threads, "worker thread cap");
    app.add_option("--k", opt.k, "recovery window in actions");
    app.add_option("--seed", opt.seed, "seed for training and generation");

    auto* gen = app.add_subcommand("gen", "write a synthetic dataset in the ingest layout");
    auto* ingest = app.add_subcommand("ingest", "parse and normalize the manifest's matches");
    auto* features = app.add_subcommand("features", "build schema A and AUT feature tables");
    auto* train = app.add_subcommand("train", "chronological split, fit and evaluate both models");
    auto* sweep = app.add_subcommand("sweep", "retrain over k = 1..10 and tabulate");
    auto* ddi = app.add_subcommand("ddi", "predict every state and pair into DDI records");
    auto* report = app.add_subcommand("report", "team, zone, period and player tables");
    auto* plot = app.add_subcommand("plot", "surface / timeline / zones vector images");
    plot->add_option("what", opt.plot_what, "surface | timeline | zones")->required();
    plot->add_option("selector", opt.plot_selector,
                     "surface: match:seq, timeline: match:from:to, zones: all|team_id");

    CLI11_PARSE(app, argc, argv);

    try {
        const recov::RunConfig cfg = build_config(opt);
        std::ostream& log = std::cout;
        if (gen->parsed()) recov::pipeline::cmd_gen(cfg, log);
        else if (ingest->parsed()) recov::pipeline::cmd_ingest(cfg, log);
        else if (features->parsed()) recov::pipeline::cmd_features(cfg, log);
        else if (train->parsed()) recov::pipeline::cmd_train(cfg, log);
        else if (sweep->parsed()) recov::pipeline::cmd_sweep(cfg, log);
        else if (ddi->parsed()) recov::pipeline::cmd_ddi(cfg, log);
        else if (report->parsed()) recov::pipeline::cmd_report(cfg, log);
        else if (plot->parsed()) recov::pipeline::cmd_plot(cfg, opt.plot_what, opt.plot_selector, log);
        return 0;
    } catch (const recov::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
