#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "recov/common.hpp"
#include "recov/events.hpp"
#include "recov/parallel.hpp"

namespace recov::model {

struct TrainConfig {
    int n_trees = 200;
    int max_depth = 6;
    double learning_rate = 0.1;
    int min_samples_leaf = 20;
    double subsample_fraction = 1.0;
    int histogram_bins = 64;
    uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw RangeError("TrainConfig.n_trees must be >= 1");
        if (max_depth < 1) throw RangeError("TrainConfig.max_depth must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw RangeError("TrainConfig.learning_rate must be in (0, 1]");
        if (min_samples_leaf < 1) throw RangeError("TrainConfig.min_samples_leaf must be >= 1");
        if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
            throw RangeError("TrainConfig.subsample_fraction must be in (0, 1]");
        if (histogram_bins < 2 || histogram_bins > 256)
            throw RangeError("TrainConfig.histogram_bins must be in [2, 256]");
    }

    std::string canonical() const {
        return strfmt("n_trees=%d max_depth=%d learning_rate=%s min_samples_leaf=%d "
                      "subsample_fraction=%s histogram_bins=%d seed=%llu",
                      n_trees, max_depth, fmt_double(learning_rate).c_str(), min_samples_leaf,
                      fmt_double(subsample_fraction).c_str(), histogram_bins,
                      static_cast<unsigned long long>(seed));
    }
};

// Row-major borrowed matrix.
struct DataView {
    const double* data = nullptr;
    size_t n_rows = 0;
    size_t n_cols = 0;

    const double* row(size_t r) const { return data + r * n_cols; }
    double at(size_t r, size_t c) const { return data[r * n_cols + c]; }
};

struct TreeNode {
    int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    double leaf_value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const double* x) const {
        int32_t i = 0;
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].leaf_value;
    }
};

struct GbtModel {
    static constexpr int kFormatVersion = 1;
    uint64_t schema_hash = 0;
    int n_features = 0;
    double base_score = 0.0;  // log-odds of the training positive rate
    bool single_class = false;
    TrainConfig config;
    std::vector<Tree> trees;
    std::vector<double> round_losses;  // training logistic loss per round
};

namespace detail {

inline constexpr double kLeafRegularization = 1.0;

inline double sigmoid(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double clamp_proba(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

// Bin edges per feature. bin(v) = index of the first edge >= v, so a split
// "bin <= b" is exactly "value <= edges[b]".
struct Binner {
    std::vector<std::vector<double>> edges;  // per feature, sorted

    static Binner build(const DataView& X, int max_bins) {
        Binner binner;
        binner.edges.resize(X.n_cols);
        std::vector<double> col(X.n_rows);
        for (size_t f = 0; f < X.n_cols; ++f) {
            for (size_t r = 0; r < X.n_rows; ++r) col[r] = X.at(r, f);
            std::sort(col.begin(), col.end());
            col.erase(std::unique(col.begin(), col.end()), col.end());
            auto& e = binner.edges[f];
            if (col.size() <= 1) continue;  // constant feature, never splittable
            if (col.size() <= static_cast<size_t>(max_bins)) {
                for (size_t i = 0; i + 1 < col.size(); ++i)
                    e.push_back(0.5 * (col[i] + col[i + 1]));
            } else {
                for (int b = 1; b < max_bins; ++b) {
                    const size_t pos = static_cast<size_t>(
                        static_cast<double>(b) * static_cast<double>(col.size()) / max_bins);
                    if (pos == 0 || pos >= col.size()) continue;
                    e.push_back(0.5 * (col[pos - 1] + col[pos]));
                }
                e.erase(std::unique(e.begin(), e.end()), e.end());
            }
        }
        return binner;
    }

    uint8_t bin(size_t feature, double v) const {
        const auto& e = edges[feature];
        return static_cast<uint8_t>(std::lower_bound(e.begin(), e.end(), v) - e.begin());
    }
};

struct SplitCand {
    double gain = 0.0;
    int feature = -1;
    int bin = -1;

    bool better_than(const SplitCand& o) const {
        if (gain != o.gain) return gain > o.gain;
        if (feature != o.feature) return feature < o.feature;  // deterministic merge order
        return bin < o.bin;
    }
};

}  // namespace detail

// Stagewise logistic-loss boosting with histogram split search.
//
// Rows are re-ordered internally by their binned representation before any
// accumulation, so the fitted model does not depend on the input row order
// (at subsample 1.0) nor on the thread count.
inline GbtModel fit(const DataView& X, const std::vector<int>& y, const TrainConfig& config,
                    uint64_t schema_hash, int threads = 1,
                    std::vector<std::string>* warnings = nullptr) {
    config.validate();
    const size_t n = X.n_rows, m = X.n_cols;
    if (n == 0 || y.size() != n)
        throw RangeError("fit: feature table and labels must be non-empty and aligned");
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < m; ++c)
            if (!std::isfinite(X.at(r, c)))
                throw RangeError(strfmt("fit: non-finite feature value at row %zu column %zu",
                                        r, c));

    GbtModel model;
    model.schema_hash = schema_hash;
    model.n_features = static_cast<int>(m);
    model.config = config;

    double pos = 0.0;
    for (int v : y) pos += v;
    const double rate = pos / static_cast<double>(n);
    const double clamped = std::clamp(rate, 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(clamped / (1.0 - clamped));

    if (rate == 0.0 || rate == 1.0) {
        model.single_class = true;
        if (warnings)
            warnings->push_back("fit: single-class labels, model collapses to the base score");
        return model;
    }

    const auto binner = detail::Binner::build(X, config.histogram_bins);
    std::vector<uint8_t> bins(n * m);
    parallel_for(n, threads, [&](size_t r) {
        for (size_t f = 0; f < m; ++f) bins[r * m + f] = binner.bin(f, X.at(r, f));
    });

    // canonical row order: binned bytes, then label
    std::vector<uint32_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        const int c = std::memcmp(&bins[a * m], &bins[b * m], m);
        if (c != 0) return c < 0;
        return y[a] < y[b];
    });

    std::vector<double> score(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<uint8_t> sampled(n, 1);
    std::vector<uint32_t> scratch(n);

    struct NodeRange {
        size_t begin, end;    // into `order`
        int32_t node_index;
        double sum_g, sum_h;
        long long count;      // sampled rows only
    };

    const int max_edge_bins = config.histogram_bins;
    std::vector<double> hist_g(m * max_edge_bins), hist_h(m * max_edge_bins);
    std::vector<long long> hist_c(m * max_edge_bins);

    for (int round = 0; round < config.n_trees; ++round) {
        for (size_t i = 0; i < n; ++i) {
            const double p = detail::sigmoid(score[i]);
            grad[i] = p - y[i];
            hess[i] = std::max(p * (1.0 - p), 1e-16);
        }
        if (config.subsample_fraction < 1.0) {
            std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + 0x1000003 + round);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            // draw in canonical order so sampling is row-order independent
            for (size_t i = 0; i < n; ++i)
                sampled[order[i]] = uni(rng) < config.subsample_fraction ? 1 : 0;
        }

        Tree tree;
        tree.nodes.emplace_back();
        std::vector<NodeRange> frontier;
        {
            double sg = 0.0, sh = 0.0;
            long long cnt = 0;
            for (size_t i = 0; i < n; ++i) {
                if (!sampled[order[i]]) continue;
                sg += grad[order[i]];
                sh += hess[order[i]];
                ++cnt;
            }
            frontier.push_back({0, n, 0, sg, sh, cnt});
        }

        for (int depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
            std::vector<NodeRange> next;
            for (const NodeRange& node : frontier) {
                TreeNode& tn = tree.nodes[node.node_index];
                tn.leaf_value = -node.sum_g / (node.sum_h + detail::kLeafRegularization);
                if (node.count < 2LL * config.min_samples_leaf) continue;

                // per-feature histograms over the node's sampled rows
                std::fill(hist_g.begin(), hist_g.end(), 0.0);
                std::fill(hist_h.begin(), hist_h.end(), 0.0);
                std::fill(hist_c.begin(), hist_c.end(), 0);
                for (size_t i = node.begin; i < node.end; ++i) {
                    const uint32_t r = order[i];
                    if (!sampled[r]) continue;
                    const uint8_t* br = &bins[static_cast<size_t>(r) * m];
                    const double g = grad[r], h = hess[r];
                    for (size_t f = 0; f < m; ++f) {
                        const size_t slot = f * max_edge_bins + br[f];
                        hist_g[slot] += g;
                        hist_h[slot] += h;
                        hist_c[slot] += 1;
                    }
                }

                // best split; feature-parallel with a deterministic merge
                const int chunks = std::max(1, std::min<int>(threads, static_cast<int>(m)));
                std::vector<detail::SplitCand> chunk_best(chunks);
                const double parent_obj =
                    node.sum_g * node.sum_g / (node.sum_h + detail::kLeafRegularization);
                parallel_for(chunks, threads, [&](size_t chunk) {
                    const size_t f_begin = chunk * m / chunks;
                    const size_t f_end = (chunk + 1) * m / chunks;
                    detail::SplitCand best;
                    for (size_t f = f_begin; f < f_end; ++f) {
                        const size_t nb = binner.edges[f].size();
                        if (nb == 0) continue;
                        double gl = 0.0, hl = 0.0;
                        long long cl = 0;
                        for (size_t b = 0; b < nb; ++b) {
                            const size_t slot = f * max_edge_bins + b;
                            gl += hist_g[slot];
                            hl += hist_h[slot];
                            cl += hist_c[slot];
                            const long long cr = node.count - cl;
                            if (cl < config.min_samples_leaf || cr < config.min_samples_leaf)
                                continue;
                            const double gr = node.sum_g - gl, hr = node.sum_h - hl;
                            const double gain =
                                gl * gl / (hl + detail::kLeafRegularization) +
                                gr * gr / (hr + detail::kLeafRegularization) - parent_obj;
                            detail::SplitCand cand{gain, static_cast<int>(f),
                                                   static_cast<int>(b)};
                            if (cand.gain > 1e-12 && cand.better_than(best)) best = cand;
                        }
                    }
                    chunk_best[chunk] = best;
                });
                detail::SplitCand best;
                for (const auto& cand : chunk_best)
                    if (cand.feature >= 0 && cand.better_than(best)) best = cand;
                if (best.feature < 0) continue;

                // stable partition of the full row range (not just sampled rows)
                size_t lo = node.begin;
                size_t hi = node.end;
                for (size_t i = node.begin; i < node.end; ++i) {
                    const uint32_t r = order[i];
                    if (bins[static_cast<size_t>(r) * m + best.feature] <= best.bin)
                        scratch[lo++] = r;
                }
                for (size_t i = node.end; i-- > node.begin;) {
                    const uint32_t r = order[i];
                    if (bins[static_cast<size_t>(r) * m + best.feature] > best.bin)
                        scratch[--hi] = r;
                }
                std::copy(scratch.begin() + node.begin, scratch.begin() + node.end,
                          order.begin() + node.begin);

                double gl = 0.0, hl = 0.0;
                long long cl = 0;
                for (size_t b = 0; b <= static_cast<size_t>(best.bin); ++b) {
                    const size_t slot = static_cast<size_t>(best.feature) * max_edge_bins + b;
                    gl += hist_g[slot];
                    hl += hist_h[slot];
                    cl += hist_c[slot];
                }

                const int32_t left_idx = static_cast<int32_t>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                TreeNode& parent = tree.nodes[node.node_index];
                parent.feature = best.feature;
                parent.threshold = binner.edges[best.feature][best.bin];
                parent.left = left_idx;
                parent.right = left_idx + 1;
                next.push_back({node.begin, lo, left_idx, gl, hl, cl});
                next.push_back({lo, node.end, left_idx + 1, node.sum_g - gl, node.sum_h - hl,
                                node.count - cl});
            }
            frontier = std::move(next);
        }

        // update every row's score with its leaf; predict() agrees with the
        // bin partition because thresholds are bin edges
        for (size_t i = 0; i < n; ++i)
            score[i] += config.learning_rate * tree.predict(X.row(i));

        double loss = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double p = detail::clamp_proba(detail::sigmoid(score[i]));
            loss += y[i] ? -std::log(p) : -std::log(1.0 - p);
        }
        model.round_losses.push_back(loss / static_cast<double>(n));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

// Probabilities strictly inside (0,1).
inline std::vector<double> predict_proba(const GbtModel& model, const DataView& X,
                                         uint64_t schema_hash, int threads = 1) {
    if (schema_hash != model.schema_hash)
        throw SchemaError(strfmt("predict: schema hash mismatch, model %s vs data %s",
                                 hex64(model.schema_hash).c_str(), hex64(schema_hash).c_str()));
    if (X.n_cols != static_cast<size_t>(model.n_features))
        throw SchemaError(strfmt("predict: %zu features, model expects %d", X.n_cols,
                                 model.n_features));
    std::vector<double> out(X.n_rows);
    parallel_for(X.n_rows, threads, [&](size_t r) {
        double z = model.base_score;
        const double* row = X.row(r);
        for (const Tree& t : model.trees) z += model.config.learning_rate * t.predict(row);
        out[r] = detail::clamp_proba(detail::sigmoid(z));
    });
    return out;
}

inline double predict_proba_one(const GbtModel& model, const double* row) {
    double z = model.base_score;
    for (const Tree& t : model.trees) z += model.config.learning_rate * t.predict(row);
    return detail::clamp_proba(detail::sigmoid(z));
}

// Canonical text format: saving a loaded model reproduces the bytes exactly.
inline void save_model(const GbtModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file " + path);
    out << "recov-gbt v" << GbtModel::kFormatVersion << "\n";
    out << "schema_hash " << hex64(model.schema_hash) << "\n";
    out << "n_features " << model.n_features << "\n";
    out << "base_score " << fmt_double(model.base_score) << "\n";
    out << "single_class " << (model.single_class ? 1 : 0) << "\n";
    out << "config " << model.config.canonical() << "\n";
    out << "trees " << model.trees.size() << "\n";
    for (size_t t = 0; t < model.trees.size(); ++t) {
        const Tree& tree = model.trees[t];
        out << "tree " << t << " " << tree.nodes.size() << "\n";
        for (const TreeNode& n : tree.nodes)
            out << n.feature << " " << fmt_double(n.threshold) << " " << n.left << " "
                << n.right << " " << fmt_double(n.leaf_value) << "\n";
    }
    out << "end\n";
    if (!out) throw IoError("write failure on model file " + path);
}

inline GbtModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path);
    int lineno = 0;
    auto next_line = [&](const char* what) {
        std::string line;
        if (!std::getline(in, line))
            throw ParseError(strfmt("%s: truncated model file, expected %s at line %d",
                                    path.c_str(), what, lineno + 1));
        ++lineno;
        return line;
    };
    auto fail = [&](const std::string& why) -> ParseError {
        return ParseError(strfmt("%s: %s at line %d", path.c_str(), why.c_str(), lineno));
    };

    GbtModel model;
    {
        const std::string header = next_line("header");
        int version = 0;
        if (std::sscanf(header.c_str(), "recov-gbt v%d", &version) != 1)
            throw fail("not a recov-gbt model file");
        if (version != GbtModel::kFormatVersion)
            throw fail(strfmt("unsupported format version %d", version));
    }
    {
        char hex[32] = {0};
        if (std::sscanf(next_line("schema_hash").c_str(), "schema_hash %31s", hex) != 1)
            throw fail("bad schema_hash line");
        model.schema_hash = std::strtoull(hex, nullptr, 16);
    }
    if (std::sscanf(next_line("n_features").c_str(), "n_features %d", &model.n_features) != 1)
        throw fail("bad n_features line");
    if (std::sscanf(next_line("base_score").c_str(), "base_score %lf", &model.base_score) != 1)
        throw fail("bad base_score line");
    {
        int sc = 0;
        if (std::sscanf(next_line("single_class").c_str(), "single_class %d", &sc) != 1)
            throw fail("bad single_class line");
        model.single_class = sc != 0;
    }
    {
        unsigned long long seed = 0;
        TrainConfig& c = model.config;
        if (std::sscanf(next_line("config").c_str(),
                        "config n_trees=%d max_depth=%d learning_rate=%lf "
                        "min_samples_leaf=%d subsample_fraction=%lf histogram_bins=%d "
                        "seed=%llu",
                        &c.n_trees, &c.max_depth, &c.learning_rate, &c.min_samples_leaf,
                        &c.subsample_fraction, &c.histogram_bins, &seed) != 7)
            throw fail("bad config line");
        c.seed = seed;
    }
    size_t n_trees = 0;
    if (std::sscanf(next_line("trees").c_str(), "trees %zu", &n_trees) != 1)
        throw fail("bad trees line");
    model.trees.resize(n_trees);
    for (size_t t = 0; t < n_trees; ++t) {
        size_t index = 0, n_nodes = 0;
        if (std::sscanf(next_line("tree header").c_str(), "tree %zu %zu", &index, &n_nodes) != 2 ||
            index != t)
            throw fail(strfmt("bad tree header for tree %zu", t));
        model.trees[t].nodes.resize(n_nodes);
        for (size_t k = 0; k < n_nodes; ++k) {
            TreeNode& node = model.trees[t].nodes[k];
            if (std::sscanf(next_line("node").c_str(), "%d %lf %d %d %lf", &node.feature,
                            &node.threshold, &node.left, &node.right, &node.leaf_value) != 5)
                throw fail(strfmt("bad node record %zu in tree %zu", k, t));
            const auto limit = static_cast<int32_t>(n_nodes);
            if (node.feature >= model.n_features || node.left >= limit || node.right >= limit)
                throw fail(strfmt("node %zu in tree %zu references out of range", k, t));
        }
    }
    if (next_line("end") != "end") throw fail("missing end marker");
    return model;
}

struct GameSplit {
    std::vector<int> train_ids;
    std::vector<int> valid_ids;
    bool empty_validation = false;
};

// Chronological split: the earliest ceil(fraction * N) matches train, the
// rest validate. Kickoff dates are ISO strings, so string order is date order.
inline GameSplit split_by_games(std::vector<MatchMeta> matches, double fraction = 0.8) {
    if (matches.empty()) throw RangeError("split_by_games: no matches");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw RangeError("split_by_games: fraction must be in (0, 1]");
    for (const auto& m : matches)
        if (m.kickoff_date.empty())
            throw SchemaError(strfmt("split_by_games: match %d has no kickoff_date", m.match_id));
    std::sort(matches.begin(), matches.end(), [](const MatchMeta& a, const MatchMeta& b) {
        if (a.kickoff_date != b.kickoff_date) return a.kickoff_date < b.kickoff_date;
        return a.match_id < b.match_id;
    });
    const size_t n_train = static_cast<size_t>(
        std::ceil(fraction * static_cast<double>(matches.size())));
    GameSplit split;
    for (size_t i = 0; i < matches.size(); ++i)
        (i < n_train ? split.train_ids : split.valid_ids).push_back(matches[i].match_id);
    split.empty_validation = split.valid_ids.empty();
    return split;
}

}  // namespace recov::model
