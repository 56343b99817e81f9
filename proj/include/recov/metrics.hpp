#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "recov/common.hpp"

namespace recov::metrics {

inline void check_inputs(const std::vector<double>& preds, const std::vector<int>& labels) {
    if (preds.empty()) throw RangeError("metrics: empty input");
    if (preds.size() != labels.size())
        throw RangeError("metrics: predictions and labels differ in length");
}

inline double brier(const std::vector<double>& preds, const std::vector<int>& labels) {
    check_inputs(preds, labels);
    double sum = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - labels[i];
        sum += d * d;
    }
    return sum / static_cast<double>(preds.size());
}

// Brier score against the climatology baseline that always predicts the
// training positive rate; 1.0 means no skill, 0.0 perfect.
inline double normalized_brier(const std::vector<double>& preds, const std::vector<int>& labels,
                               double baseline_rate) {
    if (!(baseline_rate > 0.0 && baseline_rate < 1.0))
        throw RangeError("normalized_brier: degenerate baseline rate");
    check_inputs(preds, labels);
    const std::vector<double> baseline(preds.size(), baseline_rate);
    return brier(preds, labels) / brier(baseline, labels);
}

inline double logloss(const std::vector<double>& preds, const std::vector<int>& labels) {
    check_inputs(preds, labels);
    double sum = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        const double p = std::clamp(preds[i], 1e-12, 1.0 - 1e-12);
        sum += labels[i] ? -std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(preds.size());
}

inline double normalized_logloss(const std::vector<double>& preds, const std::vector<int>& labels,
                                 double baseline_rate) {
    if (!(baseline_rate > 0.0 && baseline_rate < 1.0))
        throw RangeError("normalized_logloss: degenerate baseline rate");
    check_inputs(preds, labels);
    const std::vector<double> baseline(preds.size(), baseline_rate);
    return logloss(preds, labels) / logloss(baseline, labels);
}

// Mann-Whitney formulation with midranks for ties.
inline double auroc(const std::vector<double>& preds, const std::vector<int>& labels) {
    check_inputs(preds, labels);
    const size_t n = preds.size();
    long long n_pos = 0;
    for (int y : labels) n_pos += y;
    const long long n_neg = static_cast<long long>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw RangeError("auroc: both classes must be present");

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return preds[a] < preds[b]; });

    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && preds[idx[j]] == preds[idx[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (size_t k = i; k < j; ++k)
            if (labels[idx[k]]) rank_sum_pos += midrank;
        i = j;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct CalibrationSummary {
    double mean_prediction = 0.0;
    double positive_rate = 0.0;
    double gap = 0.0;  // mean_prediction - positive_rate
};

inline CalibrationSummary calibration_summary(const std::vector<double>& preds,
                                              const std::vector<int>& labels) {
    check_inputs(preds, labels);
    CalibrationSummary s;
    for (double p : preds) s.mean_prediction += p;
    for (int y : labels) s.positive_rate += y;
    s.mean_prediction /= static_cast<double>(preds.size());
    s.positive_rate /= static_cast<double>(labels.size());
    s.gap = s.mean_prediction - s.positive_rate;
    return s;
}

struct EvalReport {
    long long n = 0;
    double positive_rate = 0.0;
    double brier = 0.0;
    double nbs = 0.0;
    double logloss = 0.0;
    double nll = 0.0;
    double auroc = 0.0;
    double mean_prediction = 0.0;
};

// Full report against a training-split baseline rate. AUROC needs both
// classes; a one-class validation set reports NaN there rather than failing
// the run.
inline EvalReport evaluate(const std::vector<double>& preds, const std::vector<int>& labels,
                           double baseline_rate) {
    EvalReport r;
    r.n = static_cast<long long>(preds.size());
    if (preds.empty()) {
        r.positive_rate = r.brier = r.nbs = r.logloss = r.nll = r.auroc = r.mean_prediction =
            std::nan("");
        return r;
    }
    const CalibrationSummary c = calibration_summary(preds, labels);
    r.positive_rate = c.positive_rate;
    r.mean_prediction = c.mean_prediction;
    r.brier = brier(preds, labels);
    r.logloss = logloss(preds, labels);
    if (baseline_rate > 0.0 && baseline_rate < 1.0) {
        r.nbs = normalized_brier(preds, labels, baseline_rate);
        r.nll = normalized_logloss(preds, labels, baseline_rate);
    } else {
        r.nbs = r.nll = std::nan("");
    }
    try {
        r.auroc = auroc(preds, labels);
    } catch (const RangeError&) {
        r.auroc = std::nan("");
    }
    return r;
}

}  // namespace recov::metrics
