#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "recov/common.hpp"
#include "recov/events.hpp"
#include "recov/geometry.hpp"

namespace recov::pc {

// Arrival-time / control-rate model parameters. Defaults follow the public
// single-frame adaptation: stationary players, flat top speed.
struct PcParams {
    double reaction_time_s = 0.7;
    double max_speed_mps = 5.0;
    double ball_speed_mps = 15.0;
    double sigma_s = 0.45;       // arrival-time sigmoid scale
    double lambda_per_s = 4.3;   // control conversion rate
    double dt_s = 0.04;          // integration step
    double max_t_s = 10.0;       // integration horizon
    double convergence_eps = 0.01;
    double rel_sigma_m = 14.0;   // relevance Gaussian scale

    void validate() const {
        auto pos = [](double v, const char* name) {
            if (!(v > 0.0))
                throw RangeError(strfmt("PcParams.%s must be strictly positive", name));
        };
        pos(reaction_time_s, "reaction_time_s");
        pos(max_speed_mps, "max_speed_mps");
        pos(ball_speed_mps, "ball_speed_mps");
        pos(sigma_s, "sigma_s");
        pos(lambda_per_s, "lambda_per_s");
        pos(dt_s, "dt_s");
        pos(max_t_s, "max_t_s");
        pos(convergence_eps, "convergence_eps");
        pos(rel_sigma_m, "rel_sigma_m");
        if (!(dt_s < sigma_s))
            throw RangeError("PcParams.dt_s must be smaller than sigma_s");
    }

    uint64_t hash() const {
        std::string s;
        for (double v : {reaction_time_s, max_speed_mps, ball_speed_mps, sigma_s,
                         lambda_per_s, dt_s, max_t_s, convergence_eps, rel_sigma_m})
            s += fmt_double(v) + ";";
        return fnv1a(s);
    }
};

// 32 rows spanning y in [0,68], 50 columns spanning x in [0,105], row-major.
struct GridSpec {
    int rows = 32;
    int cols = 50;

    int cells() const { return rows * cols; }
    double cell_w() const { return kPitchLength / cols; }
    double cell_h() const { return kPitchWidth / rows; }
    Vec2 center(int row, int col) const {
        return {(col + 0.5) * cell_w(), (row + 0.5) * cell_h()};
    }
    int index(int row, int col) const { return row * cols + col; }
};

struct PitchControlSurface {
    GridSpec grid;
    Vec2 ball;  // internal units
    std::vector<double> att_control;           // cells(), in [0,1]
    std::vector<std::vector<double>> per_player;  // player -> cells()
    std::vector<uint8_t> visible_mask;         // cell centre inside visible polygon
    std::vector<uint8_t> is_attacker;          // per frame player
    int non_converged_cells = 0;               // hit the horizon, renormalized
    int degenerate_cells = 0;                  // no mass within the horizon at all
};

// Flat-speed arrival time: reaction pause plus straight-line run.
inline double time_to_reach(Vec2 player, Vec2 target, const PcParams& p) {
    return p.reaction_time_s + dist(player, target) / p.max_speed_mps;
}

inline double ball_travel_time(Vec2 ball, Vec2 target, const PcParams& p) {
    return dist(ball, target) / p.ball_speed_mps;
}

namespace detail {

inline constexpr double kSigmoidSlope = 1.8137993642342178;  // pi / sqrt(3)

// Intercept probability of a player at elapsed time t given arrival time ta.
inline double arrival_sigmoid(double t, double ta, double sigma_s) {
    const double z = kSigmoidSlope * (t - ta) / sigma_s;
    if (z > 36.0) return 1.0;
    if (z < -36.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace detail

// One cell of the potential-control integration. Starting when the ball can
// arrive, every player converts free control mass at rate lambda weighted by
// its arrival sigmoid:
//     dC_j = (1 - sum C) * f_j(t) * lambda * dt
// A single Euler step with many simultaneous arrivals can overshoot the unit
// mass, so a step whose aggregate gain lambda*sum(f)*dt exceeds kMaxStepGain
// is subdivided; the update rule inside each sub-step is unchanged and f is
// held at its step value, which is what the plain rule does anyway.
//
// The sigmoid is advanced incrementally: with u = exp(-slope*(t-ta)/sigma),
// f = 1/(1+u) and one step multiplies u by a constant. Players whose sigmoid
// is below ~1e-12 are skipped; that floor sits far under the renormalization
// threshold so horizon-limited cells keep oracle-compatible ratios.
struct CellResult {
    double att_value = 0.5;
    bool converged = true;
    bool degenerate = false;  // no integrable mass before the horizon
};

inline constexpr double kMaxStepGain = 0.25;

template <typename PlayerRange>
inline CellResult integrate_cell(const PlayerRange& players,  // (Vec2 pos, bool attacker)
                                 Vec2 ball, Vec2 cell_center, const PcParams& p,
                                 double* contributions /* size = players.size() */) {
    const size_t n = players.size();
    if (n == 0) throw RangeError("integrate_cell: empty frame");

    thread_local std::vector<double> ta;   // arrival times
    thread_local std::vector<double> u;    // exp(-z), z the sigmoid argument
    thread_local std::vector<double> f;
    ta.resize(n);
    u.resize(n);
    f.resize(n);

    const double rate = detail::kSigmoidSlope / p.sigma_s;  // dz/dt
    double ta_min = 1e300;
    for (size_t j = 0; j < n; ++j) {
        ta[j] = time_to_reach(players[j].first, cell_center, p);
        ta_min = std::fmin(ta_min, ta[j]);
        contributions[j] = 0.0;
    }

    // Fast-forward over the dead time before any sigmoid exceeds ~1e-12,
    // staying on the same step grid t0 + k*dt the plain loop would use.
    const double t0 = ball_travel_time(ball, cell_center, p);
    double t = t0;
    const double ramp_start = ta_min - 28.0 / rate;
    if (ramp_start > t0) {
        const double k = std::ceil((ramp_start - t0) / p.dt_s);
        t = t0 + k * p.dt_s;
    }

    for (size_t j = 0; j < n; ++j) u[j] = std::exp(-rate * (t - ta[j]));
    const double step_mul = std::exp(-rate * p.dt_s);

    double total = 0.0;
    const double stop = 1.0 - p.convergence_eps;
    CellResult res;

    while (total < stop && t <= p.max_t_s) {
        double fsum = 0.0;
        for (size_t j = 0; j < n; ++j) {
            const double uj = u[j];
            const double fj = uj > 1.45e12 ? 0.0 : (uj < 1e-14 ? 1.0 : 1.0 / (1.0 + uj));
            f[j] = fj;
            fsum += fj;
        }
        if (fsum > 0.0) {
            const double gain = p.lambda_per_s * fsum * p.dt_s;
            const int substeps =
                gain > kMaxStepGain ? static_cast<int>(gain / kMaxStepGain) + 1 : 1;
            const double sub_dt = p.dt_s / substeps;
            for (int s = 0; s < substeps && total < stop; ++s) {
                const double scale = (1.0 - total) * p.lambda_per_s * sub_dt;
                for (size_t j = 0; j < n; ++j) {
                    if (f[j] == 0.0) continue;
                    const double dc = scale * f[j];
                    contributions[j] += dc;
                    total += dc;
                }
            }
        }
        for (size_t j = 0; j < n; ++j) u[j] *= step_mul;
        t += p.dt_s;
    }

    if (total < stop) {
        res.converged = false;
        if (total > 1e-12) {
            for (size_t j = 0; j < n; ++j) contributions[j] /= total;
        } else {
            // Nothing reachable before the horizon. The limit of the
            // renormalized integral is the softmax of the sigmoid arguments
            // at the horizon, which stays well defined where raw mass
            // underflows.
            res.degenerate = true;
            double zmax = -1e300;
            for (size_t j = 0; j < n; ++j)
                zmax = std::fmax(zmax, rate * (p.max_t_s - ta[j]));
            double wsum = 0.0;
            for (size_t j = 0; j < n; ++j) {
                contributions[j] = std::exp(rate * (p.max_t_s - ta[j]) - zmax);
                wsum += contributions[j];
            }
            for (size_t j = 0; j < n; ++j) contributions[j] /= wsum;
        }
    }

    double att = 0.0;
    for (size_t j = 0; j < n; ++j)
        if (players[j].second) att += contributions[j];
    res.att_value = std::clamp(att, 0.0, 1.0);
    return res;
}

// Full-surface computation over the grid from an oriented internal-units
// frame; the ball anchors at the action start. Cells are independent, so the
// result cannot depend on evaluation order.
inline PitchControlSurface compute_surface(const FreezeFrame& frame, Vec2 ball,
                                           const PcParams& params, GridSpec grid = {}) {
    params.validate();
    size_t n_att = 0, n_def = 0;
    for (const auto& pl : frame.players) (pl.teammate ? n_att : n_def) += 1;
    if (n_att == 0 || n_def == 0)
        throw RangeError("compute_surface: frame needs at least one player per side");

    const size_t n = frame.players.size();
    std::vector<std::pair<Vec2, bool>> players(n);
    PitchControlSurface s;
    s.grid = grid;
    s.ball = ball;
    s.is_attacker.resize(n);
    for (size_t j = 0; j < n; ++j) {
        players[j] = {clamp_to_pitch(frame.players[j].pos), frame.players[j].teammate};
        s.is_attacker[j] = frame.players[j].teammate ? 1 : 0;
    }

    const int cells = grid.cells();
    s.att_control.assign(cells, 0.0);
    s.per_player.assign(n, std::vector<double>(cells, 0.0));
    s.visible_mask.assign(cells, 0);

    std::vector<double> contrib(n);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const int idx = grid.index(r, c);
            const Vec2 center = grid.center(r, c);
            const CellResult res = integrate_cell(players, ball, center, params, contrib.data());
            s.att_control[idx] = res.att_value;
            for (size_t j = 0; j < n; ++j) s.per_player[j][idx] = contrib[j];
            if (!res.converged) ++s.non_converged_cells;
            if (res.degenerate) ++s.degenerate_cells;
            s.visible_mask[idx] = point_in_polygon(frame.visible_area, center) ? 1 : 0;
        }
    }
    return s;
}

// Mean attacking control over visible cells within radius_m of a point;
// neutral 0.5 when no visible cell qualifies.
inline double avg_control_radius(const PitchControlSurface& s, Vec2 center,
                                 double radius_m = 4.0) {
    double sum = 0.0;
    int n = 0;
    for (int r = 0; r < s.grid.rows; ++r) {
        for (int c = 0; c < s.grid.cols; ++c) {
            const int idx = s.grid.index(r, c);
            if (!s.visible_mask[idx]) continue;
            if (dist(s.grid.center(r, c), center) <= radius_m) {
                sum += s.att_control[idx];
                ++n;
            }
        }
    }
    return n == 0 ? 0.5 : sum / n;
}

// Gaussian relevance around the ball, normalized over visible cells. When a
// mask is given, invisible cells get weight zero.
inline std::vector<double> relevance_weights(Vec2 ball, const GridSpec& grid,
                                             double rel_sigma_m,
                                             const std::vector<uint8_t>* visible_mask = nullptr) {
    std::vector<double> w(grid.cells(), 0.0);
    double sum = 0.0;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const int idx = grid.index(r, c);
            if (visible_mask && !(*visible_mask)[idx]) continue;
            const double d = dist(grid.center(r, c), ball);
            w[idx] = std::exp(-d * d / (2.0 * rel_sigma_m * rel_sigma_m));
            sum += w[idx];
        }
    }
    if (sum > 0.0)
        for (auto& v : w) v /= sum;
    return w;
}

struct RankedPlayer {
    int player_index = 0;  // index into the frame's player list
    double rpc = 0.0;
    double dist_to_ball = 0.0;
};

struct RpcRanking {
    std::vector<RankedPlayer> attackers;  // descending RPC
    std::vector<RankedPlayer> defenders;
};

// Rank each side by relevance-weighted control. Ties break toward the player
// closer to the ball, then input order.
inline RpcRanking rank_players_rpc(const PitchControlSurface& s,
                                   const std::vector<double>& weights,
                                   const FreezeFrame& frame) {
    if (weights.size() != static_cast<size_t>(s.grid.cells()))
        throw RangeError("rank_players_rpc: weights grid mismatch");
    RpcRanking out;
    for (size_t j = 0; j < s.per_player.size(); ++j) {
        RankedPlayer rp;
        rp.player_index = static_cast<int>(j);
        rp.rpc = std::inner_product(s.per_player[j].begin(), s.per_player[j].end(),
                                    weights.begin(), 0.0);
        rp.dist_to_ball = dist(frame.players[j].pos, s.ball);
        (s.is_attacker[j] ? out.attackers : out.defenders).push_back(rp);
    }
    auto by_rpc = [](const RankedPlayer& a, const RankedPlayer& b) {
        if (a.rpc != b.rpc) return a.rpc > b.rpc;
        if (a.dist_to_ball != b.dist_to_ball) return a.dist_to_ball < b.dist_to_ball;
        return a.player_index < b.player_index;
    };
    std::stable_sort(out.attackers.begin(), out.attackers.end(), by_rpc);
    std::stable_sort(out.defenders.begin(), out.defenders.end(), by_rpc);
    return out;
}

}  // namespace recov::pc
