#include "idlewave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "idlewave/error.hpp"

namespace idlewave {

namespace {

// First Wait >= threshold on this rank; the run duration merges
// adjacent Wait intervals (the recorder splits them per group).
std::optional<FrontPoint> first_qualifying_wait(const std::vector<Interval>& row, int rank,
                                                double threshold_s) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        const Interval& iv = row[i];
        if (iv.phase != Phase::Wait) continue;
        double dur = iv.end_s - iv.start_s;
        if (dur < threshold_s) continue;
        double run_end = iv.end_s;
        for (std::size_t k = i + 1; k < row.size(); ++k) {
            const Interval& nx = row[k];
            if (nx.phase != Phase::Wait || nx.start_s > run_end + 1e-15) break;
            run_end = std::max(run_end, nx.end_s);
        }
        return FrontPoint{rank, iv.start_s, run_end - iv.start_s};
    }
    return std::nullopt;
}

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y,
              SlopeEstimator estimator) {
    std::size_t n = x.size();
    if (estimator == SlopeEstimator::TheilSen) {
        std::vector<double> slopes;
        slopes.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = i + 1; k < n; ++k)
                if (x[k] != x[i]) slopes.push_back((y[k] - y[i]) / (x[k] - x[i]));
        if (slopes.empty()) throw InsufficientFront("all front points share one abscissa");
        std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
        double m = slopes[slopes.size() / 2];
        if (slopes.size() % 2 == 0) {
            auto lo = std::max_element(slopes.begin(), slopes.begin() + slopes.size() / 2);
            m = 0.5 * (m + *lo);
        }
        std::vector<double> residuals(n);
        for (std::size_t i = 0; i < n; ++i) residuals[i] = y[i] - m * x[i];
        std::nth_element(residuals.begin(), residuals.begin() + n / 2, residuals.end());
        double b = residuals[n / 2];
        if (n % 2 == 0) {
            auto lo = std::max_element(residuals.begin(), residuals.begin() + n / 2);
            b = 0.5 * (b + *lo);
        }
        return {m, b};
    }
    double sx = std::accumulate(x.begin(), x.end(), 0.0);
    double sy = std::accumulate(y.begin(), y.end(), 0.0);
    double mx = sx / double(n), my = sy / double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw InsufficientFront("all front points share one abscissa");
    double m = sxy / sxx;
    return {m, my - m * mx};
}

double r_squared_of(const std::vector<double>& x, const std::vector<double>& y, Line l) {
    double my = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (l.slope * x[i] + l.intercept);
        ss_res += e * e;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    if (ss_tot == 0.0) return 1.0;
    return 1.0 - ss_res / ss_tot;
}

std::vector<FrontPoint> trimmed(const std::vector<FrontPoint>& front, int discard_prefix) {
    if (discard_prefix < 0) throw InvalidTiming("discard prefix must be non-negative");
    if (std::size_t(discard_prefix) >= front.size())
        throw InsufficientFront("discard prefix swallows the whole front");
    return {front.begin() + discard_prefix, front.end()};
}

}  // namespace

std::vector<FrontPoint> detect_front(const Timeline& timeline, int injection_rank,
                                     double threshold_s, FrontDirection direction) {
    int n = int(timeline.per_rank.size());
    if (injection_rank < 0 || injection_rank >= n)
        throw InvalidRank("injection rank outside the timeline");
    if (threshold_s < 0.0) throw InvalidTiming("front threshold must be non-negative");
    int step = direction == FrontDirection::Up ? 1 : -1;
    std::vector<FrontPoint> front;
    for (int r = injection_rank + step; r >= 0 && r < n; r += step) {
        auto p = first_qualifying_wait(timeline.per_rank[r], r, threshold_s);
        if (!p) break;
        front.push_back(*p);
    }
    if (front.empty()) throw NoWaveDetected("no rank next to the injector ever waits long enough");
    return front;
}

double default_front_threshold(const SimConfig& config) {
    // Baseline = the same system without the one-off injections. Noise stays:
    // it is part of the run's natural waiting and must not trip the detector.
    SimConfig baseline = config;
    baseline.delays.clear();
    Timeline tl = simulate(baseline);
    std::vector<double> waits;
    for (const auto& row : tl.per_rank)
        for (const Interval& iv : row)
            if (iv.phase == Phase::Wait) waits.push_back(iv.end_s - iv.start_s);
    double p95 = 0.0;
    if (!waits.empty()) {
        std::size_t idx = std::size_t(std::ceil(0.95 * double(waits.size()))) - 1;
        idx = std::min(idx, waits.size() - 1);
        std::nth_element(waits.begin(), waits.begin() + idx, waits.end());
        p95 = waits[idx];
    }
    return std::max(3.0 * p95, 1e-12);
}

SpeedFit measure_speed(const std::vector<FrontPoint>& front, int discard_prefix,
                       SlopeEstimator estimator) {
    auto pts = trimmed(front, discard_prefix);
    if (pts.size() < 3) throw InsufficientFront("need at least 3 front points after the discard");
    std::vector<double> t(pts.size()), r(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        t[i] = pts[i].arrival_s;
        r[i] = double(pts[i].rank);
    }
    Line l = fit_line(t, r, estimator);
    SpeedFit fit;
    fit.speed_ranks_per_s = std::fabs(l.slope);
    fit.r_squared = r_squared_of(t, r, l);
    fit.points_used = int(pts.size());
    return fit;
}

std::vector<FrontPoint> burst_leaders(const std::vector<FrontPoint>& front) {
    if (front.empty()) throw NoWaveDetected("empty front");
    double max_gap = 0.0;
    for (std::size_t i = 1; i < front.size(); ++i)
        max_gap = std::max(max_gap, front[i].arrival_s - front[i - 1].arrival_s);
    std::vector<FrontPoint> leaders{front.front()};
    if (max_gap <= 0.0) return leaders;
    double split = 0.5 * max_gap;
    for (std::size_t i = 1; i < front.size(); ++i)
        if (front[i].arrival_s - front[i - 1].arrival_s > split) leaders.push_back(front[i]);
    return leaders;
}

SpeedFit measure_speed_bursts(const std::vector<FrontPoint>& front, int discard_prefix) {
    // Leaders come from the untrimmed front: each burst's first arrival sits at
    // the same fence phase, so successive leaders are exactly one period apart.
    // Trimming first can promote a mid-burst point to "leader" and skew the fit.
    auto leaders = burst_leaders(front);
    if (leaders.size() == front.size())
        return measure_speed(front, discard_prefix, SlopeEstimator::LeastSquares);
    if (leaders.size() >= 3) return measure_speed(leaders, 0, SlopeEstimator::LeastSquares);
    if (leaders.size() == 2) {
        double dt = leaders[1].arrival_s - leaders[0].arrival_s;
        if (dt <= 0.0) throw InsufficientFront("burst leaders arrived together");
        SpeedFit fit;
        fit.speed_ranks_per_s = std::fabs(double(leaders[1].rank - leaders[0].rank)) / dt;
        fit.r_squared = 1.0;
        fit.points_used = 2;
        return fit;
    }
    // One burst only: no envelope structure to exploit, fit what is there.
    return measure_speed(front, discard_prefix, SlopeEstimator::LeastSquares);
}

std::vector<FrontPoint> front_envelope(const std::vector<FrontPoint>& front) {
    std::vector<FrontPoint> env;
    double best = std::numeric_limits<double>::infinity();
    for (auto it = front.rbegin(); it != front.rend(); ++it)
        if (it->arrival_s < best) {
            best = it->arrival_s;
            env.push_back(*it);
        }
    std::reverse(env.begin(), env.end());
    return env;
}

std::vector<double> residuals_against(const std::vector<FrontPoint>& front,
                                      const std::vector<FrontPoint>& reference) {
    if (reference.size() < 2) throw InsufficientFront("need at least 2 reference points");
    std::vector<double> r(reference.size()), t(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        r[i] = double(reference[i].rank);
        t[i] = reference[i].arrival_s;
    }
    Line l = fit_line(r, t, SlopeEstimator::LeastSquares);
    std::vector<double> res(front.size());
    for (std::size_t i = 0; i < front.size(); ++i)
        res[i] = front[i].arrival_s - (l.slope * double(front[i].rank) + l.intercept);
    return res;
}

int default_discard_prefix(int longest_distance) {
    if (longest_distance < 1) throw InvalidTopology("longest distance must be positive");
    return (longest_distance + 1) / 2 + 1;
}

DecayFit measure_decay(const std::vector<FrontPoint>& front, double threshold_s,
                       SlopeEstimator estimator) {
    if (front.empty()) throw NoWaveDetected("empty front");
    DecayFit fit;
    fit.durations_s.reserve(front.size());
    for (const FrontPoint& p : front) fit.durations_s.push_back(p.duration_s);
    std::size_t last = 0;
    for (std::size_t i = 0; i < front.size(); ++i)
        if (front[i].duration_s >= threshold_s) last = i;
    fit.survival_time_s = front[last].arrival_s;
    fit.last_rank = front[last].rank;
    if (front.size() >= 3) {
        std::vector<double> r(front.size()), d(front.size());
        for (std::size_t i = 0; i < front.size(); ++i) {
            r[i] = double(front[i].rank);
            d[i] = front[i].duration_s;
        }
        Line l = fit_line(r, d, estimator);
        // Ranks grow away from the injector in both directions, so a decaying
        // wave always has durations falling with |rank - injector|; the sign
        // of the rank axis flips for a Down front.
        double toward = front.back().rank > front.front().rank ? l.slope : -l.slope;
        fit.decay_rate_s_per_rank = std::max(0.0, -toward);
    }
    return fit;
}

std::vector<double> front_residuals(const std::vector<FrontPoint>& front, int discard_prefix,
                                    SlopeEstimator estimator) {
    auto pts = trimmed(front, discard_prefix);
    if (pts.size() < 3) throw InsufficientFront("need at least 3 front points after the discard");
    std::vector<double> r(pts.size()), t(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        r[i] = double(pts[i].rank);
        t[i] = pts[i].arrival_s;
    }
    // Time as a function of rank: residuals carry seconds, the unit the
    // zig-zag amplitude is quoted in.
    Line l = fit_line(r, t, estimator);
    std::vector<double> res(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) res[i] = t[i] - (l.slope * r[i] + l.intercept);
    return res;
}

int residual_extent(const std::vector<FrontPoint>& front, int injection_rank,
                    int discard_prefix, double amplitude_threshold_s) {
    auto res = front_residuals(front, discard_prefix);
    auto pts = trimmed(front, discard_prefix);
    int extent = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (std::fabs(res[i]) >= amplitude_threshold_s)
            extent = std::max(extent, std::abs(pts[i].rank - injection_rank));
    return extent;
}

std::vector<double> total_wait_per_rank(const Timeline& timeline) {
    return wait_per_rank_after(timeline, 0.0);
}

std::vector<double> wait_per_rank_after(const Timeline& timeline, double start_s) {
    std::vector<double> out(timeline.per_rank.size(), 0.0);
    for (std::size_t r = 0; r < timeline.per_rank.size(); ++r)
        for (const Interval& iv : timeline.per_rank[r])
            if (iv.phase == Phase::Wait && iv.end_s > start_s)
                out[r] += iv.end_s - std::max(iv.start_s, start_s);
    return out;
}

}  // namespace idlewave
