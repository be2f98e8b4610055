#pragma once

#include <optional>
#include <vector>

#include "idlewave/simulator.hpp"

namespace idlewave {

enum class FrontDirection { Up, Down };

enum class SlopeEstimator { LeastSquares, TheilSen };

struct FrontPoint {
    int rank = 0;
    double arrival_s = 0.0;    // start of the first Wait >= threshold
    double duration_s = 0.0;   // contiguous Wait run beginning at arrival
};

// Walks outward from the injection rank in the given direction and records,
// per rank, the first Wait interval of at least `threshold_s`. Stops at the
// first rank that never exceeds the threshold (the wave died there). Throws
// NoWaveDetected when not even the injector's neighbor qualifies.
std::vector<FrontPoint> detect_front(const Timeline& timeline, int injection_rank,
                                     double threshold_s, FrontDirection direction);

// 3x the 95th-percentile Wait duration of a silent run of the same config
// (delays and noise stripped), floored to 1e-12 s.
double default_front_threshold(const SimConfig& config);

struct SpeedFit {
    double speed_ranks_per_s = 0.0;  // |slope| of rank vs arrival time
    double r_squared = 0.0;
    int points_used = 0;
};

// Fits rank against arrival time after discarding the first `discard_prefix`
// front points (the injection transient). Needs >= 3 points afterwards, else
// throws InsufficientFront.
SpeedFit measure_speed(const std::vector<FrontPoint>& front, int discard_prefix,
                       SlopeEstimator estimator = SlopeEstimator::LeastSquares);

// Standard transient discard: ceil(j/2) + 1 ranks.
int default_discard_prefix(int longest_distance);

// Fronts on coarse topologies arrive in per-iteration bursts separated by the
// compute phase; fitting all points then skews toward the in-burst cascade.
// A burst starts after any inter-arrival gap larger than half the largest gap
// in the front. Leaders sample the envelope once per burst.
std::vector<FrontPoint> burst_leaders(const std::vector<FrontPoint>& front);

// Envelope speed from burst leaders: least squares over 3+ leaders, the exact
// two-point slope when only two bursts fit into the system, and a plain
// measure_speed when the front never splits into bursts.
SpeedFit measure_speed_bursts(const std::vector<FrontPoint>& front, int discard_prefix);

// Leading edge of the front: the points no farther point beat to their rank.
// On gapped-distance topologies the long hop seeds the edge and short hops
// backfill the ranks in between one or more periods later; those fills sit
// above the edge line and poison a slope fit. Keeps, scanning from the far
// end, the strict running minima of arrival time.
std::vector<FrontPoint> front_envelope(const std::vector<FrontPoint>& front);

// Arrival residuals of every front point against the line through `reference`
// (time as a function of rank; needs >= 2 reference points).
std::vector<double> residuals_against(const std::vector<FrontPoint>& front,
                                      const std::vector<FrontPoint>& reference);

struct DecayFit {
    double decay_rate_s_per_rank = 0.0;  // clamped at 0
    double survival_time_s = 0.0;        // last arrival while duration >= threshold
    int last_rank = 0;                   // rank at that arrival
    std::vector<double> durations_s;     // per front point, for dispersion studies
};

DecayFit measure_decay(const std::vector<FrontPoint>& front, double threshold_s,
                       SlopeEstimator estimator = SlopeEstimator::LeastSquares);

struct WaveMetrics {
    std::vector<FrontPoint> front;
    SpeedFit speed;
    DecayFit decay;
    double threshold_s = 0.0;
    FrontDirection direction = FrontDirection::Up;
};

// Per-rank arrival residuals against the front's own fitted line; the sawtooth
// magnitude of these is what a zig-zagging wave leaves behind.
std::vector<double> front_residuals(const std::vector<FrontPoint>& front, int discard_prefix,
                                    SlopeEstimator estimator = SlopeEstimator::LeastSquares);

// Largest rank offset from the injector whose residual magnitude still reaches
// `amplitude_threshold_s`; 0 when the front is clean everywhere.
int residual_extent(const std::vector<FrontPoint>& front, int injection_rank,
                    int discard_prefix, double amplitude_threshold_s);

// Sum of Wait time per rank, and the same restricted to an iteration range.
std::vector<double> total_wait_per_rank(const Timeline& timeline);
std::vector<double> wait_per_rank_after(const Timeline& timeline, double start_s);

}  // namespace idlewave
