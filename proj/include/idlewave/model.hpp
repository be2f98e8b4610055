#pragma once

#include <vector>

#include "idlewave/schedule.hpp"
#include "idlewave/simulator.hpp"
#include "idlewave/topology.hpp"

namespace idlewave {

// Slowest idle-wave speed: one rank per compute+comm period.
double v_min(double t_exec_s, double t_comm_s);

// Farthest rank distance reachable from the injection point; bounds the
// single-step wave reach on a barrier-like (all-to-all) system.
int alpha(int num_ranks, int injection_rank);

double v_max(int num_ranks, int injection_rank, double v_min_ranks_per_s);

struct KappaResult {
    double kappa = 1.0;
    int protocol_factor = 1;  // 2 when rendezvous flips direction-split waits
    bool heuristic = false;   // the Cartesian averaging rule is fitted, not derived
};

// Dimensionless wave-speed multiplier of the envelope:
//   - per-distance waits (MWSDim, MWSDir, Blocking) on chains: sum of the
//     distinct neighbor distances (compact j gives j(j+1)/2),
//   - dimension- or fully-fused waits (MWMDim, SWMDim): the longest distance,
//   - Cartesian grids with direction-split waits: floor of the mean of the
//     non-longest distinct distances, plus the longest (heuristic).
// Rendezvous doubles the speed only for direction-split schemes; fused waits
// already couple both directions through one completion point.
// Multi-region topologies must go through kappa_regions instead.
KappaResult kappa(const TopologyMatrix& topology, ConcurrencyScheme scheme,
                  bool rendezvous_effective);
KappaResult kappa(const TopologyMatrix& topology, ConcurrencyScheme scheme, Protocol protocol,
                  std::int64_t eager_limit_bytes = 16384);

// Whether the protocol resolves to rendezvous for wave-speed purposes. Under
// AutoByEagerLimit the longest-distance edge decides: it carries the envelope.
bool rendezvous_effective(const TopologyMatrix& topology, Protocol protocol,
                          std::int64_t eager_limit_bytes);

struct RegionPrediction {
    Region region;
    double kappa = 1.0;
    double speed_ranks_per_s = 0.0;
};

// Per-region kappa for piecewise-compact topologies, each region using its own
// reach; predicts the piecewise front slopes (refraction at region borders).
std::vector<RegionPrediction> kappa_regions(const TopologyMatrix& topology,
                                            ConcurrencyScheme scheme, bool rendezvous_effective,
                                            double v_min_ranks_per_s);

struct Prediction {
    double v_min_ranks_per_s = 0.0;
    double v_max_ranks_per_s = 0.0;
    int alpha_ranks = 0;
    double kappa = 1.0;
    int protocol_factor = 1;
    bool heuristic_kappa = false;
    double v_silent_ranks_per_s = 0.0;  // protocol_factor * kappa * v_min
    std::vector<RegionPrediction> per_region;  // nonempty only for region-structured topologies
};

// Full analytic prediction for a config. t_comm is the silent per-iteration
// communication time of the schedule, alpha/v_max use the first delay's rank
// (rank 0 when no delay is configured), and on multi-region topologies the
// scalar kappa is the injection rank's region.
Prediction predict_speed(const SimConfig& config);

// Remaining wave duration after the wave has absorbed the given noise pieces.
double predict_shortening(double initial_duration_s,
                          const std::vector<double>& encountered_noise_s);

}  // namespace idlewave
