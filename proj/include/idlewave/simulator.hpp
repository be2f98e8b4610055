#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "idlewave/collectives.hpp"
#include "idlewave/noise.hpp"
#include "idlewave/schedule.hpp"
#include "idlewave/topology.hpp"

namespace idlewave {

enum class Protocol { Eager, Rendezvous, AutoByEagerLimit };

struct DelayInjection {
    int rank = 0;
    int iteration = 0;
    double extra_seconds = 0.0;

    friend bool operator==(const DelayInjection&, const DelayInjection&) = default;
};

// Per-edge message cost in seconds. Most specific wins: explicit override,
// then the domain rule (ranks src/m and dst/m in the same block communicate
// at intra_s, across blocks at cross_s), then the uniform default.
struct CommCostModel {
    struct DomainRule {
        int domain_size = 1;
        double intra_s = 0.0;
        double cross_s = 0.0;
        friend bool operator==(const DomainRule&, const DomainRule&) = default;
    };
    struct Override {
        int src = 0;
        int dst = 0;
        double cost_s = 0.0;
        friend bool operator==(const Override&, const Override&) = default;
    };

    double uniform_s = 0.0;
    std::optional<DomainRule> domain;
    std::vector<Override> overrides;

    double cost(int src, int dst) const;
    friend bool operator==(const CommCostModel&, const CommCostModel&) = default;
};

struct SimConfig {
    TopologyMatrix topology;
    ConcurrencyScheme scheme = ConcurrencyScheme::MWSDim;
    double t_exec_s = 0.0;
    CommCostModel comm;
    Protocol protocol = Protocol::Eager;
    std::int64_t eager_limit_bytes = 16384;
    std::vector<DelayInjection> delays;
    std::optional<NoiseSpec> noise;
    std::vector<CollectiveSpec> collectives;
    int iterations = 1;
    std::uint64_t seed = 0;
};

enum class Phase { Compute, InjectedDelay, Noise, Wait, Collective };

struct Interval {
    int iteration = 0;
    Phase phase = Phase::Compute;
    double start_s = 0.0;
    double end_s = 0.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

// Per-rank interval chains are contiguous (each start equals the previous
// end), start at 0, and contain no zero-length entries.
struct Timeline {
    std::vector<std::vector<Interval>> per_rank;
    std::vector<double> final_clock_s;
    double silent_total_s = 0.0;       // num_ranks * iterations * (t_exec + comm)
    double realized_noise_power = 0.0; // injected noise seconds / silent_total_s

    int num_ranks() const { return static_cast<int>(per_rank.size()); }
    friend bool operator==(const Timeline&, const Timeline&) = default;
};

struct SimOptions {
    bool record_timeline = true;
    bool parallel = true;  // engine-internal OpenMP; ignored by the reference
};

// Lockstep engine: ranks advance together through the globally sorted group
// keys; matching ops always sit in same-key groups on both endpoints, so each
// step reads a consistent snapshot and ranks are independent within a step.
// OpenMP-parallel over ranks.
Timeline simulate(const SimConfig& config, const SimOptions& opts = {});

// Reference engine: per-iteration Kahn pass over explicit dependency edges
// between group nodes. Serial, no lockstep assumption, detects cycles. Must
// produce bit-identical timelines to simulate().
Timeline simulate_reference(const SimConfig& config, const SimOptions& opts = {});

// Silent per-iteration communication time of the busiest rank: groups complete
// back to back, each costing the max op cost inside (concurrent ops are not
// summed). This is the t_comm that enters speed predictions and noise power.
double silent_iteration_comm(const SimConfig& config);

// Fraction of ranks inside Wait or Collective per time bin, from 0 to the last
// rank's finish. Exact overlap arithmetic, so the series integrates to the
// total wait+collective time divided by (num_ranks * bin_width).
std::vector<double> library_fraction(const Timeline& timeline, double bin_width_s);

bool rendezvous_applies(Protocol protocol, std::int64_t bytes, std::int64_t eager_limit_bytes);

const char* phase_name(Phase p);
const char* protocol_name(Protocol p);

}  // namespace idlewave
