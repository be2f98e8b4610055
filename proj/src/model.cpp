#include "idlewave/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "idlewave/error.hpp"

namespace idlewave {

double v_min(double t_exec_s, double t_comm_s) {
    double period = t_exec_s + t_comm_s;
    if (!(period > 0.0)) throw InvalidTiming("compute plus communication period must be positive");
    return 1.0 / period;
}

int alpha(int num_ranks, int injection_rank) {
    if (num_ranks < 1) throw InvalidTopology("need at least one rank");
    if (injection_rank < 0 || injection_rank >= num_ranks)
        throw InvalidRank("injection rank outside the communicator");
    return std::max(num_ranks - 1 - injection_rank, injection_rank);
}

double v_max(int num_ranks, int injection_rank, double v_min_ranks_per_s) {
    return double(alpha(num_ranks, injection_rank)) * v_min_ranks_per_s;
}

namespace {

bool direction_split(ConcurrencyScheme scheme) {
    return scheme == ConcurrencyScheme::MWSDir || scheme == ConcurrencyScheme::BlockingSendrecv;
}

KappaResult kappa_from_distances(const std::vector<int>& distances, bool cartesian,
                                 ConcurrencyScheme scheme, bool rendezvous) {
    if (distances.empty()) throw InvalidTopology("kappa needs at least one communication edge");
    int j = distances.back();
    KappaResult out;
    out.protocol_factor = rendezvous && direction_split(scheme) ? 2 : 1;
    if (scheme == ConcurrencyScheme::SWMDim || scheme == ConcurrencyScheme::MWMDim) {
        out.kappa = double(j);
    } else if (cartesian && direction_split(scheme) && distances.size() > 1) {
        double mean = std::accumulate(distances.begin(), distances.end() - 1, 0.0) /
                      double(distances.size() - 1);
        out.kappa = std::floor(mean) + double(j);
        out.heuristic = true;
    } else {
        out.kappa = double(std::accumulate(distances.begin(), distances.end(), 0));
    }
    return out;
}

}  // namespace

KappaResult kappa(const TopologyMatrix& topology, ConcurrencyScheme scheme,
                  bool rendezvous_effective) {
    if (topology.regions.size() > 1)
        throw InvalidTopology("multi-region topology: use kappa_regions");
    return kappa_from_distances(topology.distances(),
                                topology.family == TopologyMatrix::Family::Cartesian, scheme,
                                rendezvous_effective);
}

KappaResult kappa(const TopologyMatrix& topology, ConcurrencyScheme scheme, Protocol protocol,
                  std::int64_t eager_limit_bytes) {
    return kappa(topology, scheme, rendezvous_effective(topology, protocol, eager_limit_bytes));
}

bool rendezvous_effective(const TopologyMatrix& topology, Protocol protocol,
                          std::int64_t eager_limit_bytes) {
    if (protocol != Protocol::AutoByEagerLimit)
        return protocol == Protocol::Rendezvous;
    int j = topology.longest_distance();
    std::int64_t bytes = 0;
    for (int r = 0; r < topology.num_ranks(); ++r)
        for (const Edge& e : topology.out_edges(r))
            if (std::abs(e.distance) == j) bytes = std::max(bytes, e.bytes);
    return rendezvous_applies(protocol, bytes, eager_limit_bytes);
}

std::vector<RegionPrediction> kappa_regions(const TopologyMatrix& topology,
                                            ConcurrencyScheme scheme, bool rendezvous_effective,
                                            double v_min_ranks_per_s) {
    std::vector<Region> regions = topology.regions;
    if (regions.empty())
        regions.push_back({0, topology.num_ranks(), topology.longest_distance()});
    std::vector<RegionPrediction> out;
    out.reserve(regions.size());
    for (const Region& reg : regions) {
        std::vector<int> distances(std::size_t(reg.j));
        std::iota(distances.begin(), distances.end(), 1);
        KappaResult k = kappa_from_distances(distances, false, scheme, rendezvous_effective);
        out.push_back({reg, k.kappa, double(k.protocol_factor) * k.kappa * v_min_ranks_per_s});
    }
    return out;
}

Prediction predict_speed(const SimConfig& config) {
    Prediction p;
    double t_comm = silent_iteration_comm(config);
    p.v_min_ranks_per_s = v_min(config.t_exec_s, t_comm);
    int inject = config.delays.empty() ? 0 : config.delays.front().rank;
    p.alpha_ranks = alpha(config.topology.num_ranks(), inject);
    p.v_max_ranks_per_s = double(p.alpha_ranks) * p.v_min_ranks_per_s;
    bool rdv = rendezvous_effective(config.topology, config.protocol, config.eager_limit_bytes);
    if (config.topology.regions.size() > 1) {
        p.per_region = kappa_regions(config.topology, config.scheme, rdv, p.v_min_ranks_per_s);
        const RegionPrediction* home = &p.per_region.front();
        for (const RegionPrediction& rp : p.per_region)
            if (inject >= rp.region.lo && inject < rp.region.hi) home = &rp;
        p.kappa = home->kappa;
        p.protocol_factor = rdv && direction_split(config.scheme) ? 2 : 1;
        p.heuristic_kappa = false;
    } else {
        KappaResult k = kappa(config.topology, config.scheme, rdv);
        p.kappa = k.kappa;
        p.protocol_factor = k.protocol_factor;
        p.heuristic_kappa = k.heuristic;
    }
    p.v_silent_ranks_per_s = double(p.protocol_factor) * p.kappa * p.v_min_ranks_per_s;
    return p;
}

double predict_shortening(double initial_duration_s,
                          const std::vector<double>& encountered_noise_s) {
    if (initial_duration_s < 0.0) throw InvalidTiming("wave duration must be non-negative");
    double total = 0.0;
    for (double x : encountered_noise_s) {
        if (x < 0.0) throw InvalidTiming("noise durations must be non-negative");
        total += x;
    }
    return std::max(0.0, initial_duration_s - total);
}

}  // namespace idlewave
