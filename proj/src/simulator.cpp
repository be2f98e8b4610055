#include "idlewave/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "idlewave/error.hpp"

namespace idlewave {

double CommCostModel::cost(int src, int dst) const {
    for (const Override& o : overrides)
        if (o.src == src && o.dst == dst) return o.cost_s;
    if (domain) {
        if (src / domain->domain_size == dst / domain->domain_size) return domain->intra_s;
        return domain->cross_s;
    }
    return uniform_s;
}

bool rendezvous_applies(Protocol protocol, std::int64_t bytes, std::int64_t eager_limit_bytes) {
    switch (protocol) {
        case Protocol::Eager: return false;
        case Protocol::Rendezvous: return true;
        case Protocol::AutoByEagerLimit: return bytes > eager_limit_bytes;
    }
    return false;
}

namespace {

void check_config(const SimConfig& cfg) {
    if (cfg.t_exec_s < 0.0) throw InvalidTiming("t_exec must be >= 0");
    if (cfg.comm.uniform_s < 0.0) throw InvalidTiming("comm cost must be >= 0");
    if (cfg.iterations < 1) throw InvalidTiming("need at least one iteration");
    const int n = cfg.topology.num_ranks();
    for (const DelayInjection& d : cfg.delays) {
        if (d.rank < 0 || d.rank >= n)
            throw ConfigError("delay rank " + std::to_string(d.rank) + " out of range");
        if (d.iteration < 0 || d.iteration >= cfg.iterations)
            throw ConfigError("delay iteration " + std::to_string(d.iteration) + " out of range");
        if (d.extra_seconds < 0.0) throw ConfigError("delay must be >= 0");
    }
    for (const CollectiveSpec& c : cfg.collectives) {
        if (c.iteration < 0 || c.iteration >= cfg.iterations)
            throw ConfigError("collective iteration " + std::to_string(c.iteration) +
                              " out of range");
        if (c.root < 0 || c.root >= n) throw ConfigError("collective root out of range");
    }
}

// Resolved per-op dependency: completion >= post[partner] + cost_s.
struct DepOp {
    int partner = 0;
    double cost_s = 0.0;
};

// One rank's groups flattened against the global key order.
struct RankPlan {
    // step -> [begin, end) into deps, or begin == end when the rank has no
    // group at that step but another rank does.
    std::vector<int> dep_begin;
    std::vector<int> dep_end;
    std::vector<char> has_group;
    std::vector<DepOp> deps;
};

struct Plan {
    std::vector<RankPlan> ranks;
    int num_steps = 0;
};

Plan build_plan(const SimConfig& cfg, const CommSchedule& sched) {
    const int n = cfg.topology.num_ranks();
    const std::vector<GroupKey> keys = sched.global_keys();
    std::map<GroupKey, int> step_of;
    for (size_t s = 0; s < keys.size(); ++s) step_of[keys[s]] = static_cast<int>(s);

    Plan plan;
    plan.num_steps = static_cast<int>(keys.size());
    plan.ranks.resize(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        RankPlan& rp = plan.ranks[static_cast<size_t>(r)];
        rp.dep_begin.assign(static_cast<size_t>(plan.num_steps), 0);
        rp.dep_end.assign(static_cast<size_t>(plan.num_steps), 0);
        rp.has_group.assign(static_cast<size_t>(plan.num_steps), 0);
        for (const CommGroup& g : sched.per_rank[static_cast<size_t>(r)]) {
            int s = step_of.at(g.key);
            rp.has_group[static_cast<size_t>(s)] = 1;
            rp.dep_begin[static_cast<size_t>(s)] = static_cast<int>(rp.deps.size());
            for (const CommOp& op : g.ops) {
                bool dep = op.kind == OpKind::Recv ||
                           rendezvous_applies(cfg.protocol, op.bytes, cfg.eager_limit_bytes);
                if (!dep) continue;
                // Data flows sender -> receiver; the edge cost is looked up in
                // that direction for both the Recv and the rendezvous Send dep.
                int src = op.kind == OpKind::Recv ? op.partner : r;
                int dst = op.kind == OpKind::Recv ? r : op.partner;
                rp.deps.push_back(DepOp{op.partner, cfg.comm.cost(src, dst)});
            }
            rp.dep_end[static_cast<size_t>(s)] = static_cast<int>(rp.deps.size());
        }
    }
    return plan;
}

// Shared state both engines write through, so interval recording and noise
// accounting stay literally the same code.
struct Recorder {
    bool record = false;
    Timeline* out = nullptr;

    void emit(int rank, int iteration, Phase phase, double start, double end) {
        if (!record || end <= start) return;
        out->per_rank[static_cast<size_t>(rank)].push_back(
            Interval{iteration, phase, start, end});
    }
};

struct ComputeResult {
    double noise_sum = 0.0;
};

// Compute phase of one rank in one iteration: exec + injected delay + noise,
// recorded as separate intervals in that order.
ComputeResult advance_compute(const SimConfig& cfg, int rank, int iter, double& clock,
                              const std::map<std::pair<int, int>, double>& delay_at,
                              Recorder& rec) {
    ComputeResult res;
    double start = clock;
    clock += cfg.t_exec_s;
    rec.emit(rank, iter, Phase::Compute, start, clock);

    if (auto it = delay_at.find({rank, iter}); it != delay_at.end()) {
        start = clock;
        clock += it->second;
        rec.emit(rank, iter, Phase::InjectedDelay, start, clock);
    }
    if (cfg.noise) {
        double d = noise_draw(*cfg.noise, rank, iter);
        if (d > 0.0) {
            start = clock;
            clock += d;
            rec.emit(rank, iter, Phase::Noise, start, clock);
            res.noise_sum = d;
        }
    }
    return res;
}

std::map<std::pair<int, int>, double> index_delays(const SimConfig& cfg) {
    std::map<std::pair<int, int>, double> m;
    for (const DelayInjection& d : cfg.delays) m[{d.rank, d.iteration}] += d.extra_seconds;
    return m;
}

void splice_collectives(const SimConfig& cfg, int iter, std::vector<double>& clock,
                        Recorder& rec) {
    for (const CollectiveSpec& c : cfg.collectives) {
        if (c.iteration != iter) continue;
        std::vector<double> exits = apply_collective(c, clock);
        for (size_t r = 0; r < clock.size(); ++r) {
            rec.emit(static_cast<int>(r), iter, Phase::Collective, clock[r], exits[r]);
            clock[r] = exits[r];
        }
    }
}

void finish_timeline(const SimConfig& cfg, Timeline& tl, const std::vector<double>& clock,
                     double noise_total) {
    tl.final_clock_s.assign(clock.begin(), clock.end());
    tl.silent_total_s = static_cast<double>(cfg.topology.num_ranks()) * cfg.iterations *
                        (cfg.t_exec_s + silent_iteration_comm(cfg));
    tl.realized_noise_power = tl.silent_total_s > 0.0 ? noise_total / tl.silent_total_s : 0.0;
}

}  // namespace

double silent_iteration_comm(const SimConfig& config) {
    CommSchedule sched = build_schedule(config.topology, config.scheme);
    double worst = 0.0;
    for (int r = 0; r < sched.num_ranks(); ++r) {
        double total = 0.0;
        for (const CommGroup& g : sched.per_rank[static_cast<size_t>(r)]) {
            double gc = 0.0;
            for (const CommOp& op : g.ops) {
                bool dep = op.kind == OpKind::Recv ||
                           rendezvous_applies(config.protocol, op.bytes, config.eager_limit_bytes);
                if (!dep) continue;
                int src = op.kind == OpKind::Recv ? op.partner : r;
                int dst = op.kind == OpKind::Recv ? r : op.partner;
                gc = std::max(gc, config.comm.cost(src, dst));
            }
            total += gc;
        }
        worst = std::max(worst, total);
    }
    return worst;
}

Timeline simulate(const SimConfig& cfg, const SimOptions& opts) {
    check_config(cfg);
    const int n = cfg.topology.num_ranks();
    CommSchedule sched = build_schedule(cfg.topology, cfg.scheme);
    Plan plan = build_plan(cfg, sched);
    auto delay_at = index_delays(cfg);

    Timeline tl;
    tl.per_rank.resize(static_cast<size_t>(n));
    // Safe under the parallel loops: emit() only touches per_rank[i] of the
    // calling rank, and distinct ranks own distinct vectors.
    Recorder rec{opts.record_timeline, &tl};

    std::vector<double> clock(static_cast<size_t>(n), 0.0);
    std::vector<double> post(static_cast<size_t>(n), 0.0);
    std::vector<double> noise_per_rank(static_cast<size_t>(n), 0.0);

#ifdef _OPENMP
    const bool par = opts.parallel && !omp_in_parallel();
#else
    const bool par = false;
    (void)opts;
#endif

    for (int t = 0; t < cfg.iterations; ++t) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
        for (int i = 0; i < n; ++i) {
            ComputeResult cr =
                advance_compute(cfg, i, t, clock[static_cast<size_t>(i)], delay_at, rec);
            noise_per_rank[static_cast<size_t>(i)] += cr.noise_sum;
        }

        for (int s = 0; s < plan.num_steps; ++s) {
            post = clock;  // every rank posts this step's ops at its current clock
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
            for (int i = 0; i < n; ++i) {
                const RankPlan& rp = plan.ranks[static_cast<size_t>(i)];
                if (!rp.has_group[static_cast<size_t>(s)]) continue;
                double comp = post[static_cast<size_t>(i)];
                for (int d = rp.dep_begin[static_cast<size_t>(s)];
                     d < rp.dep_end[static_cast<size_t>(s)]; ++d) {
                    const DepOp& dep = rp.deps[static_cast<size_t>(d)];
                    comp = std::max(comp, post[static_cast<size_t>(dep.partner)] + dep.cost_s);
                }
                if (comp > post[static_cast<size_t>(i)]) {
                    rec.emit(i, t, Phase::Wait, post[static_cast<size_t>(i)], comp);
                    clock[static_cast<size_t>(i)] = comp;
                }
            }
        }

        splice_collectives(cfg, t, clock, rec);
    }

    double noise_total = 0.0;
    for (double v : noise_per_rank) noise_total += v;
    finish_timeline(cfg, tl, clock, noise_total);
    return tl;
}

namespace {

// Node ids for the reference engine's per-iteration dependency graph.
struct NodeRef {
    int rank;
    int group_idx;
};

}  // namespace

Timeline simulate_reference(const SimConfig& cfg, const SimOptions& opts) {
    check_config(cfg);
    const int n = cfg.topology.num_ranks();
    CommSchedule sched = build_schedule(cfg.topology, cfg.scheme);
    auto delay_at = index_delays(cfg);

    // Per rank: key -> group index, for matching lookups.
    std::vector<std::map<GroupKey, int>> key_idx(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r)
        for (size_t g = 0; g < sched.per_rank[static_cast<size_t>(r)].size(); ++g)
            key_idx[static_cast<size_t>(r)][sched.per_rank[static_cast<size_t>(r)][g].key] =
                static_cast<int>(g);

    Timeline tl;
    tl.per_rank.resize(static_cast<size_t>(n));
    Recorder rec{opts.record_timeline, &tl};

    std::vector<double> clock(static_cast<size_t>(n), 0.0);
    // Accumulated per rank and reduced rank-major at the end, matching the
    // lockstep engine's summation order bit for bit.
    std::vector<double> noise_per_rank(static_cast<size_t>(n), 0.0);

    // Flat node numbering within one iteration.
    std::vector<int> node_base(static_cast<size_t>(n) + 1, 0);
    for (int r = 0; r < n; ++r)
        node_base[static_cast<size_t>(r) + 1] =
            node_base[static_cast<size_t>(r)] +
            static_cast<int>(sched.per_rank[static_cast<size_t>(r)].size());
    const int num_nodes = node_base[static_cast<size_t>(n)];

    std::vector<double> completion(static_cast<size_t>(num_nodes));
    std::vector<int> indegree(static_cast<size_t>(num_nodes));
    std::vector<std::vector<int>> dependents(static_cast<size_t>(num_nodes));

    // The edge list is iteration-independent; build it once. An op's partner
    // posts when the partner's preceding node completes (group_idx - 1), or at
    // its compute end when the matching group is the partner's first.
    std::vector<std::vector<NodeRef>> node_deps(static_cast<size_t>(num_nodes));
    for (int r = 0; r < n; ++r) {
        const auto& groups = sched.per_rank[static_cast<size_t>(r)];
        for (size_t g = 0; g < groups.size(); ++g) {
            int node = node_base[static_cast<size_t>(r)] + static_cast<int>(g);
            if (g > 0) node_deps[static_cast<size_t>(node)].push_back(NodeRef{r, static_cast<int>(g) - 1});
            for (const CommOp& op : groups[g].ops) {
                bool dep = op.kind == OpKind::Recv ||
                           rendezvous_applies(cfg.protocol, op.bytes, cfg.eager_limit_bytes);
                if (!dep) continue;
                auto it = key_idx[static_cast<size_t>(op.partner)].find(groups[g].key);
                if (it == key_idx[static_cast<size_t>(op.partner)].end())
                    throw MatchError("rank " + std::to_string(r) + " op with partner " +
                                     std::to_string(op.partner) + " has no matching group");
                if (it->second > 0)
                    node_deps[static_cast<size_t>(node)].push_back(NodeRef{op.partner, it->second - 1});
            }
        }
    }
    for (int node = 0; node < num_nodes; ++node)
        for (const NodeRef& d : node_deps[static_cast<size_t>(node)])
            dependents[static_cast<size_t>(node_base[static_cast<size_t>(d.rank)] + d.group_idx)]
                .push_back(node);

    std::vector<double> compute_end(static_cast<size_t>(n));
    std::vector<int> ready;  // Kahn worklist

    for (int t = 0; t < cfg.iterations; ++t) {
        for (int i = 0; i < n; ++i) {
            ComputeResult cr = advance_compute(cfg, i, t, clock[static_cast<size_t>(i)],
                                               delay_at, rec);
            noise_per_rank[static_cast<size_t>(i)] += cr.noise_sum;
            compute_end[static_cast<size_t>(i)] = clock[static_cast<size_t>(i)];
        }

        for (int node = 0; node < num_nodes; ++node)
            indegree[static_cast<size_t>(node)] =
                static_cast<int>(node_deps[static_cast<size_t>(node)].size());
        ready.clear();
        for (int node = 0; node < num_nodes; ++node)
            if (indegree[static_cast<size_t>(node)] == 0) ready.push_back(node);

        int processed = 0;
        while (!ready.empty()) {
            int node = ready.back();
            ready.pop_back();
            ++processed;

            // Identify the owning rank by binary search over node_base.
            int r = static_cast<int>(std::upper_bound(node_base.begin(), node_base.end(), node) -
                                     node_base.begin()) - 1;
            int g = node - node_base[static_cast<size_t>(r)];
            const CommGroup& group = sched.per_rank[static_cast<size_t>(r)][static_cast<size_t>(g)];

            auto post_of = [&](int rank, int group_idx) {
                if (group_idx == 0) return compute_end[static_cast<size_t>(rank)];
                return completion[static_cast<size_t>(node_base[static_cast<size_t>(rank)] +
                                                      group_idx - 1)];
            };

            double reach = post_of(r, g);
            double comp = reach;
            for (const CommOp& op : group.ops) {
                bool dep = op.kind == OpKind::Recv ||
                           rendezvous_applies(cfg.protocol, op.bytes, cfg.eager_limit_bytes);
                if (!dep) continue;
                int pg = key_idx[static_cast<size_t>(op.partner)].at(group.key);
                int src = op.kind == OpKind::Recv ? op.partner : r;
                int dst = op.kind == OpKind::Recv ? r : op.partner;
                comp = std::max(comp, post_of(op.partner, pg) + cfg.comm.cost(src, dst));
            }
            completion[static_cast<size_t>(node)] = comp;
            if (comp > reach) rec.emit(r, t, Phase::Wait, reach, comp);

            for (int dep : dependents[static_cast<size_t>(node)])
                if (--indegree[static_cast<size_t>(dep)] == 0) ready.push_back(dep);
        }
        if (processed != num_nodes)
            throw std::logic_error("dependency cycle in communication schedule");

        for (int i = 0; i < n; ++i) {
            const auto& groups = sched.per_rank[static_cast<size_t>(i)];
            if (!groups.empty())
                clock[static_cast<size_t>(i)] = completion[static_cast<size_t>(
                    node_base[static_cast<size_t>(i)] + static_cast<int>(groups.size()) - 1)];
        }
        splice_collectives(cfg, t, clock, rec);
    }

    double noise_total = 0.0;
    for (double v : noise_per_rank) noise_total += v;
    finish_timeline(cfg, tl, clock, noise_total);
    return tl;
}

std::vector<double> library_fraction(const Timeline& timeline, double bin_width_s) {
    if (bin_width_s <= 0.0) throw InvalidTiming("bin width must be positive");
    double horizon = 0.0;
    for (double c : timeline.final_clock_s) horizon = std::max(horizon, c);
    const int bins = std::max(1, static_cast<int>(std::ceil(horizon / bin_width_s)));
    std::vector<double> waiting(static_cast<size_t>(bins), 0.0);

    for (const auto& intervals : timeline.per_rank) {
        for (const Interval& iv : intervals) {
            if (iv.phase != Phase::Wait && iv.phase != Phase::Collective) continue;
            int b0 = static_cast<int>(iv.start_s / bin_width_s);
            int b1 = std::min(bins - 1, static_cast<int>(iv.end_s / bin_width_s));
            for (int b = b0; b <= b1; ++b) {
                double lo = std::max(iv.start_s, b * bin_width_s);
                double hi = std::min(iv.end_s, (b + 1) * bin_width_s);
                if (hi > lo) waiting[static_cast<size_t>(b)] += hi - lo;
            }
        }
    }
    const double denom = static_cast<double>(timeline.num_ranks()) * bin_width_s;
    for (double& w : waiting) w /= denom;
    return waiting;
}

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Compute: return "compute";
        case Phase::InjectedDelay: return "delay";
        case Phase::Noise: return "noise";
        case Phase::Wait: return "wait";
        case Phase::Collective: return "collective";
    }
    return "?";
}

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::Eager: return "eager";
        case Protocol::Rendezvous: return "rendezvous";
        case Protocol::AutoByEagerLimit: return "auto";
    }
    return "?";
}

}  // namespace idlewave
