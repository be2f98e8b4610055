#include "idlewave/schedule.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace idlewave {

namespace {

int sign_of(int d) { return d >= 0 ? +1 : -1; }

GroupKey project_key(ConcurrencyScheme scheme, int dim, int distance) {
    switch (scheme) {
        case ConcurrencyScheme::MWSDir:
        case ConcurrencyScheme::BlockingSendrecv:
            return GroupKey{dim, std::abs(distance), sign_of(distance)};
        case ConcurrencyScheme::MWSDim:
            return GroupKey{dim, std::abs(distance), 0};
        case ConcurrencyScheme::MWMDim:
            return GroupKey{dim, 0, 0};
        case ConcurrencyScheme::SWMDim:
            return GroupKey{0, 0, 0};
    }
    return GroupKey{};
}

bool op_before(const CommOp& a, const CommOp& b) {
    if (a.kind != b.kind) return a.kind == OpKind::Recv;  // Irecv-then-Isend idiom
    int da = std::abs(a.distance), db = std::abs(b.distance);
    if (a.dim != b.dim) return a.dim < b.dim;
    if (da != db) return da < db;
    if (a.distance != b.distance) return a.distance > b.distance;
    return a.partner < b.partner;
}

}  // namespace

std::vector<GroupKey> CommSchedule::global_keys() const {
    std::set<GroupKey> keys;
    for (const auto& groups : per_rank)
        for (const auto& g : groups) keys.insert(g.key);
    return std::vector<GroupKey>(keys.begin(), keys.end());
}

int CommSchedule::max_groups_per_rank() const {
    int m = 0;
    for (const auto& groups : per_rank) m = std::max(m, static_cast<int>(groups.size()));
    return m;
}

CommSchedule build_schedule(const TopologyMatrix& topology, ConcurrencyScheme scheme) {
    const int n = topology.num_ranks();
    CommSchedule sched;
    sched.scheme = scheme;
    sched.per_rank.resize(n);

    for (int r = 0; r < n; ++r) {
        std::map<GroupKey, std::vector<CommOp>> groups;
        for (const Edge& e : topology.out_edges(r))
            groups[project_key(scheme, e.dim, e.distance)].push_back(
                CommOp{OpKind::Send, e.partner, e.distance, e.dim, e.bytes});
        for (const Edge& e : topology.in_edges(r))
            groups[project_key(scheme, e.dim, e.distance)].push_back(
                CommOp{OpKind::Recv, e.partner, e.distance, e.dim, e.bytes});

        sched.per_rank[r].reserve(groups.size());
        for (auto& [key, ops] : groups) {
            std::sort(ops.begin(), ops.end(), op_before);
            sched.per_rank[r].push_back(CommGroup{key, std::move(ops)});
        }
        // std::map iteration already yields ascending keys.
    }
    return sched;
}

void validate_matching(const CommSchedule& schedule) {
    // Count matching-pair endpoints: a Send on rank i to k with full key K must
    // meet exactly one Recv on rank k from i in k's group of key K.
    struct PairKey {
        int src, dst;
        GroupKey key;
        bool operator<(const PairKey& o) const {
            if (src != o.src) return src < o.src;
            if (dst != o.dst) return dst < o.dst;
            if (!(key == o.key)) return key < o.key;
            return false;
        }
    };
    std::map<PairKey, int> sends, recvs;
    for (int r = 0; r < schedule.num_ranks(); ++r) {
        for (const auto& g : schedule.per_rank[r]) {
            for (const CommOp& op : g.ops) {
                if (op.kind == OpKind::Send)
                    ++sends[PairKey{r, op.partner, g.key}];
                else
                    ++recvs[PairKey{op.partner, r, g.key}];
            }
        }
    }
    for (const auto& [pk, count] : sends) {
        auto it = recvs.find(pk);
        int have = it == recvs.end() ? 0 : it->second;
        if (have != count)
            throw MatchError("rank " + std::to_string(pk.src) + " Send to " +
                             std::to_string(pk.dst) + " has " + std::to_string(have) +
                             " matching Recv(s), expected " + std::to_string(count));
    }
    for (const auto& [pk, count] : recvs) {
        auto it = sends.find(pk);
        int have = it == sends.end() ? 0 : it->second;
        if (have != count)
            throw MatchError("rank " + std::to_string(pk.dst) + " Recv from " +
                             std::to_string(pk.src) + " has " + std::to_string(have) +
                             " matching Send(s), expected " + std::to_string(count));
    }
}

const char* scheme_name(ConcurrencyScheme s) {
    switch (s) {
        case ConcurrencyScheme::MWSDim: return "mwsdim";
        case ConcurrencyScheme::MWMDim: return "mwmdim";
        case ConcurrencyScheme::SWMDim: return "swmdim";
        case ConcurrencyScheme::MWSDir: return "mwsdir";
        case ConcurrencyScheme::BlockingSendrecv: return "blocking";
    }
    return "?";
}

}  // namespace idlewave
