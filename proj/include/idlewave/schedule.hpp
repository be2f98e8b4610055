#pragma once

#include <cstdint>
#include <vector>

#include "idlewave/topology.hpp"

namespace idlewave {

// How many MPI_Waitall fences one iteration carries, from most split to least:
//   MWSDir  - one wait per (dimension, distance, direction)
//   MWSDim  - one wait per (dimension, distance), both directions together
//   MWMDim  - one wait per dimension (chains are a single dimension)
//   SWMDim  - a single wait for everything
//   BlockingSendrecv - semantically identical to MWSDir
enum class ConcurrencyScheme { MWSDim, MWMDim, SWMDim, MWSDir, BlockingSendrecv };

enum class OpKind { Send, Recv };

// Keys order groups within an iteration: ascending dim, then distance, then
// positive before negative data-flow direction. Coarser schemes zero out the
// unused components so the same ordering applies everywhere.
struct GroupKey {
    int dim = 0;
    int distance = 0;
    int direction = 0;  // +1 / -1 / 0 when folded

    friend bool operator==(const GroupKey&, const GroupKey&) = default;
    friend bool operator<(const GroupKey& a, const GroupKey& b) {
        if (a.dim != b.dim) return a.dim < b.dim;
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.direction > b.direction;
    }
};

// One posted operation. `partner` is the peer rank; `distance` is the signed
// data-flow distance (receiver minus sender), identical on both sides of a
// matching pair so both sides derive the same group key.
struct CommOp {
    OpKind kind = OpKind::Send;
    int partner = 0;
    int distance = 0;
    int dim = 0;
    std::int64_t bytes = 0;
};

struct CommGroup {
    GroupKey key;
    std::vector<CommOp> ops;  // all Recvs first, then all Sends
};

// Per-rank group lists, each sorted by key. Groups that would be empty after
// boundary clipping are dropped entirely.
struct CommSchedule {
    ConcurrencyScheme scheme = ConcurrencyScheme::MWSDim;
    std::vector<std::vector<CommGroup>> per_rank;

    int num_ranks() const { return static_cast<int>(per_rank.size()); }
    // Sorted union of keys over all ranks; the simulator's step order.
    std::vector<GroupKey> global_keys() const;
    int max_groups_per_rank() const;
};

CommSchedule build_schedule(const TopologyMatrix& topology, ConcurrencyScheme scheme);

// Checks that every Send has exactly one matching Recv in the same-key group of
// the partner (and vice versa). Throws MatchError naming rank/kind/partner.
void validate_matching(const CommSchedule& schedule);

const char* scheme_name(ConcurrencyScheme s);

}  // namespace idlewave
