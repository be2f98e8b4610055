#pragma once

#include <string>
#include <vector>

namespace idlewave {

// Dependency classes for global operations, reduced to what shapes an idle
// wave: a full barrier-like fence, a k-nomial reduction tree toward a root,
// and a gather whose non-root ranks leave immediately.
enum class CollectiveClass { Synchronizing, TreeReduce, TransparentGather };

struct CollectiveSpec {
    CollectiveClass cls = CollectiveClass::Synchronizing;
    int iteration = 0;   // spliced after that iteration's point-to-point groups
    int root = 0;        // TreeReduce / TransparentGather
    int fanout = 2;      // TreeReduce tree radix, >= 2
    double duration_s = 0.0;  // per-hop cost

    friend bool operator==(const CollectiveSpec&, const CollectiveSpec&) = default;
};

// Maps entry instants of all ranks to exit instants.
//   Synchronizing:     everyone exits at max(entries) + duration.
//   TreeReduce:        a node exits after its own entry and all tree children
//                      have folded, one duration per received hop plus one for
//                      the final send; leaves exit at entry + duration.
//   TransparentGather: non-root exits at entry + duration, root waits for all.
std::vector<double> apply_collective(const CollectiveSpec& spec, const std::vector<double>& entries);

// Environment-variable-style selector mapping used by the config layer:
// reduceN picks I_MPI_ADJUST_REDUCE algorithm N. 1 -> Synchronizing
// (Rabenseifner), 8..11 -> TreeReduce (binomial/topology-aware variants),
// 2,4..7 -> TransparentGather-like behavior. Unsupported values throw.
CollectiveClass collective_class_for_reduce_algorithm(int algorithm);

const char* collective_class_name(CollectiveClass c);

}  // namespace idlewave
