#include "idlewave/collectives.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "idlewave/error.hpp"

namespace idlewave {

namespace {

std::vector<double> tree_reduce_exits(const CollectiveSpec& spec,
                                      const std::vector<double>& entries) {
    const int n = static_cast<int>(entries.size());
    const int f = spec.fanout;
    // ready[r] = instant the node has folded its whole subtree, indexed by
    // relative rank (root at 0). Children of r sit at r + m*f^level for the
    // levels where r's base-f digits below `level` are zero.
    std::vector<double> ready(entries.size());
    for (int r = 0; r < n; ++r) ready[static_cast<size_t>(r)] = entries[static_cast<size_t>((r + spec.root) % n)];

    // Bottom-up by level: strides f^0, f^1, ... Receives at one node are
    // sequential in child order, one duration per hop.
    for (long long stride = 1; stride < n; stride *= f) {
        for (int r = 0; r < n; r += static_cast<int>(stride) * f) {
            for (int m = 1; m < f; ++m) {
                long long child = r + static_cast<long long>(m) * stride;
                if (child >= n) break;
                ready[static_cast<size_t>(r)] =
                    std::max(ready[static_cast<size_t>(r)], ready[static_cast<size_t>(child)]) +
                    spec.duration_s;
            }
        }
    }

    std::vector<double> exits(entries.size());
    for (int r = 0; r < n; ++r) {
        int abs_rank = (r + spec.root) % n;
        // Non-roots still owe the send to their parent; the root's final
        // duration stands in for the operation's own cost.
        exits[static_cast<size_t>(abs_rank)] = ready[static_cast<size_t>(r)] + spec.duration_s;
    }
    return exits;
}

}  // namespace

std::vector<double> apply_collective(const CollectiveSpec& spec,
                                     const std::vector<double>& entries) {
    if (entries.empty()) throw InvalidRank("collective over zero ranks");
    const int n = static_cast<int>(entries.size());
    if (spec.root < 0 || spec.root >= n) throw InvalidRank("collective root out of range");
    if (spec.duration_s < 0.0) throw InvalidTiming("collective duration must be >= 0");

    switch (spec.cls) {
        case CollectiveClass::Synchronizing: {
            double out = *std::max_element(entries.begin(), entries.end()) + spec.duration_s;
            return std::vector<double>(entries.size(), out);
        }
        case CollectiveClass::TreeReduce: {
            if (spec.fanout < 2) throw InvalidTiming("tree fanout must be >= 2");
            return tree_reduce_exits(spec, entries);
        }
        case CollectiveClass::TransparentGather: {
            std::vector<double> exits(entries.size());
            double root_exit = *std::max_element(entries.begin(), entries.end()) + spec.duration_s;
            for (size_t r = 0; r < entries.size(); ++r)
                exits[r] = static_cast<int>(r) == spec.root ? root_exit : entries[r] + spec.duration_s;
            return exits;
        }
    }
    throw std::logic_error("unreachable collective class");
}

CollectiveClass collective_class_for_reduce_algorithm(int algorithm) {
    switch (algorithm) {
        case 1:
            return CollectiveClass::Synchronizing;
        case 2:
        case 4:
        case 5:
        case 6:
        case 7:
            return CollectiveClass::TransparentGather;
        case 8:
        case 9:
        case 10:
        case 11:
            return CollectiveClass::TreeReduce;
        default:
            throw ConfigError("reduce algorithm " + std::to_string(algorithm) +
                              " has no dependency model (3 is topology-specific)");
    }
}

const char* collective_class_name(CollectiveClass c) {
    switch (c) {
        case CollectiveClass::Synchronizing: return "sync";
        case CollectiveClass::TreeReduce: return "tree_reduce";
        case CollectiveClass::TransparentGather: return "gather";
    }
    return "?";
}

}  // namespace idlewave
