#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idlewave/error.hpp"

namespace idlewave {

enum class Boundary { OpenChain, Periodic };

enum class Stencil { Faces7pt, Full27pt };

// One directed message per iteration: the owning rank sends to `partner`.
// `distance` is the signed rank distance the data travels (partner - owner,
// shortest signed ring distance under Periodic). `dim` groups distances into
// stencil dimensions; chain generators put everything into dim 0, Cartesian
// generators tag the dominant axis.
struct Edge {
    int partner = 0;
    int distance = 0;
    int dim = 0;
    std::int64_t bytes = 0;
};

struct Region {
    int lo = 0;  // inclusive
    int hi = 0;  // exclusive
    int j = 0;   // neighborhood radius inside the region

    friend bool operator==(const Region&, const Region&) = default;
};

// Directed adjacency with per-rank outgoing edges, sorted by (dim, |d|, sign).
// All generators except Explicit produce symmetric matrices: edge (i->k) exists
// iff (k->i) exists.
class TopologyMatrix {
public:
    // Single isolated rank; configs default-construct before the real build.
    TopologyMatrix() : TopologyMatrix(1, Boundary::OpenChain, {{}}) {}
    TopologyMatrix(int num_ranks, Boundary boundary, std::vector<std::vector<Edge>> out_edges);

    int num_ranks() const { return num_ranks_; }
    Boundary boundary() const { return boundary_; }
    const std::vector<Edge>& out_edges(int rank) const;
    const std::vector<Edge>& in_edges(int rank) const;  // transpose view, same sort order

    // Distinct |distance| values over all edges, ascending.
    const std::vector<int>& distances() const { return distances_; }
    int longest_distance() const;  // max |distance|; 0 when edgeless

    bool symmetric() const;

    // Optional structured metadata set by the generators (used by the model).
    enum class Family { Compact, NonCompact, Cartesian, Inhomogeneous, Explicit };
    Family family = Family::Explicit;
    std::vector<Region> regions;  // Inhomogeneous only

private:
    int num_ranks_;
    Boundary boundary_;
    std::vector<std::vector<Edge>> out_;
    std::vector<std::vector<Edge>> in_;
    std::vector<int> distances_;
};

// Chain with every distance 1..j. Requires 1 <= j < num_ranks (and 2j <= N for
// Periodic so signed ring distances stay canonical).
TopologyMatrix build_compact(int num_ranks, int j, std::int64_t message_bytes, Boundary boundary);

// Chain with an explicit set of distinct positive distances.
TopologyMatrix build_noncompact(int num_ranks, const std::vector<int>& distance_set,
                                std::int64_t message_bytes, Boundary boundary);

// Message sizes for Cartesian stencils. face_bytes applies per axis; edge/corner
// apply to 27pt diagonal neighbors with 2 resp. 3 nonzero offsets and default to
// the smallest face size.
struct CartesianSizes {
    std::array<std::int64_t, 3> face_bytes{0, 0, 0};
    std::optional<std::int64_t> edge_bytes;
    std::optional<std::int64_t> corner_bytes;

    CartesianSizes() = default;
    explicit CartesianSizes(std::array<std::int64_t, 3> faces) : face_bytes(faces) {}

    friend bool operator==(const CartesianSizes&, const CartesianSizes&) = default;
};

// Grid dims (nx, ny, nz); rank = x + nx*(y + ny*z), inner dimension first.
// Open boundaries in every grid dimension.
TopologyMatrix build_cartesian(int num_ranks, std::array<int, 3> dims, Stencil stencil,
                               const CartesianSizes& sizes);

// Chain with per-region radius. An edge i<->k exists iff |i-k| is within BOTH
// endpoints' regional reach, which keeps the matrix symmetric at region borders.
// OpenChain only; regions must cover [0, num_ranks) without gaps or overlap.
TopologyMatrix build_inhomogeneous(int num_ranks, const std::vector<Region>& regions,
                                   std::int64_t message_bytes);

// Directed triples (src, dst, bytes). Distance derived from the boundary.
TopologyMatrix build_explicit(int num_ranks, const std::vector<std::array<std::int64_t, 3>>& triples,
                              Boundary boundary);

// CSV with header "src,dst,bytes"; '#' comment lines allowed.
TopologyMatrix topology_from_csv(std::istream& in, int num_ranks, Boundary boundary);
TopologyMatrix topology_from_csv_file(const std::string& path, int num_ranks, Boundary boundary);

}  // namespace idlewave
