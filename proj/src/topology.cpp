#include "idlewave/topology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace idlewave {

namespace {

int wrap_distance(int from, int to, int n, Boundary boundary) {
    if (boundary == Boundary::OpenChain) return to - from;
    int raw = ((to - from) % n + n) % n;
    return raw <= n / 2 ? raw : raw - n;  // ties at n/2 stay positive
}

void sort_edges(std::vector<Edge>& edges) {
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        int da = std::abs(a.distance), db = std::abs(b.distance);
        if (a.dim != b.dim) return a.dim < b.dim;
        if (da != db) return da < db;
        if (a.distance != b.distance) return a.distance > b.distance;  // +d before -d
        return a.partner < b.partner;
    });
}

}  // namespace

TopologyMatrix::TopologyMatrix(int num_ranks, Boundary boundary,
                               std::vector<std::vector<Edge>> out_edges)
    : num_ranks_(num_ranks), boundary_(boundary), out_(std::move(out_edges)) {
    if (num_ranks_ < 1) throw InvalidTopology("topology needs at least one rank");
    if (static_cast<int>(out_.size()) != num_ranks_)
        throw InvalidTopology("edge table size does not match num_ranks");

    in_.resize(num_ranks_);
    std::set<int> dist;
    for (int r = 0; r < num_ranks_; ++r) {
        for (const Edge& e : out_[r]) {
            if (e.partner == r) throw InvalidTopology("self-edge at rank " + std::to_string(r));
            if (e.partner < 0 || e.partner >= num_ranks_)
                throw InvalidTopology("edge partner out of range at rank " + std::to_string(r));
            dist.insert(std::abs(e.distance));
            // Incoming view keeps the *sender's* signed distance so matching
            // send/recv pairs land in same-key groups on both ranks.
            in_[e.partner].push_back(Edge{r, e.distance, e.dim, e.bytes});
        }
        sort_edges(out_[r]);
    }
    for (auto& v : in_) sort_edges(v);
    distances_.assign(dist.begin(), dist.end());
}

const std::vector<Edge>& TopologyMatrix::out_edges(int rank) const {
    if (rank < 0 || rank >= num_ranks_) throw InvalidRank("rank out of range");
    return out_[rank];
}

const std::vector<Edge>& TopologyMatrix::in_edges(int rank) const {
    if (rank < 0 || rank >= num_ranks_) throw InvalidRank("rank out of range");
    return in_[rank];
}

int TopologyMatrix::longest_distance() const {
    return distances_.empty() ? 0 : distances_.back();
}

bool TopologyMatrix::symmetric() const {
    for (int r = 0; r < num_ranks_; ++r) {
        for (const Edge& e : out_[r]) {
            const auto& back = out_[e.partner];
            bool found = std::any_of(back.begin(), back.end(),
                                     [&](const Edge& b) { return b.partner == r; });
            if (!found) return false;
        }
    }
    return true;
}

namespace {

// Shared chain-edge builder: one +d and one -d edge per rank per distance,
// clipped at the ends for OpenChain, wrapped for Periodic.
std::vector<std::vector<Edge>> chain_edges(int n, const std::vector<int>& distances,
                                           std::int64_t bytes, Boundary boundary) {
    std::vector<std::vector<Edge>> out(n);
    for (int r = 0; r < n; ++r) {
        for (int d : distances) {
            for (int sign : {+1, -1}) {
                int target = r + sign * d;
                if (boundary == Boundary::OpenChain) {
                    if (target < 0 || target >= n) continue;
                    out[r].push_back(Edge{target, sign * d, 0, bytes});
                } else {
                    int partner = ((target % n) + n) % n;
                    out[r].push_back(Edge{partner, sign * d, 0, bytes});
                }
            }
        }
    }
    return out;
}

void check_chain_distances(int n, const std::vector<int>& distances, Boundary boundary) {
    std::set<int> seen;
    for (int d : distances) {
        if (d < 1) throw InvalidTopology("chain distance must be positive, got " + std::to_string(d));
        if (d >= n) throw InvalidTopology("chain distance " + std::to_string(d) +
                                          " does not fit " + std::to_string(n) + " ranks");
        if (boundary == Boundary::Periodic && 2 * d > n)
            throw InvalidTopology("periodic distance " + std::to_string(d) +
                                  " exceeds half the ring (" + std::to_string(n) + " ranks)");
        if (!seen.insert(d).second)
            throw InvalidTopology("duplicate chain distance " + std::to_string(d));
    }
    if (distances.empty()) throw InvalidTopology("empty distance set");
}

}  // namespace

TopologyMatrix build_compact(int num_ranks, int j, std::int64_t message_bytes, Boundary boundary) {
    if (j < 1) throw InvalidTopology("compact radius j must be >= 1");
    std::vector<int> distances(j);
    for (int d = 1; d <= j; ++d) distances[d - 1] = d;
    check_chain_distances(num_ranks, distances, boundary);
    TopologyMatrix m(num_ranks, boundary, chain_edges(num_ranks, distances, message_bytes, boundary));
    m.family = TopologyMatrix::Family::Compact;
    return m;
}

TopologyMatrix build_noncompact(int num_ranks, const std::vector<int>& distance_set,
                                std::int64_t message_bytes, Boundary boundary) {
    check_chain_distances(num_ranks, distance_set, boundary);
    TopologyMatrix m(num_ranks, boundary,
                     chain_edges(num_ranks, distance_set, message_bytes, boundary));
    m.family = TopologyMatrix::Family::NonCompact;
    return m;
}

TopologyMatrix build_cartesian(int num_ranks, std::array<int, 3> dims, Stencil stencil,
                               const CartesianSizes& sizes) {
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    if (nx < 1 || ny < 1 || nz < 1) throw InvalidTopology("grid dims must be positive");
    if (nx * ny * nz != num_ranks)
        throw InvalidTopology("grid dims product " + std::to_string(nx * ny * nz) +
                              " does not match num_ranks " + std::to_string(num_ranks));

    std::int64_t min_face = *std::min_element(sizes.face_bytes.begin(), sizes.face_bytes.end());
    std::int64_t edge_b = sizes.edge_bytes.value_or(min_face);
    std::int64_t corner_b = sizes.corner_bytes.value_or(min_face);

    auto rank_of = [&](int x, int y, int z) { return x + nx * (y + ny * z); };
    std::vector<std::vector<Edge>> out(num_ranks);

    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                int r = rank_of(x, y, z);
                for (int oz = -1; oz <= 1; ++oz) {
                    for (int oy = -1; oy <= 1; ++oy) {
                        for (int ox = -1; ox <= 1; ++ox) {
                            int card = (ox != 0) + (oy != 0) + (oz != 0);
                            if (card == 0) continue;
                            if (stencil == Stencil::Faces7pt && card != 1) continue;
                            int X = x + ox, Y = y + oy, Z = z + oz;
                            if (X < 0 || X >= nx || Y < 0 || Y >= ny || Z < 0 || Z >= nz) continue;
                            // Dominant axis tags the dimension; for faces this
                            // is just the single nonzero offset axis.
                            int dim = oz != 0 ? 2 : (oy != 0 ? 1 : 0);
                            std::int64_t b = card == 1   ? sizes.face_bytes[static_cast<size_t>(dim)]
                                             : card == 2 ? edge_b
                                                         : corner_b;
                            out[r].push_back(Edge{rank_of(X, Y, Z), ox + nx * (oy + ny * oz), dim, b});
                        }
                    }
                }
            }
        }
    }
    TopologyMatrix m(num_ranks, Boundary::OpenChain, std::move(out));
    m.family = TopologyMatrix::Family::Cartesian;
    return m;
}

TopologyMatrix build_inhomogeneous(int num_ranks, const std::vector<Region>& regions,
                                   std::int64_t message_bytes) {
    if (regions.empty()) throw InvalidTopology("no regions given");
    int cursor = 0;
    for (const Region& reg : regions) {
        if (reg.lo != cursor)
            throw InvalidTopology("regions must tile [0, num_ranks) without gaps; got lo=" +
                                  std::to_string(reg.lo) + " expected " + std::to_string(cursor));
        if (reg.hi <= reg.lo) throw InvalidTopology("empty region");
        if (reg.j < 1) throw InvalidTopology("region radius must be >= 1");
        cursor = reg.hi;
    }
    if (cursor != num_ranks) throw InvalidTopology("regions do not cover all ranks");

    std::vector<int> reach(num_ranks);
    for (const Region& reg : regions)
        for (int r = reg.lo; r < reg.hi; ++r) reach[r] = reg.j;

    std::vector<std::vector<Edge>> out(num_ranks);
    for (int r = 0; r < num_ranks; ++r) {
        for (int d = 1; d <= reach[r]; ++d) {
            for (int sign : {+1, -1}) {
                int k = r + sign * d;
                if (k < 0 || k >= num_ranks) continue;
                if (d > reach[k]) continue;  // both reaches must cover the pair
                out[r].push_back(Edge{k, sign * d, 0, message_bytes});
            }
        }
    }
    TopologyMatrix m(num_ranks, Boundary::OpenChain, std::move(out));
    m.family = TopologyMatrix::Family::Inhomogeneous;
    m.regions = regions;
    return m;
}

TopologyMatrix build_explicit(int num_ranks, const std::vector<std::array<std::int64_t, 3>>& triples,
                              Boundary boundary) {
    std::vector<std::vector<Edge>> out(num_ranks);
    for (const auto& t : triples) {
        int src = static_cast<int>(t[0]), dst = static_cast<int>(t[1]);
        if (src < 0 || src >= num_ranks || dst < 0 || dst >= num_ranks)
            throw InvalidTopology("explicit edge rank out of range: " + std::to_string(src) + "->" +
                                  std::to_string(dst));
        out[src].push_back(Edge{dst, wrap_distance(src, dst, num_ranks, boundary), 0, t[2]});
    }
    return TopologyMatrix(num_ranks, boundary, std::move(out));
}

TopologyMatrix topology_from_csv(std::istream& in, int num_ranks, Boundary boundary) {
    std::vector<std::array<std::int64_t, 3>> triples;
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.find("src") != std::string::npos) continue;  // optional header row
        }
        std::array<std::int64_t, 3> t{};
        char c1 = 0, c2 = 0;
        std::istringstream row(line);
        if (!(row >> t[0] >> c1 >> t[1] >> c2 >> t[2]) || c1 != ',' || c2 != ',')
            throw IoError("malformed topology CSV at line " + std::to_string(lineno) + ": " + line);
        triples.push_back(t);
    }
    if (triples.empty()) throw IoError("topology CSV contains no edges");
    return build_explicit(num_ranks, triples, boundary);
}

TopologyMatrix topology_from_csv_file(const std::string& path, int num_ranks, Boundary boundary) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open topology CSV: " + path);
    return topology_from_csv(f, num_ranks, boundary);
}

}  // namespace idlewave
