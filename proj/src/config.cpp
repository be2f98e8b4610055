#include "idlewave/config.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "idlewave/error.hpp"
#include "json.hpp"

namespace idlewave {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known) fail(path + "." + item.key(), "unknown key");
    }
}

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) fail(path + "." + key, "missing");
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

double number_at(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

double require_number(const json& obj, const char* key, const std::string& path) {
    return number_at(require(obj, key, path), path + "." + key);
}

std::int64_t integer_at(const json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
}

std::int64_t require_integer(const json& obj, const char* key, const std::string& path) {
    return integer_at(require(obj, key, path), path + "." + key);
}

std::int64_t optional_integer(const json& obj, const char* key, const std::string& path,
                              std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    return integer_at(obj.at(key), path + "." + key);
}

double optional_number(const json& obj, const char* key, const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    return number_at(obj.at(key), path + "." + key);
}

int rank_index(const json& obj, const char* key, const std::string& path, int num_ranks) {
    std::int64_t r = require_integer(obj, key, path);
    if (r < 0 || r >= num_ranks)
        fail(path + "." + key, "rank " + std::to_string(r) + " outside [0, " +
                                   std::to_string(num_ranks) + ")");
    return int(r);
}

template <typename T>
T token(const json& v, const std::string& path,
        std::initializer_list<std::pair<const char*, T>> names) {
    if (!v.is_string()) fail(path, "expected a string");
    std::string s = v.get<std::string>();
    for (const auto& [name, val] : names)
        if (s == name) return val;
    std::string known;
    for (const auto& [name, val] : names) {
        if (!known.empty()) known += ", ";
        known += name;
    }
    fail(path, "unknown value '" + s + "' (one of: " + known + ")");
}

Boundary boundary_at(const json& obj, const std::string& path) {
    if (!obj.contains("boundary")) return Boundary::OpenChain;
    return token<Boundary>(obj.at("boundary"), path + ".boundary",
                           {{"open", Boundary::OpenChain}, {"periodic", Boundary::Periodic}});
}

const char* boundary_token(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "open";
}

TopologySpec parse_topology(const json& t, const std::string& path) {
    if (!t.is_object()) fail(path, "expected an object");
    TopologySpec spec;
    spec.kind = token<TopologySpec::Kind>(require(t, "kind", path), path + ".kind",
                                          {{"compact", TopologySpec::Kind::Compact},
                                           {"noncompact", TopologySpec::Kind::NonCompact},
                                           {"cartesian", TopologySpec::Kind::Cartesian},
                                           {"inhomogeneous", TopologySpec::Kind::Inhomogeneous},
                                           {"explicit", TopologySpec::Kind::Explicit},
                                           {"csv", TopologySpec::Kind::CsvFile}});
    auto num_ranks = [&] {
        std::int64_t n = require_integer(t, "num_ranks", path);
        if (n < 1) fail(path + ".num_ranks", "must be at least 1");
        spec.num_ranks = int(n);
    };
    auto message_bytes = [&] {
        spec.message_bytes = optional_integer(t, "message_bytes", path, 8);
        if (spec.message_bytes < 0) fail(path + ".message_bytes", "must be non-negative");
    };
    switch (spec.kind) {
        case TopologySpec::Kind::Compact: {
            check_keys(t, path, {"kind", "num_ranks", "j", "message_bytes", "boundary"});
            num_ranks();
            std::int64_t j = require_integer(t, "j", path);
            if (j < 1) fail(path + ".j", "must be at least 1");
            spec.j = int(j);
            message_bytes();
            spec.boundary = boundary_at(t, path);
            break;
        }
        case TopologySpec::Kind::NonCompact: {
            check_keys(t, path, {"kind", "num_ranks", "distances", "message_bytes", "boundary"});
            num_ranks();
            const json& d = require(t, "distances", path);
            if (!d.is_array() || d.empty()) fail(path + ".distances", "expected a non-empty array");
            for (std::size_t i = 0; i < d.size(); ++i)
                spec.distances.push_back(
                    int(integer_at(d[i], path + ".distances[" + std::to_string(i) + "]")));
            message_bytes();
            spec.boundary = boundary_at(t, path);
            break;
        }
        case TopologySpec::Kind::Cartesian: {
            check_keys(t, path,
                       {"kind", "dims", "stencil", "face_bytes", "edge_bytes", "corner_bytes"});
            const json& dims = require(t, "dims", path);
            if (!dims.is_array() || dims.size() != 3) fail(path + ".dims", "expected 3 integers");
            for (int i = 0; i < 3; ++i) {
                std::int64_t v = integer_at(dims[std::size_t(i)],
                                            path + ".dims[" + std::to_string(i) + "]");
                if (v < 1) fail(path + ".dims[" + std::to_string(i) + "]", "must be at least 1");
                spec.dims[std::size_t(i)] = int(v);
            }
            spec.stencil = token<Stencil>(require(t, "stencil", path), path + ".stencil",
                                          {{"faces7", Stencil::Faces7pt},
                                           {"full27", Stencil::Full27pt}});
            const json& fb = require(t, "face_bytes", path);
            if (fb.is_array()) {
                if (fb.size() != 3) fail(path + ".face_bytes", "expected 3 integers");
                for (int i = 0; i < 3; ++i)
                    spec.sizes.face_bytes[std::size_t(i)] =
                        integer_at(fb[std::size_t(i)], path + ".face_bytes[" + std::to_string(i) + "]");
            } else {
                std::int64_t b = integer_at(fb, path + ".face_bytes");
                spec.sizes.face_bytes = {b, b, b};
            }
            if (t.contains("edge_bytes"))
                spec.sizes.edge_bytes = integer_at(t.at("edge_bytes"), path + ".edge_bytes");
            if (t.contains("corner_bytes"))
                spec.sizes.corner_bytes = integer_at(t.at("corner_bytes"), path + ".corner_bytes");
            spec.num_ranks = spec.dims[0] * spec.dims[1] * spec.dims[2];
            break;
        }
        case TopologySpec::Kind::Inhomogeneous: {
            check_keys(t, path, {"kind", "num_ranks", "regions", "message_bytes"});
            num_ranks();
            const json& regions = require(t, "regions", path);
            if (!regions.is_array() || regions.empty())
                fail(path + ".regions", "expected a non-empty array");
            for (std::size_t i = 0; i < regions.size(); ++i) {
                std::string rp = path + ".regions[" + std::to_string(i) + "]";
                const json& reg = regions[i];
                if (!reg.is_object()) fail(rp, "expected an object");
                check_keys(reg, rp, {"lo", "hi", "j"});
                Region r;
                r.lo = int(require_integer(reg, "lo", rp));
                r.hi = int(require_integer(reg, "hi", rp));
                r.j = int(require_integer(reg, "j", rp));
                spec.regions.push_back(r);
            }
            message_bytes();
            break;
        }
        case TopologySpec::Kind::Explicit: {
            check_keys(t, path, {"kind", "num_ranks", "edges", "boundary"});
            num_ranks();
            const json& edges = require(t, "edges", path);
            if (!edges.is_array()) fail(path + ".edges", "expected an array");
            for (std::size_t i = 0; i < edges.size(); ++i) {
                std::string ep = path + ".edges[" + std::to_string(i) + "]";
                const json& e = edges[i];
                if (!e.is_array() || e.size() != 3) fail(ep, "expected [src, dst, bytes]");
                spec.edges.push_back({integer_at(e[0], ep + "[0]"), integer_at(e[1], ep + "[1]"),
                                      integer_at(e[2], ep + "[2]")});
            }
            spec.boundary = boundary_at(t, path);
            break;
        }
        case TopologySpec::Kind::CsvFile: {
            check_keys(t, path, {"kind", "num_ranks", "path", "boundary"});
            num_ranks();
            spec.csv_path = require_string(t, "path", path);
            spec.boundary = boundary_at(t, path);
            break;
        }
    }
    return spec;
}

json topology_json(const TopologySpec& spec) {
    json t;
    switch (spec.kind) {
        case TopologySpec::Kind::Compact:
            t["kind"] = "compact";
            t["num_ranks"] = spec.num_ranks;
            t["j"] = spec.j;
            t["message_bytes"] = spec.message_bytes;
            t["boundary"] = boundary_token(spec.boundary);
            break;
        case TopologySpec::Kind::NonCompact:
            t["kind"] = "noncompact";
            t["num_ranks"] = spec.num_ranks;
            t["distances"] = spec.distances;
            t["message_bytes"] = spec.message_bytes;
            t["boundary"] = boundary_token(spec.boundary);
            break;
        case TopologySpec::Kind::Cartesian:
            t["kind"] = "cartesian";
            t["dims"] = spec.dims;
            t["stencil"] = spec.stencil == Stencil::Full27pt ? "full27" : "faces7";
            t["face_bytes"] = spec.sizes.face_bytes;
            if (spec.sizes.edge_bytes) t["edge_bytes"] = *spec.sizes.edge_bytes;
            if (spec.sizes.corner_bytes) t["corner_bytes"] = *spec.sizes.corner_bytes;
            break;
        case TopologySpec::Kind::Inhomogeneous: {
            t["kind"] = "inhomogeneous";
            t["num_ranks"] = spec.num_ranks;
            json regions = json::array();
            for (const Region& r : spec.regions)
                regions.push_back({{"lo", r.lo}, {"hi", r.hi}, {"j", r.j}});
            t["regions"] = regions;
            t["message_bytes"] = spec.message_bytes;
            break;
        }
        case TopologySpec::Kind::Explicit: {
            t["kind"] = "explicit";
            t["num_ranks"] = spec.num_ranks;
            json edges = json::array();
            for (const auto& e : spec.edges) edges.push_back(e);
            t["edges"] = edges;
            t["boundary"] = boundary_token(spec.boundary);
            break;
        }
        case TopologySpec::Kind::CsvFile:
            t["kind"] = "csv";
            t["num_ranks"] = spec.num_ranks;
            t["path"] = spec.csv_path;
            t["boundary"] = boundary_token(spec.boundary);
            break;
    }
    return t;
}

// SHA-1, needed for git-style blob hashes of config bytes. Classic block
// implementation, verified against the usual test vectors in the test suite.
struct Sha1 {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
    unsigned char block[64];
    std::size_t block_len = 0;
    std::uint64_t total_bits = 0;

    static std::uint32_t rol(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

    void process() {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        block_len = 0;
    }

    void update(const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        total_bits += std::uint64_t(len) * 8;
        while (len > 0) {
            std::size_t take = std::min(len, 64 - block_len);
            std::memcpy(block + block_len, p, take);
            block_len += take;
            p += take;
            len -= take;
            if (block_len == 64) process();
        }
    }

    std::string hex_digest() {
        std::uint64_t bits = total_bits;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (block_len != 56) update(&zero, 1);
        unsigned char len_be[8];
        for (int i = 0; i < 8; ++i) len_be[i] = (unsigned char)(bits >> (56 - 8 * i));
        update(len_be, 8);
        char out[41];
        for (int i = 0; i < 5; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 40);
    }
};

}  // namespace

int TopologySpec::rank_count() const {
    if (kind == Kind::Cartesian) return dims[0] * dims[1] * dims[2];
    return num_ranks;
}

TopologyMatrix TopologySpec::build() const {
    switch (kind) {
        case Kind::Compact: return build_compact(num_ranks, j, message_bytes, boundary);
        case Kind::NonCompact:
            return build_noncompact(num_ranks, distances, message_bytes, boundary);
        case Kind::Cartesian: return build_cartesian(rank_count(), dims, stencil, sizes);
        case Kind::Inhomogeneous: return build_inhomogeneous(num_ranks, regions, message_bytes);
        case Kind::Explicit: return build_explicit(num_ranks, edges, boundary);
        case Kind::CsvFile: return topology_from_csv_file(csv_path, num_ranks, boundary);
    }
    throw ConfigError("topology.kind: corrupt value");
}

SimConfig ExperimentConfig::to_sim() const {
    SimConfig sim;
    sim.topology = topology.build();
    sim.scheme = scheme;
    sim.t_exec_s = t_exec_s;
    sim.comm = comm;
    sim.protocol = protocol;
    sim.eager_limit_bytes = eager_limit_bytes;
    sim.delays = delays;
    sim.noise = noise;
    sim.collectives = collectives;
    sim.iterations = iterations;
    sim.seed = seed;
    return sim;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(doc, "config",
               {"topology", "concurrency", "timing", "protocol", "delays", "noise", "collectives",
                "iterations", "seed", "output"});

    ExperimentConfig cfg;
    cfg.topology = parse_topology(require(doc, "topology", "config"), "topology");
    int num_ranks = cfg.topology.rank_count();

    cfg.scheme = token<ConcurrencyScheme>(require(doc, "concurrency", "config"), "concurrency",
                                          {{"mwsdim", ConcurrencyScheme::MWSDim},
                                           {"mwmdim", ConcurrencyScheme::MWMDim},
                                           {"swmdim", ConcurrencyScheme::SWMDim},
                                           {"mwsdir", ConcurrencyScheme::MWSDir},
                                           {"blocking", ConcurrencyScheme::BlockingSendrecv}});

    const json& timing = require(doc, "timing", "config");
    if (!timing.is_object()) fail("timing", "expected an object");
    check_keys(timing, "timing", {"t_exec_s", "comm_cost_s", "domain_cost", "per_edge_costs"});
    cfg.t_exec_s = require_number(timing, "t_exec_s", "timing");
    if (cfg.t_exec_s < 0.0) fail("timing.t_exec_s", "must be non-negative");
    bool any_cost = false;
    if (timing.contains("comm_cost_s")) {
        cfg.comm.uniform_s = number_at(timing.at("comm_cost_s"), "timing.comm_cost_s");
        if (cfg.comm.uniform_s < 0.0) fail("timing.comm_cost_s", "must be non-negative");
        any_cost = true;
    }
    if (timing.contains("domain_cost")) {
        const json& d = timing.at("domain_cost");
        if (!d.is_object()) fail("timing.domain_cost", "expected an object");
        check_keys(d, "timing.domain_cost", {"domain_size", "intra_s", "cross_s"});
        CommCostModel::DomainRule rule;
        std::int64_t m = require_integer(d, "domain_size", "timing.domain_cost");
        if (m < 1) fail("timing.domain_cost.domain_size", "must be at least 1");
        rule.domain_size = int(m);
        rule.intra_s = require_number(d, "intra_s", "timing.domain_cost");
        rule.cross_s = require_number(d, "cross_s", "timing.domain_cost");
        if (rule.intra_s < 0.0 || rule.cross_s < 0.0)
            fail("timing.domain_cost", "costs must be non-negative");
        cfg.comm.domain = rule;
        any_cost = true;
    }
    if (timing.contains("per_edge_costs")) {
        const json& arr = timing.at("per_edge_costs");
        if (!arr.is_array()) fail("timing.per_edge_costs", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string ep = "timing.per_edge_costs[" + std::to_string(i) + "]";
            const json& e = arr[i];
            if (!e.is_object()) fail(ep, "expected an object");
            check_keys(e, ep, {"src", "dst", "cost_s"});
            CommCostModel::Override ov;
            ov.src = rank_index(e, "src", ep, num_ranks);
            ov.dst = rank_index(e, "dst", ep, num_ranks);
            ov.cost_s = require_number(e, "cost_s", ep);
            if (ov.cost_s < 0.0) fail(ep + ".cost_s", "must be non-negative");
            cfg.comm.overrides.push_back(ov);
        }
        any_cost = true;
    }
    if (!any_cost) fail("timing", "needs comm_cost_s, domain_cost, or per_edge_costs");

    if (doc.contains("protocol")) {
        const json& p = doc.at("protocol");
        if (!p.is_object()) fail("protocol", "expected an object");
        check_keys(p, "protocol", {"kind", "eager_limit_bytes"});
        cfg.protocol = token<Protocol>(require(p, "kind", "protocol"), "protocol.kind",
                                       {{"eager", Protocol::Eager},
                                        {"rendezvous", Protocol::Rendezvous},
                                        {"auto", Protocol::AutoByEagerLimit}});
        cfg.eager_limit_bytes = optional_integer(p, "eager_limit_bytes", "protocol", 16384);
        if (cfg.eager_limit_bytes < 0) fail("protocol.eager_limit_bytes", "must be non-negative");
    }

    std::int64_t iters = optional_integer(doc, "iterations", "config", 1);
    if (iters < 1) fail("iterations", "must be at least 1");
    cfg.iterations = int(iters);

    std::int64_t seed = optional_integer(doc, "seed", "config", 0);
    if (seed < 0) fail("seed", "must be non-negative");
    cfg.seed = std::uint64_t(seed);

    if (doc.contains("delays")) {
        const json& arr = doc.at("delays");
        if (!arr.is_array()) fail("delays", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string dp = "delays[" + std::to_string(i) + "]";
            const json& d = arr[i];
            if (!d.is_object()) fail(dp, "expected an object");
            check_keys(d, dp, {"rank", "iteration", "seconds"});
            DelayInjection inj;
            inj.rank = rank_index(d, "rank", dp, num_ranks);
            inj.iteration = int(require_integer(d, "iteration", dp));
            if (inj.iteration < 0 || inj.iteration >= cfg.iterations)
                fail(dp + ".iteration", "outside [0, iterations)");
            inj.extra_seconds = require_number(d, "seconds", dp);
            if (inj.extra_seconds < 0.0) fail(dp + ".seconds", "must be non-negative");
            cfg.delays.push_back(inj);
        }
    }

    if (doc.contains("noise")) {
        const json& nz = doc.at("noise");
        if (!nz.is_object()) fail("noise", "expected an object");
        check_keys(nz, "noise",
                   {"family", "seed", "amplitude_s", "occurrence_prob", "mean_s", "lo_s", "hi_s",
                    "power_percent"});
        NoiseSpec spec;
        spec.family = token<NoiseFamily>(require(nz, "family", "noise"), "noise.family",
                                         {{"shot", NoiseFamily::Shot},
                                          {"exponential", NoiseFamily::Exponential},
                                          {"uniform", NoiseFamily::Uniform}});
        std::int64_t nseed = optional_integer(nz, "seed", "noise", std::int64_t(cfg.seed));
        if (nseed < 0) fail("noise.seed", "must be non-negative");
        spec.seed = std::uint64_t(nseed);
        spec.amplitude_s = optional_number(nz, "amplitude_s", "noise", spec.amplitude_s);
        spec.occurrence_prob = optional_number(nz, "occurrence_prob", "noise", spec.occurrence_prob);
        spec.mean_s = optional_number(nz, "mean_s", "noise", spec.mean_s);
        spec.lo_s = optional_number(nz, "lo_s", "noise", spec.lo_s);
        spec.hi_s = optional_number(nz, "hi_s", "noise", spec.hi_s);
        if (spec.amplitude_s < 0.0) fail("noise.amplitude_s", "must be non-negative");
        if (spec.occurrence_prob < 0.0 || spec.occurrence_prob > 1.0)
            fail("noise.occurrence_prob", "must be within [0, 1]");
        if (spec.mean_s < 0.0) fail("noise.mean_s", "must be non-negative");
        if (spec.lo_s < 0.0 || spec.hi_s < spec.lo_s)
            fail("noise", "needs 0 <= lo_s <= hi_s");
        cfg.noise = spec;
        if (nz.contains("power_percent")) {
            double p = number_at(nz.at("power_percent"), "noise.power_percent");
            if (p < 0.0 || p >= 100.0) fail("noise.power_percent", "must be within [0, 100)");
            cfg.noise_power_percent = p;
        }
    }

    if (doc.contains("collectives")) {
        const json& arr = doc.at("collectives");
        if (!arr.is_array()) fail("collectives", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string cp = "collectives[" + std::to_string(i) + "]";
            const json& c = arr[i];
            if (!c.is_object()) fail(cp, "expected an object");
            check_keys(c, cp, {"class", "reduce_algorithm", "iteration", "root", "fanout",
                               "duration_s"});
            CollectiveSpec spec;
            if (c.contains("reduce_algorithm")) {
                if (c.contains("class")) fail(cp, "give class or reduce_algorithm, not both");
                std::int64_t alg = integer_at(c.at("reduce_algorithm"), cp + ".reduce_algorithm");
                try {
                    spec.cls = collective_class_for_reduce_algorithm(int(alg));
                } catch (const ConfigError& e) {
                    fail(cp + ".reduce_algorithm", e.what());
                }
            } else {
                spec.cls = token<CollectiveClass>(require(c, "class", cp), cp + ".class",
                                                  {{"sync", CollectiveClass::Synchronizing},
                                                   {"tree_reduce", CollectiveClass::TreeReduce},
                                                   {"gather", CollectiveClass::TransparentGather}});
            }
            spec.iteration = int(require_integer(c, "iteration", cp));
            if (spec.iteration < 0 || spec.iteration >= cfg.iterations)
                fail(cp + ".iteration", "outside [0, iterations)");
            if (c.contains("root")) spec.root = rank_index(c, "root", cp, num_ranks);
            std::int64_t fanout = optional_integer(c, "fanout", cp, 2);
            if (fanout < 2) fail(cp + ".fanout", "must be at least 2");
            spec.fanout = int(fanout);
            spec.duration_s = optional_number(c, "duration_s", cp, 0.0);
            if (spec.duration_s < 0.0) fail(cp + ".duration_s", "must be non-negative");
            cfg.collectives.push_back(spec);
        }
    }

    if (doc.contains("output")) {
        const json& o = doc.at("output");
        if (!o.is_object()) fail("output", "expected an object");
        check_keys(o, "output", {"dir", "formats"});
        if (o.contains("dir")) {
            if (!o.at("dir").is_string()) fail("output.dir", "expected a string");
            cfg.output.dir = o.at("dir").get<std::string>();
        }
        if (o.contains("formats")) {
            const json& f = o.at("formats");
            if (!f.is_array()) fail("output.formats", "expected an array");
            cfg.output.formats.clear();
            for (std::size_t i = 0; i < f.size(); ++i) {
                std::string fp = "output.formats[" + std::to_string(i) + "]";
                if (!f[i].is_string()) fail(fp, "expected a string");
                std::string fmt = f[i].get<std::string>();
                if (fmt != "csv" && fmt != "json") fail(fp, "unknown format '" + fmt + "'");
                cfg.output.formats.push_back(fmt);
            }
        }
    }

    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json doc;
    doc["topology"] = topology_json(cfg.topology);
    doc["concurrency"] = scheme_name(cfg.scheme);

    json timing;
    timing["t_exec_s"] = cfg.t_exec_s;
    timing["comm_cost_s"] = cfg.comm.uniform_s;
    if (cfg.comm.domain) {
        timing["domain_cost"] = {{"domain_size", cfg.comm.domain->domain_size},
                                 {"intra_s", cfg.comm.domain->intra_s},
                                 {"cross_s", cfg.comm.domain->cross_s}};
    }
    if (!cfg.comm.overrides.empty()) {
        json arr = json::array();
        for (const auto& ov : cfg.comm.overrides)
            arr.push_back({{"src", ov.src}, {"dst", ov.dst}, {"cost_s", ov.cost_s}});
        timing["per_edge_costs"] = arr;
    }
    doc["timing"] = timing;

    doc["protocol"] = {{"kind", protocol_name(cfg.protocol)},
                       {"eager_limit_bytes", cfg.eager_limit_bytes}};

    json delays = json::array();
    for (const auto& d : cfg.delays)
        delays.push_back(
            {{"rank", d.rank}, {"iteration", d.iteration}, {"seconds", d.extra_seconds}});
    doc["delays"] = delays;

    if (cfg.noise) {
        json nz;
        nz["family"] = noise_family_name(cfg.noise->family);
        nz["seed"] = cfg.noise->seed;
        nz["amplitude_s"] = cfg.noise->amplitude_s;
        nz["occurrence_prob"] = cfg.noise->occurrence_prob;
        nz["mean_s"] = cfg.noise->mean_s;
        nz["lo_s"] = cfg.noise->lo_s;
        nz["hi_s"] = cfg.noise->hi_s;
        if (cfg.noise_power_percent) nz["power_percent"] = *cfg.noise_power_percent;
        doc["noise"] = nz;
    }

    json collectives = json::array();
    for (const auto& c : cfg.collectives)
        collectives.push_back({{"class", collective_class_name(c.cls)},
                               {"iteration", c.iteration},
                               {"root", c.root},
                               {"fanout", c.fanout},
                               {"duration_s", c.duration_s}});
    doc["collectives"] = collectives;

    doc["iterations"] = cfg.iterations;
    doc["seed"] = cfg.seed;
    doc["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};

    return doc.dump(2) + "\n";
}

std::string config_content_hash(const std::string& bytes) {
    std::string header = "blob " + std::to_string(bytes.size());
    Sha1 sha;
    sha.update(header.data(), header.size() + 1);  // include the trailing NUL
    sha.update(bytes.data(), bytes.size());
    return sha.hex_digest();
}

}  // namespace idlewave
