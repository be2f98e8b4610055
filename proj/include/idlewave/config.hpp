#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idlewave/simulator.hpp"

namespace idlewave {

// Declarative topology description; kept alongside the built matrix so configs
// serialize back to what the user wrote, not to an edge dump.
struct TopologySpec {
    enum class Kind { Compact, NonCompact, Cartesian, Inhomogeneous, Explicit, CsvFile };

    Kind kind = Kind::Compact;
    int num_ranks = 0;   // ignored for Cartesian (product of dims)
    int j = 1;           // Compact
    std::vector<int> distances;                      // NonCompact
    std::array<int, 3> dims{1, 1, 1};                // Cartesian
    Stencil stencil = Stencil::Faces7pt;             // Cartesian
    CartesianSizes sizes;                            // Cartesian
    std::vector<Region> regions;                     // Inhomogeneous
    std::vector<std::array<std::int64_t, 3>> edges;  // Explicit (src, dst, bytes)
    std::string csv_path;                            // CsvFile
    std::int64_t message_bytes = 8;                  // chain generators
    Boundary boundary = Boundary::OpenChain;

    int rank_count() const;
    TopologyMatrix build() const;

    friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

struct OutputSpec {
    std::string dir = "out";
    std::vector<std::string> formats{"csv", "json"};

    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ExperimentConfig {
    TopologySpec topology;
    ConcurrencyScheme scheme = ConcurrencyScheme::MWSDim;
    double t_exec_s = 0.0;
    CommCostModel comm;
    Protocol protocol = Protocol::Eager;
    std::int64_t eager_limit_bytes = 16384;
    std::vector<DelayInjection> delays;
    std::optional<NoiseSpec> noise;
    // When set, the runner rescales the noise parameters so the realized power
    // hits this percentage of the silent runtime before simulating.
    std::optional<double> noise_power_percent;
    std::vector<CollectiveSpec> collectives;
    int iterations = 1;
    std::uint64_t seed = 0;
    OutputSpec output;

    // Builds the topology and packs everything the engines need. Noise power
    // calibration is the runner's job (it needs the silent totals).
    SimConfig to_sim() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Strict parse: unknown keys, wrong types, and out-of-range references are
// ConfigErrors naming the offending path (e.g. "delays[2].rank").
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Canonical form: sorted keys, 2-space indent, round-trip exact numbers.
// parse(serialize(parse(x))) == parse(x) for every valid x.
std::string serialize_config(const ExperimentConfig& config);

// Content hash of the exact bytes, git blob style: sha1("blob <len>\0" bytes).
std::string config_content_hash(const std::string& bytes);

}  // namespace idlewave
