#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idlewave/analysis.hpp"
#include "idlewave/config.hpp"
#include "idlewave/model.hpp"
#include "json.hpp"

namespace idlewave {

// Config resolved for execution: topology built, noise calibrated to the
// requested power against the silent totals. The hash covers the canonical
// serialization of the config as parsed, not the calibrated derivative.
struct PreparedRun {
    ExperimentConfig config;
    SimConfig sim;
    std::string config_hash;
    std::optional<NoiseSpec> calibrated_noise;  // set when power calibration ran
};

PreparedRun prepare(const ExperimentConfig& config);

struct AnalysisOptions {
    std::optional<double> threshold_s;       // default: 3x p95 silent-baseline wait
    std::optional<int> discard_prefix;       // default: ceil(j/2) + 1
    std::optional<FrontDirection> direction; // default: the side with more room
    SlopeEstimator estimator = SlopeEstimator::LeastSquares;
};

// Front detection + speed + decay in one pass. The injection rank's regional
// reach decides the default transient discard.
WaveMetrics analyze_timeline(const SimConfig& sim, const Timeline& timeline, int injection_rank,
                             const AnalysisOptions& opts = {});

struct SimulateResult {
    PreparedRun run;
    Timeline timeline;
    std::vector<std::string> files_written;
};

// Simulates and persists timeline.csv / timeline.json (per output.formats)
// plus meta.json into config.output.dir. reference_engine swaps in the serial
// dependency-graph engine (same timelines, bit for bit).
SimulateResult run_simulate(const ExperimentConfig& config, bool reference_engine = false);

struct CompareReport {
    Prediction prediction;
    std::optional<WaveMetrics> metrics;
    double deviation = 0.0;  // |measured speed / predicted speed - 1|
    bool pass = false;
    bool compared = false;   // false when skipped (annihilation, noisy run)
    bool annihilated = false;
    std::string note;
    double realized_noise_power = 0.0;
    std::string config_hash;
};

// Runs the config, measures the wave, and checks measured vs predicted speed
// at 5 percent. Synchronizing collectives that swallow the wave downgrade the
// comparison to a note instead of an error; noisy configs report metrics but
// are not held to the silent-model tolerance.
CompareReport run_compare(const ExperimentConfig& config, const AnalysisOptions& opts = {});

nlohmann::json prediction_json(const Prediction& p);
nlohmann::json compare_report_json(const CompareReport& report);
std::string compare_report_table(const CompareReport& report);

struct SweepCell {
    std::size_t index = 0;
    std::string key;  // "noise.family=shot;noise.power_percent=2"
    std::optional<CompareReport> report;
    std::string error;  // nonempty when the cell failed to run
};

struct SweepResult {
    std::vector<SweepCell> cells;
    int failures = 0;  // failed comparisons plus errored cells
    std::string out_dir;
};

// Sweep document: {"base": <config>, "axes": [{"path": "noise.power_percent",
// "values": [...]}, ...], "out_dir": "..."}. Cells are the cross product in
// axis-major order; each cell patches the base document at the dotted path.
// Cells run concurrently (IDLEWAVE_THREADS caps the width) and their errors
// are recorded, not thrown. Writes cells/cell_<i>.json and aggregate.csv.
SweepResult run_sweep(const std::string& sweep_json_text, const std::string& out_dir_override);
SweepResult run_sweep_file(const std::string& path, const std::string& out_dir_override);

int sweep_thread_cap();  // IDLEWAVE_THREADS, else OpenMP's default

}  // namespace idlewave
