#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "idlewave/error.hpp"
#include "idlewave/runner.hpp"
#include "idlewave/trace_io.hpp"

namespace {

using namespace idlewave;

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    if (cfg.noise) cfg.noise->seed = seed;
}

FrontDirection parse_direction(const std::string& s) {
    if (s == "up") return FrontDirection::Up;
    if (s == "down") return FrontDirection::Down;
    throw ConfigError("--direction: expected up or down");
}

SlopeEstimator parse_estimator(const std::string& s) {
    if (s == "ls") return SlopeEstimator::LeastSquares;
    if (s == "theil-sen") return SlopeEstimator::TheilSen;
    throw ConfigError("--estimator: expected ls or theil-sen");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"idlewave: simulate idle-wave propagation in bulk-synchronous programs\n"
                 "and check it against the analytic speed model"};
    app.require_subcommand(1);
    app.fallthrough();

    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "suppress stdout reports");
    std::uint64_t seed = 0;
    CLI::Option* seed_opt =
        app.add_option("--seed", seed, "override the config seed (and the noise seed)");

    std::string sim_config, sim_out, sim_engine = "lockstep";
    CLI::App* sim = app.add_subcommand("simulate", "run a config and write the timeline");
    sim->add_option("config", sim_config, "experiment config (json)")
        ->required()
        ->check(CLI::ExistingFile);
    sim->add_option("--out", sim_out, "output directory (overrides output.dir)");
    sim->add_option("--engine", sim_engine, "lockstep|reference")
        ->check(CLI::IsMember({"lockstep", "reference"}));

    std::string pred_config;
    CLI::App* pred = app.add_subcommand("predict", "print the analytic prediction as json");
    pred->add_option("config", pred_config, "experiment config (json)")
        ->required()
        ->check(CLI::ExistingFile);

    std::string ana_trace, ana_metrics_csv, ana_direction, ana_estimator = "ls";
    int ana_rank = 0;
    double ana_threshold = 1e-12;
    int ana_discard = 1;
    CLI::App* ana = app.add_subcommand("analyze", "extract wave metrics from a timeline csv");
    ana->add_option("trace", ana_trace, "timeline.csv from a simulate run")
        ->required()
        ->check(CLI::ExistingFile);
    ana->add_option("--rank", ana_rank, "delay injection rank")->required();
    ana->add_option("--threshold", ana_threshold, "wait length that counts as the wave [s]");
    ana->add_option("--direction", ana_direction, "up|down (default: the side with more room)");
    ana->add_option("--discard", ana_discard, "front points to drop as injection transient");
    ana->add_option("--estimator", ana_estimator, "ls|theil-sen")
        ->check(CLI::IsMember({"ls", "theil-sen"}));
    ana->add_option("--metrics-csv", ana_metrics_csv, "also write rank,arrival_s,duration_s");

    std::string cmp_config, cmp_out, cmp_direction, cmp_estimator = "ls";
    double cmp_threshold = -1.0;
    int cmp_discard = -1;
    CLI::App* cmp = app.add_subcommand("compare", "simulate, measure, and check the model (5%)");
    cmp->add_option("config", cmp_config, "experiment config (json)")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_option("--out", cmp_out, "write the report json here");
    cmp->add_option("--threshold", cmp_threshold, "front detection threshold [s]");
    cmp->add_option("--discard", cmp_discard, "front points to drop as injection transient");
    cmp->add_option("--direction", cmp_direction, "up|down");
    cmp->add_option("--estimator", cmp_estimator, "ls|theil-sen")
        ->check(CLI::IsMember({"ls", "theil-sen"}));

    std::string swp_config, swp_out;
    CLI::App* swp = app.add_subcommand("sweep", "run a config cross product and aggregate");
    swp->add_option("sweep", swp_config, "sweep document (json)")
        ->required()
        ->check(CLI::ExistingFile);
    swp->add_option("--out", swp_out, "output directory (overrides the document's out_dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            ExperimentConfig cfg = load_config(sim_config);
            if (seed_opt->count()) apply_seed(cfg, seed);
            if (!sim_out.empty()) cfg.output.dir = sim_out;
            SimulateResult result = run_simulate(cfg, sim_engine == "reference");
            if (!quiet) {
                for (const std::string& f : result.files_written) std::cout << f << '\n';
                double final_max = 0.0;
                for (double c : result.timeline.final_clock_s)
                    final_max = std::max(final_max, c);
                std::cout << "final clock " << format_double(final_max) << " s";
                if (result.timeline.realized_noise_power > 0.0)
                    std::cout << ", realized noise power "
                              << format_double(result.timeline.realized_noise_power * 100.0)
                              << "%";
                std::cout << '\n';
            }
            return 0;
        }
        if (pred->parsed()) {
            ExperimentConfig cfg = load_config(pred_config);
            if (seed_opt->count()) apply_seed(cfg, seed);
            PreparedRun run = prepare(cfg);
            std::cout << prediction_json(predict_speed(run.sim)).dump(2) << '\n';
            return 0;
        }
        if (ana->parsed()) {
            Timeline tl = read_timeline_csv_file(ana_trace);
            FrontDirection dir =
                !ana_direction.empty()
                    ? parse_direction(ana_direction)
                    : (tl.num_ranks() - 1 - ana_rank >= ana_rank ? FrontDirection::Up
                                                                 : FrontDirection::Down);
            SlopeEstimator est = parse_estimator(ana_estimator);
            WaveMetrics m;
            m.direction = dir;
            m.threshold_s = ana_threshold;
            m.front = detect_front(tl, ana_rank, ana_threshold, dir);
            m.speed = measure_speed(m.front, ana_discard, est);
            m.decay = measure_decay(m.front, ana_threshold, est);
            if (!ana_metrics_csv.empty()) write_metrics_csv_file(ana_metrics_csv, m);
            std::cout << metrics_json(m).dump(2) << '\n';
            return 0;
        }
        if (cmp->parsed()) {
            ExperimentConfig cfg = load_config(cmp_config);
            if (seed_opt->count()) apply_seed(cfg, seed);
            AnalysisOptions opts;
            if (cmp_threshold >= 0.0) opts.threshold_s = cmp_threshold;
            if (cmp_discard >= 0) opts.discard_prefix = cmp_discard;
            if (!cmp_direction.empty()) opts.direction = parse_direction(cmp_direction);
            opts.estimator = parse_estimator(cmp_estimator);
            CompareReport report = run_compare(cfg, opts);
            if (!cmp_out.empty())
                write_text_file(cmp_out, compare_report_json(report).dump(2) + "\n");
            if (!quiet) std::cout << compare_report_table(report);
            return report.pass ? 0 : 1;
        }
        if (swp->parsed()) {
            SweepResult result = run_sweep_file(swp_config, swp_out);
            if (!quiet) {
                std::cout << result.cells.size() << " cells, " << result.failures
                          << " failures -> " << result.out_dir << '\n';
                for (const SweepCell& cell : result.cells)
                    if (!cell.error.empty())
                        std::cout << "cell " << cell.index << " (" << cell.key
                                  << ") error: " << cell.error << '\n';
            }
            return result.failures == 0 ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
