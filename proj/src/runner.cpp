#include "idlewave/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "idlewave/error.hpp"
#include "idlewave/trace_io.hpp"

namespace idlewave {

namespace fs = std::filesystem;
using nlohmann::json;

PreparedRun prepare(const ExperimentConfig& config) {
    PreparedRun run{config, config.to_sim(), {}, {}};
    run.config_hash = config_content_hash(serialize_config(config));
    if (run.sim.noise && config.noise_power_percent) {
        int n = run.sim.topology.num_ranks();
        double silent_total =
            double(n) * double(run.sim.iterations) * (run.sim.t_exec_s + silent_iteration_comm(run.sim));
        run.sim.noise = calibrate_power(*run.sim.noise, n, run.sim.iterations, silent_total,
                                        *config.noise_power_percent / 100.0);
        run.calibrated_noise = run.sim.noise;
    }
    return run;
}

namespace {

int reach_at(const SimConfig& sim, int rank) {
    for (const Region& r : sim.topology.regions)
        if (rank >= r.lo && rank < r.hi) return std::max(1, r.j);
    return std::max(1, sim.topology.longest_distance());
}

}  // namespace

WaveMetrics analyze_timeline(const SimConfig& sim, const Timeline& timeline, int injection_rank,
                             const AnalysisOptions& opts) {
    int n = timeline.num_ranks();
    if (injection_rank < 0 || injection_rank >= n)
        throw InvalidRank("injection rank outside the timeline");
    WaveMetrics m;
    m.direction = opts.direction.value_or(
        n - 1 - injection_rank >= injection_rank ? FrontDirection::Up : FrontDirection::Down);
    m.threshold_s = opts.threshold_s.value_or(default_front_threshold(sim));
    int discard = opts.discard_prefix.value_or(default_discard_prefix(reach_at(sim, injection_rank)));
    m.front = detect_front(timeline, injection_rank, m.threshold_s, m.direction);
    m.speed = measure_speed(m.front, discard, opts.estimator);
    m.decay = measure_decay(m.front, m.threshold_s, opts.estimator);
    return m;
}

namespace {

std::string note_files(std::vector<std::string>& files, const fs::path& p) {
    files.push_back(p.string());
    return p.string();
}

json meta_json(const PreparedRun& run, const Timeline& timeline,
               const std::vector<std::string>& files) {
    json meta;
    meta["config_hash"] = run.config_hash;
    meta["config"] = json::parse(serialize_config(run.config));
    meta["num_ranks"] = run.sim.topology.num_ranks();
    meta["iterations"] = run.sim.iterations;
    meta["silent_total_s"] = timeline.silent_total_s;
    meta["realized_noise_power"] = timeline.realized_noise_power;
    double final_max = 0.0;
    for (double c : timeline.final_clock_s) final_max = std::max(final_max, c);
    meta["final_clock_max_s"] = final_max;
    if (run.calibrated_noise) {
        const NoiseSpec& nz = *run.calibrated_noise;
        meta["calibrated_noise"] = {{"family", noise_family_name(nz.family)},
                                    {"seed", nz.seed},
                                    {"amplitude_s", nz.amplitude_s},
                                    {"occurrence_prob", nz.occurrence_prob},
                                    {"mean_s", nz.mean_s},
                                    {"lo_s", nz.lo_s},
                                    {"hi_s", nz.hi_s}};
    }
    meta["files"] = files;
    return meta;
}

}  // namespace

SimulateResult run_simulate(const ExperimentConfig& config, bool reference_engine) {
    PreparedRun run = prepare(config);
    Timeline timeline = reference_engine ? simulate_reference(run.sim) : simulate(run.sim);
    SimulateResult result{std::move(run), std::move(timeline), {}};

    fs::path dir(config.output.dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    const auto& formats = config.output.formats;
    if (std::find(formats.begin(), formats.end(), "csv") != formats.end())
        write_timeline_csv_file(note_files(result.files_written, dir / "timeline.csv"),
                                result.timeline);
    if (std::find(formats.begin(), formats.end(), "json") != formats.end())
        write_timeline_json_file(note_files(result.files_written, dir / "timeline.json"),
                                 result.timeline);
    // Register meta.json before rendering it so the file list includes itself
    // regardless of argument evaluation order.
    std::string meta_path = note_files(result.files_written, dir / "meta.json");
    write_text_file(meta_path,
                    meta_json(result.run, result.timeline, result.files_written).dump(2) + "\n");
    return result;
}

CompareReport run_compare(const ExperimentConfig& config, const AnalysisOptions& opts) {
    PreparedRun run = prepare(config);
    CompareReport rep;
    rep.config_hash = run.config_hash;
    rep.prediction = predict_speed(run.sim);
    if (run.sim.delays.empty())
        throw NoWaveDetected(
            "config has no delay injection, so there is no wave to compare (add delays[])");
    Timeline timeline = simulate(run.sim);
    rep.realized_noise_power = timeline.realized_noise_power;
    int inject = run.sim.delays.front().rank;
    bool has_sync = std::any_of(
        run.sim.collectives.begin(), run.sim.collectives.end(),
        [](const CollectiveSpec& c) { return c.cls == CollectiveClass::Synchronizing; });
    try {
        WaveMetrics m = analyze_timeline(run.sim, timeline, inject, opts);
        rep.metrics = std::move(m);
        double predicted = rep.prediction.v_silent_ranks_per_s;
        rep.deviation = std::fabs(rep.metrics->speed.speed_ranks_per_s / predicted - 1.0);
        if (run.sim.noise) {
            rep.compared = false;
            rep.pass = true;
            rep.note = "noisy run; deviation against the silent model is informational";
        } else {
            rep.compared = true;
            rep.pass = rep.deviation <= 0.05;
        }
    } catch (const NoWaveDetected& e) {
        if (!has_sync)
            throw NoWaveDetected(std::string(e.what()) +
                                 " (check the delay amplitude or lower --threshold)");
        rep.annihilated = true;
        rep.pass = true;
        rep.note = "wave annihilated by a synchronizing collective; speed comparison skipped";
    } catch (const InsufficientFront& e) {
        if (!has_sync)
            throw InsufficientFront(std::string(e.what()) +
                                    " (front too short; try more ranks or a smaller discard)");
        rep.annihilated = true;
        rep.pass = true;
        rep.note = "wave annihilated by a synchronizing collective; speed comparison skipped";
    }
    return rep;
}

json prediction_json(const Prediction& p) {
    json doc{{"v_min_ranks_per_s", p.v_min_ranks_per_s},
             {"v_max_ranks_per_s", p.v_max_ranks_per_s},
             {"alpha_ranks", p.alpha_ranks},
             {"kappa", p.kappa},
             {"protocol_factor", p.protocol_factor},
             {"heuristic_kappa", p.heuristic_kappa},
             {"v_silent_ranks_per_s", p.v_silent_ranks_per_s}};
    if (!p.per_region.empty()) {
        json regions = json::array();
        for (const RegionPrediction& rp : p.per_region)
            regions.push_back({{"lo", rp.region.lo},
                               {"hi", rp.region.hi},
                               {"j", rp.region.j},
                               {"kappa", rp.kappa},
                               {"speed_ranks_per_s", rp.speed_ranks_per_s}});
        doc["per_region"] = regions;
    }
    return doc;
}

json compare_report_json(const CompareReport& report) {
    json doc;
    doc["config_hash"] = report.config_hash;
    doc["prediction"] = prediction_json(report.prediction);
    if (report.metrics) doc["metrics"] = metrics_json(*report.metrics);
    doc["deviation"] = report.deviation;
    doc["pass"] = report.pass;
    doc["compared"] = report.compared;
    doc["annihilated"] = report.annihilated;
    doc["note"] = report.note;
    doc["realized_noise_power"] = report.realized_noise_power;
    return doc;
}

std::string compare_report_table(const CompareReport& report) {
    std::ostringstream out;
    char line[160];
    const Prediction& p = report.prediction;
    std::snprintf(line, sizeof line, "predicted   %12.4f ranks/s  (kappa %.4g, factor %d%s)\n",
                  p.v_silent_ranks_per_s, p.kappa, p.protocol_factor,
                  p.heuristic_kappa ? ", heuristic" : "");
    out << line;
    if (report.metrics) {
        const WaveMetrics& m = *report.metrics;
        std::snprintf(line, sizeof line, "measured    %12.4f ranks/s  (r^2 %.6f, %d points)\n",
                      m.speed.speed_ranks_per_s, m.speed.r_squared, m.speed.points_used);
        out << line;
        std::snprintf(line, sizeof line,
                      "decay       %12.6g s/rank   survival %.6g s (rank %d)\n",
                      m.decay.decay_rate_s_per_rank, m.decay.survival_time_s, m.decay.last_rank);
        out << line;
        std::snprintf(line, sizeof line, "deviation   %11.2f%%  -> %s\n", report.deviation * 100.0,
                      !report.compared ? "SKIPPED" : report.pass ? "PASS" : "FAIL");
        out << line;
    }
    for (const RegionPrediction& rp : p.per_region) {
        std::snprintf(line, sizeof line, "region [%d, %d)  j=%d  kappa %.4g  v %.4f ranks/s\n",
                      rp.region.lo, rp.region.hi, rp.region.j, rp.kappa, rp.speed_ranks_per_s);
        out << line;
    }
    if (!report.note.empty()) out << "note: " << report.note << "\n";
    return out.str();
}

namespace {

json* walk_path(json& doc, const std::string& dotted) {
    json* cur = &doc;
    std::istringstream segs(dotted);
    std::string seg;
    std::vector<std::string> parts;
    while (std::getline(segs, seg, '.')) parts.push_back(seg);
    if (parts.empty()) throw ConfigError("sweep axis path is empty");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& s = parts[i];
        bool digits = !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
            return c >= '0' && c <= '9';
        });
        if (digits && cur->is_array()) {
            std::size_t idx = std::size_t(std::stoul(s));
            if (idx >= cur->size())
                throw ConfigError("sweep axis path '" + dotted + "': index " + s +
                                  " outside the array");
            cur = &(*cur)[idx];
        } else {
            if (!cur->is_object() && !cur->is_null())
                throw ConfigError("sweep axis path '" + dotted + "': '" + s +
                                  "' does not address an object");
            cur = &(*cur)[s];
        }
    }
    return cur;
}

std::string value_token(const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace

int sweep_thread_cap() {
    if (const char* env = std::getenv("IDLEWAVE_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

SweepResult run_sweep(const std::string& sweep_json_text, const std::string& out_dir_override) {
    json doc;
    try {
        doc = json::parse(sweep_json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("base"))
        throw ConfigError("sweep: needs a 'base' config object");
    json base = doc.at("base");

    struct Axis {
        std::string path;
        std::vector<json> values;
    };
    std::vector<Axis> axes;
    if (doc.contains("axes")) {
        const json& ax = doc.at("axes");
        if (!ax.is_array()) throw ConfigError("sweep.axes: expected an array");
        for (std::size_t i = 0; i < ax.size(); ++i) {
            const json& a = ax[i];
            std::string path = "sweep.axes[" + std::to_string(i) + "]";
            if (!a.is_object() || !a.contains("path") || !a.contains("values"))
                throw ConfigError(path + ": needs 'path' and 'values'");
            if (!a.at("values").is_array() || a.at("values").empty())
                throw ConfigError(path + ".values: expected a non-empty array");
            Axis axis;
            axis.path = a.at("path").get<std::string>();
            for (const json& v : a.at("values")) axis.values.push_back(v);
            axes.push_back(std::move(axis));
        }
    }

    std::size_t cell_count = 1;
    for (const Axis& a : axes) cell_count *= a.values.size();

    SweepResult result;
    result.out_dir = !out_dir_override.empty() ? out_dir_override
                     : doc.contains("out_dir") ? doc.at("out_dir").get<std::string>()
                                               : std::string("sweep_out");
    fs::path dir(result.out_dir);
    std::error_code ec;
    fs::create_directories(dir / "cells", ec);
    if (ec) throw IoError("cannot create sweep directory " + dir.string() + ": " + ec.message());

    // Pre-render every cell config; the parallel loop then only simulates.
    std::vector<std::string> cell_text(cell_count);
    std::vector<std::string> cell_key(cell_count);
    std::vector<json> cell_doc(cell_count);
    for (std::size_t i = 0; i < cell_count; ++i) {
        json cell = base;
        std::string key;
        std::size_t rest = i;
        for (const Axis& a : axes) {
            const json& v = a.values[rest % a.values.size()];
            rest /= a.values.size();
            *walk_path(cell, a.path) = v;
            if (!key.empty()) key += ';';
            key += a.path + "=" + value_token(v);
        }
        cell_doc[i] = cell;
        cell_text[i] = cell.dump();
        cell_key[i] = key;
    }

    result.cells.resize(cell_count);
    int cap = std::max(1, std::min<int>(sweep_thread_cap(), int(cell_count)));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(cap) if (cap > 1)
#endif
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(cell_count); ++i) {
        SweepCell& cell = result.cells[std::size_t(i)];
        cell.index = std::size_t(i);
        cell.key = cell_key[std::size_t(i)];
        try {
            ExperimentConfig cfg = parse_config(cell_text[std::size_t(i)]);
            cell.report = run_compare(cfg);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }

    std::ostringstream agg;
    agg << "cell,key,predicted_ranks_per_s,measured_ranks_per_s,deviation,"
           "decay_rate_s_per_rank,survival_time_s,realized_noise_power,status\n";
    for (const SweepCell& cell : result.cells) {
        json cell_report;
        cell_report["cell"] = cell.index;
        cell_report["key"] = cell.key;
        cell_report["config"] = cell_doc[cell.index];
        agg << cell.index << ',' << csv_safe(cell.key) << ',';
        if (cell.report) {
            const CompareReport& r = *cell.report;
            cell_report["report"] = compare_report_json(r);
            std::string status = !r.compared ? (r.annihilated ? "ANNIHILATED" : "SKIPPED")
                                 : r.pass    ? "PASS"
                                             : "FAIL";
            if (r.compared && !r.pass) ++result.failures;
            agg << format_double(r.prediction.v_silent_ranks_per_s) << ','
                << (r.metrics ? format_double(r.metrics->speed.speed_ranks_per_s) : "") << ','
                << (r.metrics ? format_double(r.deviation) : "") << ','
                << (r.metrics ? format_double(r.metrics->decay.decay_rate_s_per_rank) : "") << ','
                << (r.metrics ? format_double(r.metrics->decay.survival_time_s) : "") << ','
                << format_double(r.realized_noise_power) << ',' << status << '\n';
        } else {
            cell_report["error"] = cell.error;
            ++result.failures;
            agg << ",,,,,," << "ERROR:" << csv_safe(cell.error) << '\n';
        }
        write_text_file((dir / "cells" / ("cell_" + std::to_string(cell.index) + ".json")).string(),
                        cell_report.dump(2) + "\n");
    }
    write_text_file((dir / "aggregate.csv").string(), agg.str());
    return result;
}

SweepResult run_sweep_file(const std::string& path, const std::string& out_dir_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sweep file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return run_sweep(buf.str(), out_dir_override);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace idlewave
