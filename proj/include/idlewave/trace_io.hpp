#pragma once

#include <iosfwd>
#include <string>

#include "idlewave/analysis.hpp"
#include "idlewave/simulator.hpp"
#include "json.hpp"

namespace idlewave {

// CSV with header "rank,iteration,phase,start_s,end_s", one row per interval,
// ranks in order. Times print as %.17g so a rerun is byte-identical and a
// read-back reproduces the exact doubles.
void write_timeline_csv(std::ostream& out, const Timeline& timeline);
void write_timeline_csv_file(const std::string& path, const Timeline& timeline);

// Inverse of write_timeline_csv. Totals that live only in run metadata
// (silent_total_s, realized_noise_power) come back as 0.
Timeline read_timeline_csv(std::istream& in);
Timeline read_timeline_csv_file(const std::string& path);

nlohmann::json timeline_json(const Timeline& timeline);
void write_timeline_json_file(const std::string& path, const Timeline& timeline);

// CSV with header "rank,arrival_s,duration_s".
void write_metrics_csv(std::ostream& out, const WaveMetrics& metrics);
void write_metrics_csv_file(const std::string& path, const WaveMetrics& metrics);

nlohmann::json metrics_json(const WaveMetrics& metrics);

void write_text_file(const std::string& path, const std::string& content);

// %.17g, the shortest format that is still round-trip exact for doubles.
std::string format_double(double v);

}  // namespace idlewave
