#include "idlewave/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "idlewave/error.hpp"

namespace idlewave {

namespace {

Phase phase_from_name(const std::string& s, int line) {
    for (Phase p : {Phase::Compute, Phase::InjectedDelay, Phase::Noise, Phase::Wait,
                    Phase::Collective})
        if (s == phase_name(p)) return p;
    throw IoError("timeline csv line " + std::to_string(line) + ": unknown phase '" + s + "'");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_timeline_csv(std::ostream& out, const Timeline& timeline) {
    out << "rank,iteration,phase,start_s,end_s\n";
    for (int r = 0; r < timeline.num_ranks(); ++r)
        for (const Interval& iv : timeline.per_rank[std::size_t(r)])
            out << r << ',' << iv.iteration << ',' << phase_name(iv.phase) << ','
                << format_double(iv.start_s) << ',' << format_double(iv.end_s) << '\n';
}

void write_timeline_csv_file(const std::string& path, const Timeline& timeline) {
    auto out = open_out(path);
    write_timeline_csv(out, timeline);
}

Timeline read_timeline_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("timeline csv: empty file");
    if (line == "rank,iteration,phase,start_s,end_s\r")
        line.pop_back();
    if (line != "rank,iteration,phase,start_s,end_s")
        throw IoError("timeline csv line 1: unexpected header '" + line + "'");
    Timeline tl;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field[5];
        for (int i = 0; i < 5; ++i)
            if (!std::getline(row, field[i], i < 4 ? ',' : '\n'))
                throw IoError("timeline csv line " + std::to_string(lineno) + ": expected 5 fields");
        char* end = nullptr;
        long rank = std::strtol(field[0].c_str(), &end, 10);
        if (*end || rank < 0)
            throw IoError("timeline csv line " + std::to_string(lineno) + ": bad rank");
        long iter = std::strtol(field[1].c_str(), &end, 10);
        if (*end) throw IoError("timeline csv line " + std::to_string(lineno) + ": bad iteration");
        Interval iv;
        iv.iteration = int(iter);
        iv.phase = phase_from_name(field[2], lineno);
        iv.start_s = std::strtod(field[3].c_str(), &end);
        if (*end) throw IoError("timeline csv line " + std::to_string(lineno) + ": bad start_s");
        iv.end_s = std::strtod(field[4].c_str(), &end);
        if (*end) throw IoError("timeline csv line " + std::to_string(lineno) + ": bad end_s");
        if (std::size_t(rank) >= tl.per_rank.size()) tl.per_rank.resize(std::size_t(rank) + 1);
        tl.per_rank[std::size_t(rank)].push_back(iv);
    }
    tl.final_clock_s.assign(tl.per_rank.size(), 0.0);
    for (std::size_t r = 0; r < tl.per_rank.size(); ++r)
        if (!tl.per_rank[r].empty()) tl.final_clock_s[r] = tl.per_rank[r].back().end_s;
    return tl;
}

Timeline read_timeline_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open timeline csv: " + path);
    return read_timeline_csv(in);
}

nlohmann::json timeline_json(const Timeline& timeline) {
    nlohmann::json doc;
    doc["num_ranks"] = timeline.num_ranks();
    doc["final_clock_s"] = timeline.final_clock_s;
    doc["silent_total_s"] = timeline.silent_total_s;
    doc["realized_noise_power"] = timeline.realized_noise_power;
    nlohmann::json records = nlohmann::json::array();
    for (int r = 0; r < timeline.num_ranks(); ++r)
        for (const Interval& iv : timeline.per_rank[std::size_t(r)])
            records.push_back({{"rank", r},
                               {"iteration", iv.iteration},
                               {"phase", phase_name(iv.phase)},
                               {"start_s", iv.start_s},
                               {"end_s", iv.end_s}});
    doc["records"] = records;
    return doc;
}

void write_timeline_json_file(const std::string& path, const Timeline& timeline) {
    auto out = open_out(path);
    out << timeline_json(timeline).dump(2) << '\n';
}

void write_metrics_csv(std::ostream& out, const WaveMetrics& metrics) {
    out << "rank,arrival_s,duration_s\n";
    for (const FrontPoint& p : metrics.front)
        out << p.rank << ',' << format_double(p.arrival_s) << ',' << format_double(p.duration_s)
            << '\n';
}

void write_metrics_csv_file(const std::string& path, const WaveMetrics& metrics) {
    auto out = open_out(path);
    write_metrics_csv(out, metrics);
}

nlohmann::json metrics_json(const WaveMetrics& metrics) {
    nlohmann::json front = nlohmann::json::array();
    for (const FrontPoint& p : metrics.front)
        front.push_back(
            {{"rank", p.rank}, {"arrival_s", p.arrival_s}, {"duration_s", p.duration_s}});
    return nlohmann::json{
        {"front", front},
        {"speed_ranks_per_s", metrics.speed.speed_ranks_per_s},
        {"r_squared", metrics.speed.r_squared},
        {"points_used", metrics.speed.points_used},
        {"decay_rate_s_per_rank", metrics.decay.decay_rate_s_per_rank},
        {"survival_time_s", metrics.decay.survival_time_s},
        {"last_rank", metrics.decay.last_rank},
        {"threshold_s", metrics.threshold_s},
        {"direction", metrics.direction == FrontDirection::Up ? "up" : "down"},
    };
}

void write_text_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
}

}  // namespace idlewave
