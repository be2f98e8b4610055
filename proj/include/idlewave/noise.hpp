#pragma once

#include <cstdint>
#include <string>

namespace idlewave {

enum class NoiseFamily { Shot, Exponential, Uniform };

// One extra idle period is drawn per (rank, iteration) and appended to the
// compute phase. Draws are a pure function of (seed, rank, iteration), so any
// evaluation order and any thread count produce the same stream.
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::Shot;
    std::uint64_t seed = 0;

    // Shot: fires with occurrence_prob, length amplitude_s.
    double amplitude_s = 1.0;
    double occurrence_prob = 0.1;
    // Exponential: mean_s.
    double mean_s = 1.0;
    // Uniform on [lo_s, hi_s).
    double lo_s = 0.0;
    double hi_s = 1.0;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

double noise_draw(const NoiseSpec& spec, int rank, int iteration);

// Sum of draws over the full (num_ranks x iterations) grid divided by
// silent_total_s.
double realized_power(const NoiseSpec& spec, int num_ranks, int iterations, double silent_total_s);

// Rescales the spec so the stream injects target_power * silent_total_s seconds
// of extra idle time. Stage 1 solves the family parameter analytically for the
// expected sum (Shot keeps its amplitude and solves occurrence_prob); stage 2
// rescales amplitudes against the concrete seeded stream so the realized power
// hits the target to FP precision. Throws CalibrationError when no parameter
// choice can reach the target.
NoiseSpec calibrate_power(NoiseSpec spec, int num_ranks, int iterations, double silent_total_s,
                          double target_power);

const char* noise_family_name(NoiseFamily f);

}  // namespace idlewave
