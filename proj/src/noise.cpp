#include "idlewave/noise.hpp"

#include <cmath>
#include <string>

#include "idlewave/error.hpp"

namespace idlewave {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1), keyed on (seed, rank, iteration).
double keyed_uniform(std::uint64_t seed, int rank, int iteration) {
    std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(rank)) << 32 |
                        static_cast<std::uint32_t>(iteration)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double raw_sum(const NoiseSpec& spec, int num_ranks, int iterations) {
    double sum = 0.0;
    for (int r = 0; r < num_ranks; ++r)
        for (int t = 0; t < iterations; ++t) sum += noise_draw(spec, r, t);
    return sum;
}

}  // namespace

double noise_draw(const NoiseSpec& spec, int rank, int iteration) {
    double u = keyed_uniform(spec.seed, rank, iteration);
    switch (spec.family) {
        case NoiseFamily::Shot:
            return u < spec.occurrence_prob ? spec.amplitude_s : 0.0;
        case NoiseFamily::Exponential:
            return -spec.mean_s * std::log1p(-u);  // u < 1 strictly, so finite
        case NoiseFamily::Uniform:
            return spec.lo_s + u * (spec.hi_s - spec.lo_s);
    }
    return 0.0;
}

double realized_power(const NoiseSpec& spec, int num_ranks, int iterations,
                      double silent_total_s) {
    if (silent_total_s <= 0.0) throw CalibrationError("silent total must be positive");
    return raw_sum(spec, num_ranks, iterations) / silent_total_s;
}

NoiseSpec calibrate_power(NoiseSpec spec, int num_ranks, int iterations, double silent_total_s,
                          double target_power) {
    if (num_ranks < 1 || iterations < 1) throw CalibrationError("empty draw grid");
    if (silent_total_s <= 0.0) throw CalibrationError("silent total must be positive");
    if (target_power < 0.0 || target_power >= 1.0)
        throw CalibrationError("target power must lie in [0, 1)");

    const double draws = static_cast<double>(num_ranks) * iterations;
    const double target_sum = target_power * silent_total_s;
    const double target_mean = target_sum / draws;

    if (target_power == 0.0) {
        switch (spec.family) {
            case NoiseFamily::Shot: spec.occurrence_prob = 0.0; break;
            case NoiseFamily::Exponential: spec.mean_s = 0.0; break;
            case NoiseFamily::Uniform: spec.lo_s = spec.hi_s = 0.0; break;
        }
        return spec;
    }

    // Stage 1: expected draw mean == target mean.
    switch (spec.family) {
        case NoiseFamily::Shot: {
            if (spec.amplitude_s <= 0.0)
                throw CalibrationError("shot amplitude must be positive to carry power");
            spec.occurrence_prob = target_mean / spec.amplitude_s;
            if (spec.occurrence_prob > 1.0)
                throw CalibrationError("shot amplitude too small: required probability " +
                                       std::to_string(spec.occurrence_prob) + " exceeds 1");
            break;
        }
        case NoiseFamily::Exponential:
            spec.mean_s = target_mean;
            break;
        case NoiseFamily::Uniform: {
            double mean = 0.5 * (spec.lo_s + spec.hi_s);
            if (spec.lo_s < 0.0 || spec.hi_s < spec.lo_s)
                throw CalibrationError("uniform noise bounds must satisfy 0 <= lo <= hi");
            if (mean <= 0.0) {
                spec.lo_s = 0.0;
                spec.hi_s = 2.0 * target_mean;
            } else {
                double f = target_mean / mean;
                spec.lo_s *= f;
                spec.hi_s *= f;
            }
            break;
        }
    }

    // Stage 2: pin the realized sum of this concrete seeded stream to the
    // target. Pure amplitude scaling, so the family is preserved.
    double realized = raw_sum(spec, num_ranks, iterations);
    if (realized <= 0.0)
        throw CalibrationError("calibrated stream carries no noise; grid too small for family");
    double f = target_sum / realized;
    switch (spec.family) {
        case NoiseFamily::Shot: spec.amplitude_s *= f; break;
        case NoiseFamily::Exponential: spec.mean_s *= f; break;
        case NoiseFamily::Uniform:
            spec.lo_s *= f;
            spec.hi_s *= f;
            break;
    }
    return spec;
}

const char* noise_family_name(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::Shot: return "shot";
        case NoiseFamily::Exponential: return "exponential";
        case NoiseFamily::Uniform: return "uniform";
    }
    return "?";
}

}  // namespace idlewave
