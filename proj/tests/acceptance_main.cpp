// Acceptance gate: end-to-end scenarios, one PASS/FAIL line each, nonzero exit
// on any failure. Optional argv: criterion numbers to run (default all).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "idlewave/analysis.hpp"
#include "idlewave/config.hpp"
#include "idlewave/model.hpp"
#include "idlewave/noise.hpp"
#include "idlewave/runner.hpp"
#include "idlewave/simulator.hpp"
#include "idlewave/topology.hpp"

namespace {

using namespace idlewave;

constexpr double kExec = 0.013;
constexpr double kComm = 0.0001;

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

struct Outcome {
    std::vector<std::string> failures;
    std::string headline;

    void require(bool cond, std::string detail) {
        if (!cond) failures.push_back(std::move(detail));
    }
    bool ok() const { return failures.empty(); }
};

SimConfig chain(int n, int j, ConcurrencyScheme scheme, Boundary boundary = Boundary::OpenChain) {
    SimConfig cfg;
    cfg.topology = build_compact(n, j, 8, boundary);
    cfg.scheme = scheme;
    cfg.t_exec_s = kExec;
    cfg.comm.uniform_s = kComm;
    return cfg;
}

struct Measured {
    std::vector<FrontPoint> front;
    double speed = 0.0;
};

Measured measure_up(const SimConfig& cfg, int injector, int reach) {
    Timeline tl = simulate(cfg);
    Measured m;
    m.front = detect_front(tl, injector, default_front_threshold(cfg), FrontDirection::Up);
    m.speed = measure_speed_bursts(m.front, default_discard_prefix(reach)).speed_ranks_per_s;
    return m;
}

// Envelope points sampled once per hop. A gapped-distance wave rides its
// longest hop; the envelope keeps that chain but also whatever short-hop
// fills trail the final jump (nothing farther beats them) and the sub-period
// first-fence points of split schedules. Both betray themselves by a small
// rank step, so keep only points landing a long one.
std::vector<FrontPoint> hop_leaders(const std::vector<FrontPoint>& env) {
    if (env.size() < 2) return env;
    int max_gap = 0;
    for (std::size_t i = 1; i < env.size(); ++i)
        max_gap = std::max(max_gap, std::abs(env[i].rank - env[i - 1].rank));
    std::vector<FrontPoint> out{env.front()};
    for (std::size_t i = 1; i < env.size(); ++i)
        if (2 * std::abs(env[i].rank - env[i - 1].rank) > max_gap) out.push_back(env[i]);
    return out;
}

// First unbroken run of front ranks outward from the injector. When the
// detection threshold sits only a few mean draws above the ambient waits, the
// detector latches stray noise maxima far beyond the dead wave; the true wave
// is the contiguous prefix.
std::vector<FrontPoint> contiguous_prefix(std::vector<FrontPoint> front) {
    std::size_t keep = front.empty() ? 0 : 1;
    while (keep < front.size() && front[keep].rank == front[keep - 1].rank + 1) ++keep;
    front.resize(keep);
    return front;
}

double ranks_per_iteration(ConcurrencyScheme scheme, int j) {
    bool per_distance = scheme == ConcurrencyScheme::MWSDim || scheme == ConcurrencyScheme::MWSDir ||
                        scheme == ConcurrencyScheme::BlockingSendrecv;
    return per_distance ? 0.5 * j * (j + 1) : double(j);
}

int iterations_to_cross(int span, double per_iteration, int start, int margin) {
    return start + int(std::ceil(double(span) / per_iteration)) + margin;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// 1. Silent wave speed against protocol_factor * kappa * v_min, all schemes
// and reaches.
Outcome criterion1() {
    Outcome out;
    const int n = 120, injector = 5;
    double worst = 0.0;
    std::string worst_cell = "none";
    int cells = 0;
    for (int j : {1, 2, 6, 12}) {
        for (auto scheme : {ConcurrencyScheme::MWSDim, ConcurrencyScheme::MWMDim,
                            ConcurrencyScheme::SWMDim, ConcurrencyScheme::MWSDir}) {
            SimConfig cfg = chain(n, j, scheme);
            cfg.delays.push_back({injector, 2, 0.5});
            cfg.iterations =
                iterations_to_cross(n - 1 - injector, ranks_per_iteration(scheme, j), 2, 5);
            double predicted = predict_speed(cfg).v_silent_ranks_per_s;
            double measured = measure_up(cfg, injector, j).speed;
            double dev = std::fabs(measured / predicted - 1.0);
            ++cells;
            if (dev > worst) {
                worst = dev;
                worst_cell = fmt("%s j=%d", scheme_name(scheme), j);
            }
            out.require(dev <= 0.05,
                        fmt("%s j=%d: measured %.4f vs predicted %.4f ranks/s (%.2f%% off)",
                            scheme_name(scheme), j, measured, predicted, 100.0 * dev));
        }
    }
    out.headline = fmt("%d scheme x reach cells within 5%% of factor*kappa*v_min (worst %.3f%% at %s)",
                       cells, 100.0 * worst, worst_cell.c_str());
    return out;
}

// 2. Non-compact distance sets: envelope speed still follows kappa; the
// zig-zag left behind must die within ~j/2 ranks for split waits but span the
// chain for fused waits.
Outcome criterion2() {
    Outcome out;
    const int n = 120, injector = 5;
    double worst_speed = 0.0;
    std::vector<std::string> extents;
    for (const auto& dists : {std::vector<int>{1, 6}, std::vector<int>{1, 12}}) {
        int longest = dists.back();
        int horizon = (longest + 1) / 2 + 2;
        for (auto scheme : {ConcurrencyScheme::MWSDim, ConcurrencyScheme::MWMDim,
                            ConcurrencyScheme::SWMDim}) {
            SimConfig cfg;
            cfg.topology = build_noncompact(n, dists, 8, Boundary::OpenChain);
            cfg.scheme = scheme;
            cfg.t_exec_s = kExec;
            cfg.comm.uniform_s = kComm;
            cfg.delays.push_back({injector, 2, 0.5});
            double per_iter =
                scheme == ConcurrencyScheme::MWSDim ? double(1 + longest) : double(longest);
            cfg.iterations = iterations_to_cross(n - 1 - injector, per_iter, 2, 10);

            double predicted = predict_speed(cfg).v_silent_ranks_per_s;
            Timeline tl = simulate(cfg);
            auto front =
                detect_front(tl, injector, default_front_threshold(cfg), FrontDirection::Up);
            // Ranks the long hop skips fill in periods late and non-monotonically;
            // the speed the model predicts is that of the leading edge.
            auto chain = hop_leaders(front_envelope(front));
            SpeedFit fit = measure_speed(chain, chain.size() > 4 ? 1 : 0);
            double dev = std::fabs(fit.speed_ranks_per_s / predicted - 1.0);
            worst_speed = std::max(worst_speed, dev);
            out.require(dev <= 0.05,
                        fmt("%s {1,%d}: envelope %.4f vs predicted %.4f ranks/s (%.2f%% off)",
                            scheme_name(scheme), longest, fit.speed_ranks_per_s, predicted,
                            100.0 * dev));

            double amplitude = 0.25 * (kExec + silent_iteration_comm(cfg));
            int extent = residual_extent(front, injector, default_discard_prefix(longest),
                                         amplitude);
            extents.push_back(fmt("%s{1,%d}=%d", scheme_name(scheme), longest, extent));
            if (scheme == ConcurrencyScheme::SWMDim)
                out.require(extent >= 3 * horizon,
                            fmt("swmdim {1,%d}: zig-zag extent %d ranks, expected it to persist "
                                "past %d",
                                longest, extent, 3 * horizon));
            else
                out.require(extent <= horizon,
                            fmt("%s {1,%d}: zig-zag extent %d ranks exceeds the %d-rank horizon",
                                scheme_name(scheme), longest, extent, horizon));
        }
    }
    std::string all;
    for (const auto& e : extents) all += (all.empty() ? "" : ", ") + e;
    out.headline = fmt("envelope speeds within 5%% (worst %.3f%%); zig-zag extents %s",
                       100.0 * worst_speed, all.c_str());
    return out;
}

// 3. Rendezvous doubles direction-split waves and leaves fused schedules alone.
Outcome criterion3() {
    Outcome out;
    const int n = 120, injector = 5;
    auto run_speed = [&](ConcurrencyScheme scheme, int j, Protocol protocol, int iters) {
        SimConfig cfg = chain(n, j, scheme);
        cfg.protocol = protocol;
        cfg.delays.push_back({injector, 2, 0.5});
        cfg.iterations = iters;
        return measure_up(cfg, injector, j).speed;
    };
    double eager = run_speed(ConcurrencyScheme::MWSDir, 1, Protocol::Eager, 125);
    double rendezvous = run_speed(ConcurrencyScheme::MWSDir, 1, Protocol::Rendezvous, 125);
    double ratio = rendezvous / eager;
    out.require(ratio >= 1.9 && ratio <= 2.1,
                fmt("mwsdir rendezvous/eager speed ratio %.3f outside [1.9, 2.1]", ratio));
    for (auto scheme : {ConcurrencyScheme::MWMDim, ConcurrencyScheme::SWMDim}) {
        double e = run_speed(scheme, 2, Protocol::Eager, 64);
        double r = run_speed(scheme, 2, Protocol::Rendezvous, 64);
        double f = r / e;
        out.require(f >= 0.95 && f <= 1.05,
                    fmt("%s: rendezvous/eager ratio %.3f, fused waits should not care",
                        scheme_name(scheme), f));
    }
    out.headline = fmt("mwsdir speeds up 2x under rendezvous (ratio %.3f); fused schemes hold",
                       ratio);
    return out;
}

// 4. Piecewise reach: the wave refracts at region borders, speed ratio equals
// the kappa ratio.
Outcome criterion4() {
    Outcome out;
    SimConfig cfg;
    cfg.topology = build_inhomogeneous(120, {{0, 40, 3}, {40, 80, 12}, {80, 120, 3}}, 8);
    cfg.scheme = ConcurrencyScheme::SWMDim;
    cfg.t_exec_s = kExec;
    cfg.comm.uniform_s = kComm;
    cfg.delays.push_back({5, 2, 0.5});
    cfg.iterations = 40;
    Timeline tl = simulate(cfg);
    auto front = detect_front(tl, 5, default_front_threshold(cfg), FrontDirection::Up);
    out.require(front.back().rank >= 115, fmt("front only reached rank %d", front.back().rank));

    // Burst leaders of the whole front stay exactly one period apart, so a
    // rank-windowed subset of them gives a clean per-region slope.
    auto leaders = burst_leaders(front);
    auto window_speed = [&](int lo, int hi) {
        std::vector<FrontPoint> pts;
        for (const auto& p : leaders)
            if (p.rank >= lo && p.rank <= hi) pts.push_back(p);
        return measure_speed(pts, 0, SlopeEstimator::LeastSquares).speed_ranks_per_s;
    };
    double outer = window_speed(8, 38);
    double mid = window_speed(44, 79);
    double ratio = mid / outer;
    out.require(ratio >= 3.6 && ratio <= 4.4,
                fmt("mid/outer speed ratio %.3f outside [3.6, 4.4]", ratio));

    Prediction p = predict_speed(cfg);
    out.require(p.per_region.size() == 3,
                fmt("expected 3 region predictions, got %zu", p.per_region.size()));
    if (p.per_region.size() == 3) {
        double dev0 = std::fabs(outer / p.per_region[0].speed_ranks_per_s - 1.0);
        double dev1 = std::fabs(mid / p.per_region[1].speed_ranks_per_s - 1.0);
        out.require(dev0 <= 0.05, fmt("outer region speed %.2f%% off its kappa", 100.0 * dev0));
        out.require(dev1 <= 0.05, fmt("middle region speed %.2f%% off its kappa", 100.0 * dev1));
    }
    out.headline = fmt("wave refracts 3 -> 12 reach at ratio %.3f, regions match per-region kappa",
                       ratio);
    return out;
}

// 5. Bounding speeds: j=1 pins the wave at v_min; an all-to-all absorbs the
// whole delay in one period (the v_max regime); alpha is the farthest-rank
// distance.
Outcome criterion5() {
    Outcome out;
    SimConfig slow = chain(120, 1, ConcurrencyScheme::MWSDim);
    slow.delays.push_back({5, 2, 0.5});
    slow.iterations = 125;
    double v_lo = predict_speed(slow).v_min_ranks_per_s;
    double measured = measure_up(slow, 5, 1).speed;
    double dev = std::fabs(measured / v_lo - 1.0);
    out.require(dev <= 0.02,
                fmt("j=1 wave %.4f vs v_min %.4f ranks/s (%.2f%% off)", measured, v_lo,
                    100.0 * dev));

    const int n = 16;
    const double d0 = 0.3;
    std::vector<std::array<std::int64_t, 3>> triples;
    for (int s = 0; s < n; ++s)
        for (int d = 0; d < n; ++d)
            if (s != d) triples.push_back({s, d, 8});
    SimConfig all;
    all.topology = build_explicit(n, triples, Boundary::OpenChain);
    all.scheme = ConcurrencyScheme::SWMDim;
    all.t_exec_s = kExec;
    all.comm.uniform_s = kComm;
    all.delays.push_back({7, 1, d0});
    all.iterations = 6;
    Timeline tl = simulate(all);
    // While everyone else catches up, the delayed rank clears its own fence
    // for free and ends one comm cost behind; rejoining costs it that quantum
    // back once. Anything beyond fence-quantum waits after the absorption
    // iteration would be a surviving wave.
    int hit = 0;
    double late = 0.0, resync = 0.0;
    for (int r = 0; r < n; ++r)
        for (const auto& iv : tl.per_rank[std::size_t(r)]) {
            if (iv.phase != Phase::Wait) continue;
            double len = iv.end_s - iv.start_s;
            if (iv.iteration == 1 && r != 7 && len >= d0) ++hit;
            if (iv.iteration == 2 && r == 7)
                resync = std::max(resync, len);
            else if (iv.iteration >= 2)
                late = std::max(late, len);
        }
    out.require(hit == n - 1,
                fmt("only %d of %d ranks absorbed the delay inside its own iteration", hit, n - 1));
    out.require(late <= kComm + 1e-12,
                fmt("a %.6f s wait leaked past the all-to-all iteration", late));
    out.require(resync <= 2.0 * kComm + 1e-12,
                fmt("the delayed rank rejoined with a %.6f s wait, more than its skipped fence "
                    "quantum",
                    resync));

    int bad_n = 0, bad_r = 0;
    bool alpha_ok = true;
    for (int ranks = 1; ranks <= 64 && alpha_ok; ++ranks)
        for (int r = 0; r < ranks; ++r) {
            int farthest = 0;
            for (int k = 0; k < ranks; ++k) farthest = std::max(farthest, std::abs(k - r));
            if (alpha(ranks, r) != farthest) {
                alpha_ok = false;
                bad_n = ranks;
                bad_r = r;
                break;
            }
        }
    out.require(alpha_ok, fmt("alpha(%d, %d) != farthest-rank distance", bad_n, bad_r));
    out.headline = fmt("j=1 wave at v_min (%.2f%% off); all-to-all absorbs the delay in one "
                       "period; alpha exact for every injector up to 64 ranks",
                       100.0 * dev);
    return out;
}

// 6. Collectives: a synchronizing one annihilates the wave, a transparent
// gather and a small reduction tree let it through at model speed.
Outcome criterion6() {
    Outcome out;
    auto band_speed = [](const std::vector<FrontPoint>& front, int lo, int hi) {
        std::vector<FrontPoint> pts;
        for (const auto& p : front)
            if (p.rank >= lo && p.rank <= hi) pts.push_back(p);
        return measure_speed(pts, 0, SlopeEstimator::LeastSquares).speed_ranks_per_s;
    };

    SimConfig sync = chain(60, 1, ConcurrencyScheme::MWSDim);
    sync.delays.push_back({5, 1, 0.4});
    sync.collectives.push_back({CollectiveClass::Synchronizing, 3, 0, 2, 0.01});
    sync.iterations = 40;
    Timeline stl = simulate(sync);
    double fence_end = 0.0;
    for (const auto& row : stl.per_rank)
        for (const auto& iv : row)
            if (iv.phase == Phase::Collective) fence_end = std::max(fence_end, iv.end_s);
    out.require(fence_end > 0.0, "no collective interval recorded");
    double worst = 0.0;
    for (const auto& row : stl.per_rank)
        for (const auto& iv : row)
            if (iv.phase == Phase::Wait && iv.start_s >= fence_end)
                worst = std::max(worst, iv.end_s - iv.start_s);
    out.require(worst <= kComm + 1e-12,
                fmt("a %.6f s wait survived the synchronizing collective", worst));

    SimConfig gather = chain(60, 1, ConcurrencyScheme::MWSDim);
    gather.delays.push_back({5, 1, 0.4});
    gather.collectives.push_back({CollectiveClass::TransparentGather, 20, 0, 2, 0.005});
    gather.iterations = 60;
    Timeline gtl = simulate(gather);
    auto gfront = detect_front(gtl, 5, default_front_threshold(gather), FrontDirection::Up);
    out.require(gfront.back().rank >= 55,
                fmt("wave died at rank %d crossing the gather", gfront.back().rank));
    double pre = band_speed(gfront, 8, 20);
    double post = band_speed(gfront, 28, 55);
    double gratio = post / pre;
    out.require(gratio >= 0.95 && gratio <= 1.05,
                fmt("gather changed the wave speed: post/pre %.3f", gratio));

    // Tree fold lifts are a few hops * 0.5 ms, well under one period but above
    // the default threshold, so the front detector gets an explicit one.
    SimConfig tree = chain(60, 1, ConcurrencyScheme::MWSDim);
    tree.delays.push_back({5, 1, 0.4});
    tree.collectives.push_back({CollectiveClass::TreeReduce, 20, 0, 2, 0.0005});
    tree.iterations = 60;
    Timeline rtl = simulate(tree);
    auto tfront = detect_front(rtl, 5, 0.02, FrontDirection::Up);
    out.require(tfront.back().rank >= 55,
                fmt("wave died at rank %d crossing the reduction tree", tfront.back().rank));
    double tpost = band_speed(tfront, 28, 55);
    double tdev = std::fabs(tpost / predict_speed(tree).v_min_ranks_per_s - 1.0);
    out.require(tdev <= 0.05,
                fmt("post-reduction speed %.2f%% off v_min", 100.0 * tdev));
    out.headline = fmt("synchronizing fence kills the wave; gather keeps it (post/pre %.3f); "
                       "reduction tree keeps it within %.2f%% of v_min",
                       gratio, 100.0 * tdev);
    return out;
}

// 7. Noise damps the wave: decay grows with injected power, the three noise
// families are compared at a fixed power, and the seconds-scale benchmark
// lands in the analytically expected range.
Outcome criterion7() {
    Outcome out;
    const int n = 120, iters = 200, injector = 2;
    const double d0 = 0.1;
    const std::vector<double> powers{0.02, 0.05, 0.091, 0.15};
    const std::vector<std::uint64_t> seeds{101, 102, 103, 104, 105, 106, 107, 108, 109};

    SimConfig proto = chain(n, 1, ConcurrencyScheme::MWSDim);
    proto.delays.push_back({injector, 1, d0});
    proto.iterations = iters;
    double silent_total = double(n) * iters * (kExec + silent_iteration_comm(proto));

    // Shot length is half the compute quantum: calibration then moves the
    // occurrence between 0.05 and 0.35 across the power grid. Letting the
    // occurrence approach one instead makes the stream near-constant, and a
    // constant offset neither spreads nor decays anything.
    auto family_base = [](NoiseFamily family) {
        NoiseSpec spec;
        spec.family = family;
        spec.amplitude_s = 0.006;
        spec.occurrence_prob = 0.1;
        spec.mean_s = 0.001;
        spec.lo_s = 0.0;
        spec.hi_s = 0.002;
        return spec;
    };

    std::map<NoiseFamily, std::vector<double>> decay_by_family;   // per power, median
    std::map<NoiseFamily, std::vector<double>> survival_by_family;
    for (auto family : {NoiseFamily::Shot, NoiseFamily::Exponential, NoiseFamily::Uniform}) {
        for (double power : powers) {
            // Gate detection on the wave, not on each family's noise floor: at
            // equal power the tail quantiles differ wildly across families, and
            // an adaptive threshold would hand every family a different
            // measurement window. A fixed quarter of the injected delay clips
            // all fronts at the same point of the wave's life.
            double threshold = 0.25 * d0;
            std::vector<double> decays, survivals;
            for (std::uint64_t seed : seeds) {
                NoiseSpec spec = family_base(family);
                spec.seed = seed;
                SimConfig cfg = proto;
                cfg.noise = calibrate_power(spec, n, iters, silent_total, power);
                Timeline tl = simulate(cfg);
                auto front = detect_front(tl, injector, threshold, FrontDirection::Up);
                DecayFit fit = measure_decay(front, threshold, SlopeEstimator::TheilSen);
                decays.push_back(fit.decay_rate_s_per_rank);
                survivals.push_back(fit.survival_time_s);
            }
            decay_by_family[family].push_back(median(decays));
            survival_by_family[family].push_back(median(survivals));
        }
    }

    // Family agreement at the reference power (9.1%).
    std::size_t ref = 2;
    double dmin = 1e300, dmax = 0.0, smin = 1e300, smax = 0.0;
    for (auto& [family, meds] : decay_by_family) {
        dmin = std::min(dmin, meds[ref]);
        dmax = std::max(dmax, meds[ref]);
    }
    for (auto& [family, meds] : survival_by_family) {
        smin = std::min(smin, meds[ref]);
        smax = std::max(smax, meds[ref]);
    }
    out.require(dmax / dmin <= 1.10,
                fmt("decay medians at 9.1%% power spread %.1f%% across families",
                    100.0 * (dmax / dmin - 1.0)));
    out.require(smax / smin <= 1.15,
                fmt("survival medians at 9.1%% power spread %.1f%% across families",
                    100.0 * (smax / smin - 1.0)));

    for (auto& [family, meds] : decay_by_family)
        for (std::size_t i = 1; i < meds.size(); ++i)
            out.require(meds[i] > meds[i - 1],
                        fmt("%s decay median not increasing: %.3g -> %.3g s/rank between %.1f%% "
                            "and %.1f%% power",
                            noise_family_name(family), meds[i - 1], meds[i],
                            100.0 * powers[i - 1], 100.0 * powers[i]));

    // Absolute scale: seconds-long compute, 4.85 s wave, 9.1% exponential
    // noise on an 18-rank chain. The threshold here is only four mean draws
    // above the ambient waits, so the front is clipped to its unbroken prefix.
    SimConfig coarse;
    coarse.topology = build_compact(18, 1, 8, Boundary::OpenChain);
    coarse.scheme = ConcurrencyScheme::MWSDim;
    coarse.t_exec_s = 3.3;
    coarse.comm.uniform_s = 0.05;
    coarse.delays.push_back({2, 1, 4.85});
    coarse.iterations = 24;
    double coarse_total = 18.0 * 24 * (3.3 + silent_iteration_comm(coarse));
    std::vector<double> cdecays, csurvivals;
    for (std::uint64_t seed : seeds) {
        NoiseSpec espec = family_base(NoiseFamily::Exponential);
        espec.seed = seed;
        SimConfig run = coarse;
        run.noise = calibrate_power(espec, 18, 24, coarse_total, 0.091);
        Timeline ctl = simulate(run);
        auto cfront = contiguous_prefix(detect_front(ctl, 2, 0.25 * 4.85, FrontDirection::Up));
        DecayFit cfit = measure_decay(cfront, 0.25 * 4.85, SlopeEstimator::TheilSen);
        cdecays.push_back(cfit.decay_rate_s_per_rank);
        csurvivals.push_back(cfit.survival_time_s);
    }
    double cdecay = median(cdecays), csurvival = median(csurvivals);
    out.require(cdecay >= 0.16 && cdecay <= 1.44,
                fmt("coarse-grain decay %.3f s/rank outside [0.16, 1.44]", cdecay));
    out.require(csurvival >= 11.0 && csurvival <= 102.0,
                fmt("coarse-grain survival %.1f s outside [11, 102]", csurvival));

    out.headline = fmt("decay at 9.1%%: shot %.3g, exponential %.3g, uniform %.3g s/rank "
                       "(spread %.0f%%); coarse run decays %.2f s/rank, survives %.0f s",
                       decay_by_family[NoiseFamily::Shot][ref],
                       decay_by_family[NoiseFamily::Exponential][ref],
                       decay_by_family[NoiseFamily::Uniform][ref], 100.0 * (dmax / dmin - 1.0),
                       cdecay, csurvival);
    return out;
}

// 8. On a ring the injected delay is conserved: the wave hands every other
// rank exactly one idle interval of the injected length (on top of the fence
// quantum that interval swallows), and every clock ends shifted by it. Run
// differencing cannot show this at full precision: the delayed rank clears
// its fences for free while it is ahead, and that comm-quantum debt keeps
// circulating the ring instead of decaying.
Outcome criterion8() {
    Outcome out;
    const double d0 = 3.7;
    const int n = 32, injector = 9;
    SimConfig cfg = chain(n, 1, ConcurrencyScheme::MWSDim, Boundary::Periodic);
    cfg.delays.push_back({injector, 2, d0});
    cfg.iterations = 40;
    SimConfig quiet = cfg;
    quiet.delays.clear();
    Timeline delayed = simulate(cfg);
    Timeline silent = simulate(quiet);

    // Every silent fence wait on the ring is exactly one comm cost.
    double fence = 0.0;
    for (const auto& row : silent.per_rank)
        for (const auto& iv : row)
            if (iv.phase == Phase::Wait) fence = std::max(fence, iv.end_s - iv.start_s);
    out.require(std::fabs(fence - kComm) <= 1e-12,
                fmt("silent ring fence wait %.7f s, expected one comm cost", fence));

    const double cut = 3.0 * kComm;
    double worst = 0.0, total = 0.0, injector_wave = 0.0;
    for (int r = 0; r < n; ++r) {
        double wave = 0.0;
        for (const auto& iv : delayed.per_rank[std::size_t(r)]) {
            if (iv.phase != Phase::Wait) continue;
            double len = iv.end_s - iv.start_s;
            if (len > cut) wave += len - fence;
        }
        total += wave;
        if (r == injector)
            injector_wave = wave;
        else
            worst = std::max(worst, std::fabs(wave - d0));
    }
    out.require(worst <= 1e-9 * d0,
                fmt("a rank's wave idle is off the injected delay by %.3g s", worst));
    out.require(injector_wave == 0.0,
                fmt("the injector idled %.3g s on its own wave", injector_wave));
    double expect_total = double(n - 1) * d0;
    out.require(std::fabs(total - expect_total) <= 1e-9 * expect_total,
                fmt("total wave idle %.6f s, injected delay conserves %.6f s", total,
                    expect_total));

    double clock_worst = 0.0;
    for (int r = 0; r < n; ++r)
        clock_worst = std::max(clock_worst,
                               std::fabs(delayed.final_clock_s[std::size_t(r)] -
                                         silent.final_clock_s[std::size_t(r)] - d0));
    out.require(clock_worst <= 2.0 * kComm,
                fmt("final clocks off the uniform delay shift by %.3g s, past fence quantization",
                    clock_worst));
    out.headline = fmt("every ring rank idles exactly the injected %.1f s once (max error %.2g s);"
                       " clocks shift by it to within a fence quantum",
                       d0, worst);
    return out;
}

// 9. Heterogeneous link costs damp the wave; a uniform network does not.
Outcome criterion9() {
    Outcome out;
    SimConfig cfg = chain(64, 1, ConcurrencyScheme::MWSDim);
    cfg.comm.uniform_s = 0.0;
    cfg.comm.domain = CommCostModel::DomainRule{8, 0.0001, 0.002};
    cfg.delays.push_back({3, 1, 0.4});
    cfg.iterations = 80;
    Timeline tl = simulate(cfg);
    double threshold = default_front_threshold(cfg);
    auto front = detect_front(tl, 3, threshold, FrontDirection::Up);
    DecayFit fit = measure_decay(front, threshold);
    out.require(fit.decay_rate_s_per_rank > 1e-6,
                fmt("no damping across domain boundaries (%.3g s/rank)",
                    fit.decay_rate_s_per_rank));

    SimConfig flat = chain(64, 1, ConcurrencyScheme::MWSDim);
    flat.delays = cfg.delays;
    flat.iterations = cfg.iterations;
    Timeline ftl = simulate(flat);
    double fthreshold = default_front_threshold(flat);
    auto ffront = detect_front(ftl, 3, fthreshold, FrontDirection::Up);
    DecayFit ffit = measure_decay(ffront, fthreshold);
    out.require(ffit.decay_rate_s_per_rank <= 1e-6,
                fmt("uniform network damped the wave (%.3g s/rank)",
                    ffit.decay_rate_s_per_rank));
    out.headline = fmt("domain crossings damp the wave at %.2g s/rank; uniform links at %.2g",
                       fit.decay_rate_s_per_rank, ffit.decay_rate_s_per_rank);
    return out;
}

// 10. Bit-identical timelines across repeat runs and across the two engines,
// through the full config -> files pipeline.
Outcome criterion10() {
    Outcome out;
    namespace fs = std::filesystem;
    nlohmann::json doc = {
        {"topology", {{"kind", "compact"}, {"num_ranks", 48}, {"j", 2}}},
        {"concurrency", "mwsdim"},
        {"timing", {{"t_exec_s", kExec}, {"comm_cost_s", kComm}}},
        {"delays", {{{"rank", 5}, {"iteration", 1}, {"seconds", 0.25}}}},
        {"noise",
         {{"family", "exponential"}, {"mean_s", 0.001}, {"power_percent", 5.0}, {"seed", 9}}},
        {"collectives",
         {{{"class", "tree_reduce"}, {"iteration", 3}, {"root", 0}, {"fanout", 2},
           {"duration_s", 0.002}}}},
        {"iterations", 30},
        {"seed", 7},
        {"output", {{"dir", "unset"}, {"formats", {"csv"}}}},
    };
    ExperimentConfig cfg = parse_config(doc.dump());
    fs::path base = fs::temp_directory_path() / "idlewave_acceptance_runs";
    fs::remove_all(base);
    auto run_to = [&](const char* name, bool reference) {
        ExperimentConfig c = cfg;
        c.output.dir = (base / name).string();
        run_simulate(c, reference);
        return slurp((base / name / "timeline.csv").string());
    };
    std::string first = run_to("a", false);
    std::string repeat = run_to("b", false);
    std::string reference = run_to("c", true);
    out.require(!first.empty(), "timeline.csv missing or empty");
    out.require(first == repeat, "repeat run produced different timeline bytes");
    out.require(first == reference, "reference engine produced different timeline bytes");
    fs::remove_all(base);
    out.headline = fmt("timeline bytes identical across repeat runs and both engines (%zu bytes)",
                       first.size());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    struct Entry {
        int number;
        Outcome (*run)();
    };
    const Entry entries[] = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
    };

    int failures = 0, ran = 0;
    for (const Entry& entry : entries) {
        if (!only.empty() && !only.count(entry.number)) continue;
        ++ran;
        Outcome out;
        try {
            out = entry.run();
        } catch (const std::exception& e) {
            out.failures.push_back(std::string("exception: ") + e.what());
        }
        if (out.ok()) {
            std::printf("PASS criterion %d: %s\n", entry.number, out.headline.c_str());
        } else {
            ++failures;
            std::string joined;
            for (const auto& f : out.failures) {
                if (!joined.empty()) joined += "; ";
                joined += f;
            }
            if (!out.headline.empty()) joined += " | measured: " + out.headline;
            std::printf("FAIL criterion %d: %s\n", entry.number, joined.c_str());
        }
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
