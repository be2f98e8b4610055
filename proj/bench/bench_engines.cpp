// Relative cost of the OpenMP lockstep engine against the serial
// dependency-graph reference on a large chain with one idle wave. Timelines
// are not recorded so the stepping loops dominate.
// Usage: idlewave_bench [num_ranks] [iterations]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "idlewave/simulator.hpp"
#include "idlewave/topology.hpp"

using namespace idlewave;

int main(int argc, char** argv) {
    int num_ranks = argc > 1 ? std::atoi(argv[1]) : 20000;
    int iterations = argc > 2 ? std::atoi(argv[2]) : 20;

    SimConfig cfg;
    cfg.topology = build_compact(num_ranks, 6, 8, Boundary::OpenChain);
    cfg.scheme = ConcurrencyScheme::MWSDim;
    cfg.t_exec_s = 0.013;
    cfg.comm.uniform_s = 0.0001;
    cfg.delays.push_back({num_ranks / 3, 1, 0.5});
    cfg.iterations = iterations;

    SimOptions parallel;
    parallel.record_timeline = false;
    SimOptions serial = parallel;
    serial.parallel = false;

    auto time_ms = [](auto&& fn) {
        auto start = std::chrono::steady_clock::now();
        fn();
        auto end = std::chrono::steady_clock::now();
        return std::chrono::duration<double, std::milli>(end - start).count();
    };

    Timeline threaded, single, reference;
    double threaded_ms = time_ms([&] { threaded = simulate(cfg, parallel); });
    double single_ms = time_ms([&] { single = simulate(cfg, serial); });
    double reference_ms = time_ms([&] { reference = simulate_reference(cfg, serial); });

    std::printf("%d ranks x %d iterations, reach 6 chain\n", num_ranks, iterations);
    std::printf("lockstep (threads) %10.2f ms\n", threaded_ms);
    std::printf("lockstep (serial)  %10.2f ms  (%.2fx)\n", single_ms, single_ms / threaded_ms);
    std::printf("reference graph    %10.2f ms  (%.2fx)\n", reference_ms,
                reference_ms / threaded_ms);

    if (threaded.final_clock_s != single.final_clock_s ||
        threaded.final_clock_s != reference.final_clock_s) {
        std::fprintf(stderr, "engines disagree on final clocks\n");
        return 1;
    }
    std::printf("final clocks agree across all three\n");
    return 0;
}
