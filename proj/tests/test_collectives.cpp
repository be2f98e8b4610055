#include <algorithm>
#include <vector>

#include "doctest.h"
#include "idlewave/collectives.hpp"
#include "idlewave/error.hpp"

using namespace idlewave;

TEST_SUITE("collectives") {

TEST_CASE("synchronizing fence aligns everyone at the straggler") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::Synchronizing;
    spec.duration_s = 0.5;
    auto exits = apply_collective(spec, {1.0, 5.0, 3.0});
    CHECK(exits == std::vector<double>{5.5, 5.5, 5.5});
}

TEST_CASE("binomial tree exits, hand-folded") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::TreeReduce;
    spec.fanout = 2;
    spec.root = 0;
    spec.duration_s = 1.0;

    // 8 ranks entering at 0: leaves fold up pairwise, the root folds
    // strides 1, 2, 4 sequentially, everyone owes one final hop.
    auto exits = apply_collective(spec, std::vector<double>(8, 0.0));
    CHECK(exits == std::vector<double>{4, 1, 2, 1, 3, 1, 2, 1});
}

TEST_CASE("trinomial tree on a non-power grid, hand-folded") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::TreeReduce;
    spec.fanout = 3;
    spec.root = 0;
    spec.duration_s = 1.0;
    auto exits = apply_collective(spec, std::vector<double>(5, 0.0));
    CHECK(exits == std::vector<double>{4, 1, 1, 2, 1});
}

TEST_CASE("tree root rotates the exit pattern") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::TreeReduce;
    spec.fanout = 3;
    spec.root = 2;
    spec.duration_s = 1.0;
    auto exits = apply_collective(spec, std::vector<double>(5, 0.0));
    CHECK(exits == std::vector<double>{2, 1, 4, 1, 1});
}

TEST_CASE("tree depth grows with the logarithm only") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::TreeReduce;
    spec.fanout = 2;
    spec.root = 0;
    spec.duration_s = 1.0;
    auto exits = apply_collective(spec, std::vector<double>(64, 0.0));
    double worst = *std::max_element(exits.begin(), exits.end());
    CHECK(worst == 7.0);  // 6 fold levels + the final hop
    CHECK(exits[1] == 1.0);
}

TEST_CASE("tree reduce does not synchronize the leaves") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::TreeReduce;
    spec.fanout = 2;
    spec.root = 0;
    spec.duration_s = 1.0;
    std::vector<double> entries(8, 0.0);
    entries[1] = 10.0;  // a straggler on the root's first fold
    auto exits = apply_collective(spec, entries);
    CHECK(exits[0] == 14.0);  // root folds 11, 12, 13, sends at 14
    CHECK(exits[2] == 2.0);   // subtree under 2 never hears about it
    CHECK(exits[1] == 11.0);
}

TEST_CASE("raising an entry never lowers an exit") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::TreeReduce;
    spec.fanout = 3;
    spec.root = 4;
    spec.duration_s = 0.25;
    std::vector<double> base(13, 1.0);
    auto before = apply_collective(spec, base);
    for (std::size_t bump = 0; bump < base.size(); ++bump) {
        auto entries = base;
        entries[bump] += 3.0;
        auto after = apply_collective(spec, entries);
        for (std::size_t r = 0; r < base.size(); ++r) CHECK(after[r] >= before[r]);
    }
}

TEST_CASE("transparent gather blocks only the root") {
    CollectiveSpec spec;
    spec.cls = CollectiveClass::TransparentGather;
    spec.root = 1;
    spec.duration_s = 0.5;
    auto exits = apply_collective(spec, {0.0, 0.0, 10.0});
    CHECK(exits == std::vector<double>{0.5, 10.5, 10.5});
}

TEST_CASE("reduce algorithm selector") {
    CHECK(collective_class_for_reduce_algorithm(1) == CollectiveClass::Synchronizing);
    for (int a : {2, 4, 5, 6, 7})
        CHECK(collective_class_for_reduce_algorithm(a) == CollectiveClass::TransparentGather);
    for (int a : {8, 9, 10, 11})
        CHECK(collective_class_for_reduce_algorithm(a) == CollectiveClass::TreeReduce);
    CHECK_THROWS_AS(collective_class_for_reduce_algorithm(3), ConfigError);
    CHECK_THROWS_AS(collective_class_for_reduce_algorithm(12), ConfigError);
    CHECK_THROWS_AS(collective_class_for_reduce_algorithm(0), ConfigError);
}

TEST_CASE("parameter validation") {
    CollectiveSpec spec;
    CHECK_THROWS_AS(apply_collective(spec, {}), InvalidRank);

    spec.root = 3;
    CHECK_THROWS_AS(apply_collective(spec, {0.0, 0.0}), InvalidRank);

    spec.root = 0;
    spec.duration_s = -1.0;
    CHECK_THROWS_AS(apply_collective(spec, {0.0, 0.0}), InvalidTiming);

    spec.duration_s = 1.0;
    spec.cls = CollectiveClass::TreeReduce;
    spec.fanout = 1;
    CHECK_THROWS_AS(apply_collective(spec, {0.0, 0.0}), InvalidTiming);
}

}  // TEST_SUITE
