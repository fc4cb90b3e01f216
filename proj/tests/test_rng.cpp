#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "strurw/rng.hpp"

using namespace strurw;

TEST_CASE("same seed gives identical streams, different seeds differ") {
    Xoshiro256 a(42), b(42), c(43);
    bool all_equal = true, any_differ = false;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t x = a(), y = b(), z = c();
        all_equal = all_equal && (x == y);
        any_differ = any_differ || (x != z);
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("uniform lies in [0, 1) and has roughly the right mean") {
    Xoshiro256 rng(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // Mean of n iid U[0,1) draws: sd = 1/sqrt(12 n) ~ 9.1e-4; allow 5 sd.
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("substreams are deterministic functions of (seed, tags)") {
    CHECK(substream_seed(1, 2, 3) == substream_seed(1, 2, 3));
    CHECK(substream(5, 9)() == substream(5, 9)());
}

TEST_CASE("distinct tags give distinct substreams") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t a = 0; a < 20; ++a)
        for (std::uint64_t b = 0; b < 20; ++b) seeds.insert(substream_seed(123, a, b));
    CHECK(seeds.size() == 400);

    // Tag order matters and the default second tag is 0.
    CHECK(substream_seed(1, 2, 3) != substream_seed(1, 3, 2));
    CHECK(substream_seed(1, 2) == substream_seed(1, 2, 0));
}

TEST_CASE("substreams with different base seeds differ") {
    CHECK(substream_seed(0, 1, 1) != substream_seed(1, 1, 1));
}
