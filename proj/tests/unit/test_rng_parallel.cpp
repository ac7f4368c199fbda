#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "nemfp/parallel.hpp"
#include "nemfp/rng.hpp"

using namespace nemfp;

TEST(CounterStream, PureFunctionOfKeyAndCounter) {
    const CounterStream s(123);
    EXPECT_EQ(s.bits(7), CounterStream(123).bits(7));
    EXPECT_NE(s.bits(7), s.bits(8));
    EXPECT_NE(s.bits(7), CounterStream(124).bits(7));
}

TEST(CounterStream, UniformStaysInsideTheOpenInterval) {
    const CounterStream s(0);
    for (std::uint64_t k = 0; k < 10000; ++k) {
        const double u = s.uniform(k);
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(CounterStream, NormalMoments) {
    const CounterStream s(99);
    const std::size_t n = 200000;
    double m1 = 0, m2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double z = s.normal(k);
        m1 += z;
        m2 += z * z;
    }
    m1 /= n;
    m2 /= n;
    EXPECT_LT(std::abs(m1), 4 / std::sqrt(double(n)));
    EXPECT_LT(std::abs(m2 - 1), 4 * std::sqrt(2.0 / n));
}

TEST(DeriveSeed, DistinctForNeighbouringArguments) {
    std::set<std::uint64_t> keys;
    for (std::uint64_t a = 0; a < 50; ++a)
        for (std::uint64_t b = 0; b < 50; ++b) keys.insert(derive_seed(1, a, b));
    EXPECT_EQ(keys.size(), 2500u);
    EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
    static_assert(derive_seed(5, 6, 7) == derive_seed(5, 6, 7));
}

TEST(ParallelFor, ResultsIndependentOfWorkers) {
    auto run = [](unsigned w) {
        std::vector<double> out(1001);
        parallel_for(out.size(), w, [&](std::size_t i) { out[i] = CounterStream(derive_seed(4, i)).normal(0); });
        return out;
    };
    const auto ref = run(1);
    for (unsigned w : {2u, 3u, 8u}) EXPECT_EQ(run(w), ref);
}

TEST(ParallelFor, VisitsEveryIndexOnceAndHandlesEmptyRanges) {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    int calls = 0;
    parallel_for(0, 4, [&](std::size_t) { ++calls; });
    EXPECT_EQ(calls, 0);
}

TEST(ParallelFor, RethrowsTheLowestChunkError) {
    try {
        parallel_for(100, 4, [](std::size_t i) {
            if (i == 80 || i == 30) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "30");
    }
}
