#include "parkcast/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

using parkcast::Rng;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    Rng c(42), d(43);
    bool differ = false;
    for (int i = 0; i < 10; ++i) differ |= c.next_u64() != d.next_u64();
    EXPECT_TRUE(differ);
}

TEST(Rng, UniformInUnitInterval) {
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, UniformIntInRangeAndCoversValues) {
    Rng r(7);
    std::vector<int> hits(5, 0);
    for (int i = 0; i < 5000; ++i) ++hits[r.uniform_int(5)];
    for (int h : hits) EXPECT_GT(h, 800);
    EXPECT_THROW(r.uniform_int(0), parkcast::Error);
}

TEST(Rng, NormalMomentsRoughlyStandard) {
    Rng r(123);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Rng, PoissonMeanMatches) {
    Rng r(5);
    for (double lambda : {0.5, 3.0, 45.0}) {
        const int n = 20000;
        double sum = 0;
        for (int i = 0; i < n; ++i) sum += static_cast<double>(r.poisson(lambda));
        EXPECT_NEAR(sum / n, lambda, lambda * 0.05 + 0.05);
    }
    EXPECT_EQ(r.poisson(0.0), 0u);
    EXPECT_THROW(r.poisson(-1.0), parkcast::Error);
}

TEST(Rng, ShuffleIsSeededPermutation) {
    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> w = v;
    Rng a(9), b(9);
    a.shuffle(v);
    b.shuffle(w);
    EXPECT_EQ(v, w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(20);
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(sorted, expect);
}

TEST(Rng, ForkGivesIndependentReproducibleStreams) {
    Rng base(100);
    Rng f1 = base.fork(0);
    Rng f2 = base.fork(1);
    Rng f1b = Rng(100).fork(0);
    EXPECT_EQ(f1.next_u64(), f1b.next_u64());
    EXPECT_NE(f1.next_u64(), f2.next_u64());
    // Forking must not disturb the parent stream.
    Rng fresh(100);
    EXPECT_EQ(base.next_u64(), fresh.next_u64());
}
