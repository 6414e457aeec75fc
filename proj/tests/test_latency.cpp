#include <doctest.h>

#include <stdexcept>
#include <vector>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "timing/latency.hpp"
#include "timing/rng.hpp"

using namespace timing;

TEST_CASE("order_statistic basic ranks") {
    CHECK(order_statistic({5, 1, 3}, 2) == 3);
    CHECK(order_statistic({2, 2, 2}, 3) == 2);
    CHECK(order_statistic({-2, 0, 2, 2, 2, 2}, 4) == 2);
    CHECK_THROWS_AS(order_statistic({1, 2}, 0), std::invalid_argument);
    CHECK_THROWS_AS(order_statistic({1, 2}, 3), std::invalid_argument);
}

TEST_CASE("order_statistic matches a full sort on random multisets") {
    SplitMix rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.next() % 40);
        std::vector<double> values(n);
        for (auto& v : values) v = std::floor(rng.next_u01() * 20.0) - 10.0; // plenty of ties
        const int rank = 1 + static_cast<int>(rng.next() % n);
        CHECK(order_statistic(values, rank) == testsupport::nth_smallest(values, rank));
    }
}

TEST_CASE("line model realizes |i-j| with a zero diagonal") {
    const auto model = LatencyModel::line(4);
    const auto draw = sample_draw(model, 123, 0);
    CHECK(draw(0, 3) == 3.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(draw(i, j) == std::abs(i - j));
}

TEST_CASE("line model triangle equality along the line") {
    const auto model = LatencyModel::line(9);
    const auto draw = sample_draw(model, 0, 0);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j)
            for (int k = 0; k < 9; ++k) {
                const double via = draw(i, k) + draw(k, j);
                CHECK(via >= draw(i, j));
                const bool between = k >= std::min(i, j) && k <= std::max(i, j);
                CHECK((via == draw(i, j)) == between);
            }
}

TEST_CASE("cluster model entries and validation") {
    const auto model = LatencyModel::cluster(2, 2, 1.0, 10.0);
    const auto draw = model.draw(0, 0);
    CHECK(draw(0, 1) == 1.0);
    CHECK(draw(0, 2) == 10.0);
    CHECK(draw(2, 3) == 1.0);
    CHECK(model.node_tag(0) == "X");
    CHECK(model.node_tag(3) == "Y");
    CHECK_THROWS_AS(LatencyModel::cluster(2, 2, 10.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(LatencyModel::cluster(0, 2, 1.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(LatencyModel::cluster(2, 2, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("draws are pure functions of (model, seed, round)") {
    const auto model = world_model_from_table(bundled_world_table());
    const auto a = sample_draw(model, 42, 7);
    const auto b = sample_draw(model, 42, 7);
    CHECK(a.values == b.values);
    const auto c = sample_draw(model, 42, 8);
    CHECK(a.values != c.values);
    const auto d = sample_draw(model, 43, 7);
    CHECK(a.values != d.values);
}

TEST_CASE("bundled world table shape and weights") {
    const auto& t = bundled_world_table();
    CHECK(t.city_count() == 11);
    CHECK(t.total_weight() == 115);
    CHECK(t.cities[0] == "Amsterdam");
    CHECK(t.weights[0] == 18);
    CHECK(t.ms[0][1] == doctest::Approx(18.898)); // Amsterdam -> Dublin
    CHECK(t.ms[6][7] == doctest::Approx(137.450)); // Seoul -> Sydney
}

TEST_CASE("world model node expansion and log means") {
    const auto model = world_model_from_table(bundled_world_table());
    CHECK(model.n() == 115);
    int amsterdam = 0;
    for (int i = 0; i < model.n(); ++i)
        if (model.node_tag(i) == "Amsterdam") ++amsterdam;
    CHECK(amsterdam == 18);

    const auto* w = model.as_world();
    REQUIRE(w != nullptr);
    CHECK(w->mean_log[6][7] == doctest::Approx(std::log(137.450)).epsilon(1e-12));
    CHECK(w->intra_mean_log == 1.0);
    CHECK(w->intra_sigma == 0.5);
    CHECK(w->inter_sigma == 0.8);
}

TEST_CASE("world samples are strictly positive and lognormal in the mean") {
    // Two-city slice: one Amsterdam node, one Dublin node.
    PingTable t;
    t.cities = {"A", "B"};
    t.ms = {{0.0, 18.898}, {18.929, 0.0}};
    t.weights = {1, 1};
    const auto model = world_model_from_table(t);
    REQUIRE(model.n() == 2);

    double log_sum = 0.0;
    const int trials = 20000;
    for (int r = 0; r < trials; ++r) {
        const double v = model.entry(9, r, 0, 1);
        REQUIRE(v > 0.0);
        log_sum += std::log(v);
    }
    // underlying normal mean is ln(18.898), std 0.8 -> SE ~ 0.8/sqrt(20000)
    CHECK(log_sum / trials == doctest::Approx(std::log(18.898)).epsilon(0.01));
}

TEST_CASE("single-city table uses the intra-city distribution for every pair") {
    PingTable t;
    t.cities = {"Solo"};
    t.ms = {{0.0}};
    t.weights = {2};
    const auto model = world_model_from_table(t);
    REQUIRE(model.n() == 2);
    double log_sum = 0.0;
    const int trials = 20000;
    for (int r = 0; r < trials; ++r) log_sum += std::log(model.entry(1, r, 1, 0));
    CHECK(log_sum / trials == doctest::Approx(1.0).epsilon(0.02)); // intra mean-log is 1
}

TEST_CASE("largest-remainder weight normalization") {
    const auto& t = bundled_world_table();
    const auto scaled = normalize_weights(t.weights, 100);
    int total = 0;
    for (int v : scaled) total += v;
    CHECK(total == 100);
    const std::vector<int> expected{16, 15, 15, 7, 7, 9, 4, 5, 6, 3, 13};
    CHECK(scaled == expected);

    const auto same = normalize_weights(t.weights, 115);
    CHECK(same == t.weights);
}

TEST_CASE("ping table rejects malformed inputs") {
    CHECK_THROWS_AS(PingTable::parse_csv("city,A,weight\nA,0.0,0\n"), std::invalid_argument);
    CHECK_THROWS_AS(PingTable::parse_csv("city,A,B,weight\nA,0.0,-3,1\nB,3,0.0,1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(PingTable::parse_csv("city,A,B,weight\nA,0.0,5,1\n"), std::invalid_argument);
    // grossly asymmetric
    CHECK_THROWS_AS(PingTable::parse_csv("city,A,B,weight\nA,0.0,5,1\nB,50,0.0,1\n"),
                    std::invalid_argument);
}

TEST_CASE("data file matches the bundled table") {
    std::ifstream in(std::string(TIMING_SOURCE_DIR) + "/data/world_pings.csv", std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == std::string(bundled_world_csv()));
}

TEST_CASE("explicit matrix entries") {
    std::vector<MatrixEntry> entries(9);
    for (auto& e : entries) e = MatrixEntry{MatrixEntry::Kind::SharedTwoPoint, 1.0, 3.0, 0.5, 0};
    const auto model = LatencyModel::explicit_matrix(3, entries);
    CHECK_FALSE(model.deterministic());
    int high = 0;
    for (int round = 0; round < 2000; ++round) {
        const auto d = model.draw(5, round);
        // all off-diagonal entries share the round's draw
        const double v = d(0, 1);
        CHECK((v == 1.0 || v == 3.0));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) CHECK(d(i, j) == v);
        if (v == 3.0) ++high;
    }
    CHECK(high == doctest::Approx(1000).epsilon(0.1));

    CHECK_THROWS_AS(LatencyModel::explicit_matrix(3, {}), std::invalid_argument);
    std::vector<MatrixEntry> bad(9, MatrixEntry{MatrixEntry::Kind::TwoPoint, 3.0, 1.0, 0.5, 0});
    CHECK_THROWS_AS(LatencyModel::explicit_matrix(3, bad), std::invalid_argument);
}
