// Copyright 2026 The bvq Authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "bvq/error.hpp"
#include "bvq/samplers.hpp"
#include "oracles.hpp"

using namespace bvq;

TEST_CASE("incremental delta matches the energy difference") {
    const QuboProblem q({1.0, 2.0}, {{{0, 1}, 4.0}});
    CHECK(incremental_delta(q, BinaryVector::from_string("00"), 0) == 1.0);
    CHECK(incremental_delta(q, BinaryVector::from_string("11"), 1) == -6.0);
    CHECK(incremental_delta(QuboProblem({0.0, 0.0, 0.0}), BinaryVector::from_string("101"), 2) == 0.0);

    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        const auto p = bvq::testing::random_qubo(10, rng, 0.6);
        const auto x = bvq::testing::random_bits(10, rng);
        for (std::size_t i = 0; i < 10; ++i) {
            auto y = x;
            y.flip(i);
            CHECK(incremental_delta(p, x, i) == doctest::Approx(qubo_energy(p, y) - qubo_energy(p, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("brute force on small problems") {
    const QuboProblem q({1.0, -1.0}, {{{0, 1}, 6.0}}, 0.5);
    const auto best = brute_force_sample(q, 1);
    REQUIRE(best.size() == 1);
    CHECK(best.best().bits.to_string() == "01");
    CHECK(best.best().energy == -0.5);

    const auto all = brute_force_sample(q, 10);
    REQUIRE(all.size() == 4);
    const double energies[] = {-0.5, 0.5, 1.5, 6.5};
    for (std::size_t r = 0; r < 4; ++r) CHECK(all.entries[r].energy == energies[r]);

    CHECK(brute_force_sample(QuboProblem({-1.0}), 1).best().bits.to_string() == "1");

    const auto flat = brute_force_sample(QuboProblem({0.0, 0.0}), 4);
    REQUIRE(flat.size() == 4);
    const char* order[] = {"00", "01", "10", "11"};
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(flat.entries[r].energy == 0.0);
        CHECK(flat.entries[r].bits.to_string() == order[r]);
    }
    CHECK_THROWS_AS(brute_force_sample(q, 0), InvalidArgument);
    CHECK_THROWS_AS(brute_force_sample(QuboProblem(std::vector<double>(5, 0.0)), 1, 4), InvalidArgument);
}

TEST_CASE("brute force keeps the true lowest states") {
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        const auto q = bvq::testing::random_qubo(9, rng);
        std::vector<std::pair<double, BinaryVector>> ref;
        for (const auto& x : bvq::testing::all_points(9))
            ref.emplace_back(bvq::testing::reference_qubo_energy(q, x), x);
        std::sort(ref.begin(), ref.end());
        const auto got = brute_force_sample(q, 12);
        REQUIRE(got.size() == 12);
        for (std::size_t r = 0; r < 12; ++r) {
            CHECK(got.entries[r].energy == doctest::Approx(ref[r].first).epsilon(1e-12));
            CHECK(got.entries[r].bits == ref[r].second);
        }
    }
}

TEST_CASE("sample sets aggregate and sort reads") {
    const QuboProblem q({1.0, -1.0}, {{{0, 1}, 6.0}}, 0.5);
    const std::vector<BinaryVector> reads = {BinaryVector::from_string("11"), BinaryVector::from_string("01"),
                                             BinaryVector::from_string("01")};
    const auto set = SampleSet::from_reads(q, reads, "test", 9);
    REQUIRE(set.size() == 2);
    CHECK(set.entries[0].bits.to_string() == "01");
    CHECK(set.entries[0].occurrences == 2);
    CHECK(set.entries[1].energy == 6.5);

    std::ostringstream csv;
    write_sample_csv(csv, set);
    CHECK(csv.str() == "rank,energy,occurrences,bits\n0,-0.5,2,01\n1,6.5,1,11\n");
    CHECK_THROWS_AS(SampleSet{}.best(), Error);
}

TEST_CASE("anneal schedule") {
    AnnealSchedule s;
    CHECK(s.beta(0) == doctest::Approx(0.1));
    CHECK(s.beta(s.num_sweeps - 1) == doctest::Approx(10.0));
    CHECK(s.beta(499) == doctest::Approx(0.1 * std::pow(100.0, 499.0 / 999.0)));
    s.beta_start = -1.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    AnnealSchedule reads;
    reads.num_reads = 0;
    CHECK_THROWS_AS(reads.validate(), InvalidArgument);
}

TEST_CASE("simulated annealing finds small optima and is seeded") {
    const QuboProblem q({1.0, -1.0}, {{{0, 1}, 6.0}}, 0.5);
    const AnnealSchedule s;
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
        CHECK(simulated_annealing_sample(q, s, seed).best().bits.to_string() == "01");
        CHECK(simulated_annealing_sample(q, s, seed).best().energy == -0.5);
    }
    CHECK(simulated_annealing_sample(QuboProblem({-1.0}), s, 3).best().bits.to_string() == "1");

    Rng rng(17);
    const auto big = bvq::testing::random_qubo(14, rng);
    AnnealSchedule quick;
    quick.num_sweeps = 200;
    const auto a = simulated_annealing_sample(big, quick, 42);
    const auto b = simulated_annealing_sample(big, quick, 42);
    REQUIRE(a.size() == b.size());
    std::size_t total = 0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        CHECK(a.entries[r].bits == b.entries[r].bits);
        CHECK(a.entries[r].energy == b.entries[r].energy);
        CHECK(a.entries[r].energy == doctest::Approx(bvq::testing::reference_qubo_energy(big, a.entries[r].bits)));
        if (r > 0) CHECK(a.entries[r - 1].energy <= a.entries[r].energy);
        total += a.entries[r].occurrences;
    }
    CHECK(total == quick.num_reads);
    CHECK(a.best().energy == doctest::Approx(bvq::testing::exhaustive_minimum(big)));
    CHECK(anneal_once(big, quick, 5) == anneal_once(big, quick, 5));
}
