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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "bvq/qubo.hpp"

namespace bvq {

struct Sample {
    BinaryVector bits;
    double energy = 0.0;
    std::size_t occurrences = 1;
};

// Distinct vectors sorted by (energy, lexicographic bits).
struct SampleSet {
    std::vector<Sample> entries;
    std::string sampler_name;
    std::uint64_t seed = 0;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
    const Sample& best() const;

    // Aggregates repeated vectors, recomputes energies against `q` and sorts.
    static SampleSet from_reads(const QuboProblem& q, const std::vector<BinaryVector>& reads,
                                std::string sampler_name, std::uint64_t seed);
};

// Columns rank,energy,occurrences,bits.
void write_sample_csv(std::ostream& out, const SampleSet& samples);
void save_sample_csv(const std::filesystem::path& path, const SampleSet& samples);

// Energy change from flipping bit i, in O(degree(i)).
double incremental_delta(const QuboProblem& q, const BinaryVector& x, std::size_t i);

inline constexpr std::size_t kBruteForceMaxBits = 24;

// Exhaustive enumeration; entry 0 is a global minimum.
SampleSet brute_force_sample(const QuboProblem& q, std::size_t top_k,
                             std::size_t max_bits = kBruteForceMaxBits);

// Geometric inverse-temperature ramp for single-bit Metropolis annealing.
struct AnnealSchedule {
    double beta_start = 0.1;
    double beta_end = 10.0;
    std::size_t num_sweeps = 1000;
    std::size_t num_reads = 20;

    void validate() const;
    double beta(std::size_t sweep) const;
};

SampleSet simulated_annealing_sample(const QuboProblem& q, const AnnealSchedule& schedule,
                                     std::uint64_t seed);

// One annealing restart from a uniform random start; exposed for tests.
BinaryVector anneal_once(const QuboProblem& q, const AnnealSchedule& schedule,
                         std::uint64_t read_seed);

}  // namespace bvq
