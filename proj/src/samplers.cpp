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

#include "bvq/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "bvq/error.hpp"
#include "bvq/random.hpp"
#include "bvq/textio.hpp"

namespace bvq {

namespace {

bool sample_less(const Sample& a, const Sample& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.bits < b.bits;
}

}  // namespace

const Sample& SampleSet::best() const {
    if (entries.empty()) throw Error("sample set is empty");
    return entries.front();
}

SampleSet SampleSet::from_reads(const QuboProblem& q, const std::vector<BinaryVector>& reads,
                                std::string sampler_name, std::uint64_t seed) {
    std::map<BinaryVector, std::size_t> counts;
    for (const auto& r : reads) ++counts[r];
    SampleSet set;
    set.sampler_name = std::move(sampler_name);
    set.seed = seed;
    set.entries.reserve(counts.size());
    for (const auto& [bits, count] : counts) set.entries.push_back({bits, qubo_energy(q, bits), count});
    std::sort(set.entries.begin(), set.entries.end(), sample_less);
    return set;
}

void write_sample_csv(std::ostream& out, const SampleSet& samples) {
    out << "rank,energy,occurrences,bits\n";
    for (std::size_t r = 0; r < samples.entries.size(); ++r) {
        const auto& e = samples.entries[r];
        out << r << ',' << textio::format_decimal(e.energy) << ',' << e.occurrences << ','
            << e.bits.to_string() << '\n';
    }
}

void save_sample_csv(const std::filesystem::path& path, const SampleSet& samples) {
    auto out = textio::open_output(path);
    write_sample_csv(out, samples);
}

double incremental_delta(const QuboProblem& q, const BinaryVector& x, std::size_t i) {
    if (x.size() != q.n())
        throw DimensionError("dimension mismatch: binary vector has length " +
                             std::to_string(x.size()) + " but the problem dimension is " +
                             std::to_string(q.n()));
    if (i >= q.n())
        throw InvalidArgument("flip index " + std::to_string(i) + " out of range for n=" +
                              std::to_string(q.n()));
    double field = q.linear()[i];
    for (const auto& nb : q.neighbors(i))
        if (x[nb.index]) field += nb.coupling;
    return x[i] ? -field : field;
}

SampleSet brute_force_sample(const QuboProblem& q, std::size_t top_k, std::size_t max_bits) {
    const std::size_t n = q.n();
    if (n > max_bits)
        throw InvalidArgument("brute force is capped at " + std::to_string(max_bits) +
                              " bits, problem has " + std::to_string(n));
    if (top_k < 1) throw InvalidArgument("top_k must be at least 1");

    // Gray-code walk with O(degree) energy updates. Kept candidates are
    // re-scored exactly below.
    const std::uint64_t total = std::uint64_t{1} << n;
    const std::size_t keep = static_cast<std::size_t>(std::min<std::uint64_t>(top_k, total));
    using Entry = std::pair<double, std::uint64_t>;
    std::priority_queue<Entry> worst_first;

    // Heap keys put x[0] in the most significant position; ties at the
    // top_k cut keep the lexicographically smallest vectors.
    std::vector<double> field(q.linear());
    std::uint64_t key = 0;
    double energy = q.offset();
    for (std::uint64_t step = 0;; ++step) {
        const Entry entry{energy, key};
        if (worst_first.size() < keep) {
            worst_first.push(entry);
        } else if (entry < worst_first.top()) {
            worst_first.pop();
            worst_first.push(entry);
        }
        if (step + 1 == total) break;
        const auto bit = static_cast<std::size_t>(__builtin_ctzll(step + 1));
        const std::uint64_t mask = std::uint64_t{1} << (n - 1 - bit);
        const bool was_set = (key & mask) != 0;
        energy += was_set ? -field[bit] : field[bit];
        const double sign = was_set ? -1.0 : 1.0;
        for (const auto& nb : q.neighbors(bit)) field[nb.index] += sign * nb.coupling;
        key ^= mask;
    }

    std::vector<BinaryVector> reads;
    reads.reserve(worst_first.size());
    while (!worst_first.empty()) {
        const auto k = worst_first.top().second;
        worst_first.pop();
        BinaryVector x(n);
        for (std::size_t i = 0; i < n; ++i) x.set(i, (k >> (n - 1 - i)) & 1U);
        reads.push_back(std::move(x));
    }
    return SampleSet::from_reads(q, reads, "brute_force", 0);
}

void AnnealSchedule::validate() const {
    if (!(beta_start > 0.0) || !std::isfinite(beta_start))
        throw InvalidArgument("beta_start must be positive");
    if (!(beta_end > beta_start) || !std::isfinite(beta_end))
        throw InvalidArgument("beta_end must exceed beta_start");
    if (num_sweeps < 1) throw InvalidArgument("num_sweeps must be at least 1");
    if (num_reads < 1) throw InvalidArgument("num_reads must be at least 1");
}

double AnnealSchedule::beta(std::size_t sweep) const {
    if (num_sweeps == 1) return beta_end;
    const double t = static_cast<double>(sweep) / static_cast<double>(num_sweeps - 1);
    return beta_start * std::pow(beta_end / beta_start, t);
}

BinaryVector anneal_once(const QuboProblem& q, const AnnealSchedule& schedule,
                         std::uint64_t read_seed) {
    const std::size_t n = q.n();
    Rng rng(read_seed);
    BinaryVector x(n);
    for (std::size_t i = 0; i < n; ++i) x.set(i, rng.coin());

    // field[i] = Q_i + sum_j Q_ij x_j, so flipping i costs (1 - 2 x_i) field[i].
    std::vector<double> field(q.linear());
    for (std::size_t i = 0; i < n; ++i)
        if (x[i])
            for (const auto& nb : q.neighbors(i)) field[nb.index] += nb.coupling;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t sweep = 0; sweep < schedule.num_sweeps; ++sweep) {
        const double beta = schedule.beta(sweep);
        rng.shuffle(order);
        for (const std::size_t i : order) {
            const double delta = x[i] ? -field[i] : field[i];
            if (delta > 0.0 && rng.uniform() >= std::exp(-beta * delta)) continue;
            const double sign = x[i] ? -1.0 : 1.0;
            for (const auto& nb : q.neighbors(i)) field[nb.index] += sign * nb.coupling;
            x.flip(i);
        }
    }
    return x;
}

SampleSet simulated_annealing_sample(const QuboProblem& q, const AnnealSchedule& schedule,
                                     std::uint64_t seed) {
    schedule.validate();
    std::vector<BinaryVector> reads(schedule.num_reads);
    for (std::size_t r = 0; r < schedule.num_reads; ++r)
        reads[r] = anneal_once(q, schedule, derive_seed(seed, r));
    return SampleSet::from_reads(q, reads, "simulated_annealing", seed);
}

}  // namespace bvq
