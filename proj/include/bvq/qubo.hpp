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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bvq {

// Point in {0,1}^n. Ordered lexicographically.
class BinaryVector {
 public:
    BinaryVector() = default;
    explicit BinaryVector(std::size_t n) : bits_(n, 0) {}
    explicit BinaryVector(std::vector<std::uint8_t> bits);

    // Parses a string of '0'/'1' characters.
    static BinaryVector from_string(std::string_view text);

    std::size_t size() const { return bits_.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
    void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }
    void flip(std::size_t i) { bits_[i] ^= 1; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }

    std::string to_string() const;
    std::size_t popcount() const;

    friend auto operator<=>(const BinaryVector&, const BinaryVector&) = default;
    friend bool operator==(const BinaryVector&, const BinaryVector&) = default;

 private:
    std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(const BinaryVector& a, const BinaryVector& b);

struct BinaryVectorHash {
    std::size_t operator()(const BinaryVector& v) const noexcept;
};

// Point in {-1,+1}^n.
class SpinVector {
 public:
    SpinVector() = default;
    explicit SpinVector(std::vector<std::int8_t> spins);

    std::size_t size() const { return spins_.size(); }
    std::int8_t operator[](std::size_t i) const { return spins_[i]; }
    const std::vector<std::int8_t>& spins() const { return spins_; }

    friend bool operator==(const SpinVector&, const SpinVector&) = default;

 private:
    std::vector<std::int8_t> spins_;
};

SpinVector binary_to_spin(const BinaryVector& x);
BinaryVector spin_to_binary(const SpinVector& s);

using IndexPair = std::pair<std::size_t, std::size_t>;
using QuadraticMap = std::map<IndexPair, double>;

namespace detail {

// Shared storage for the binary and spin quadratic forms: a linear vector,
// strictly upper-triangular couplings and a constant. Exact zeros are not
// stored.
class QuadraticForm {
 public:
    struct Neighbor {
        std::size_t index;
        double coupling;
    };

    std::size_t n() const { return linear_.size(); }
    double offset() const { return offset_; }
    const std::vector<double>& linear_terms() const { return linear_; }
    const QuadraticMap& quadratic_terms() const { return quadratic_; }
    double coupling(std::size_t i, std::size_t j) const;

    // Row i of the symmetric coupling matrix, zeros omitted.
    const std::vector<Neighbor>& neighbors(std::size_t i) const { return adjacency_[i]; }

    std::size_t edge_count() const { return quadratic_.size(); }

 protected:
    QuadraticForm(std::vector<double> linear, QuadraticMap quadratic, double offset,
                  std::string_view kind);

    friend bool operator==(const QuadraticForm& a, const QuadraticForm& b) {
        return a.linear_ == b.linear_ && a.quadratic_ == b.quadratic_ && a.offset_ == b.offset_;
    }

 private:
    std::vector<double> linear_;
    QuadraticMap quadratic_;
    double offset_ = 0.0;
    std::vector<std::vector<Neighbor>> adjacency_;
};

}  // namespace detail

// E(x) = offset + sum_i Q_i x_i + sum_{i<j} Q_ij x_i x_j over x in {0,1}^n.
class QuboProblem : public detail::QuadraticForm {
 public:
    // Throws InvalidArgument for n = 0, keys with i >= j or j >= n,
    // and non-finite coefficients.
    QuboProblem(std::vector<double> linear, QuadraticMap quadratic = {}, double offset = 0.0);

    const std::vector<double>& linear() const { return linear_terms(); }
    const QuadraticMap& quadratic() const { return quadratic_terms(); }

    QuboProblem with_offset(double offset) const;
};

// H(s) = offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j over s in {-1,+1}^n.
class IsingProblem : public detail::QuadraticForm {
 public:
    IsingProblem(std::vector<double> h, QuadraticMap j = {}, double offset = 0.0);

    const std::vector<double>& h() const { return linear_terms(); }
    const QuadraticMap& j() const { return quadratic_terms(); }
};

double qubo_energy(const QuboProblem& q, const BinaryVector& x);
double ising_energy(const IsingProblem& m, const SpinVector& s);

// Exact change of basis s = 2x - 1, offsets carried through.
IsingProblem qubo_to_ising(const QuboProblem& q);
QuboProblem ising_to_qubo(const IsingProblem& m);

struct ConnectivityReport {
    std::size_t n = 0;
    std::size_t edge_count = 0;
    bool is_fully_connected = false;
    std::size_t max_supported_clique = 0;
    bool fits_hardware = false;
};

// Any graph on at most `max_clique` nodes embeds in the hardware clique.
// Larger problems would need minor-embedding, which is not modelled, so
// they are reported as not fitting whatever their sparsity.
ConnectivityReport analyze_connectivity(const QuboProblem& q, std::size_t max_clique);

// Connectivity of a dense problem with `n` variables, without building it.
ConnectivityReport analyze_fully_connected(std::size_t n, std::size_t max_clique);

// "QUBO v1" / "ISING v1" text files.
void write_qubo(std::ostream& out, const QuboProblem& q);
void write_ising(std::ostream& out, const IsingProblem& m);
QuboProblem read_qubo(std::istream& in);
IsingProblem read_ising(std::istream& in);
void save_qubo(const std::filesystem::path& path, const QuboProblem& q);
QuboProblem load_qubo(const std::filesystem::path& path);
void save_ising(const std::filesystem::path& path, const IsingProblem& m);
IsingProblem load_ising(const std::filesystem::path& path);

}  // namespace bvq
