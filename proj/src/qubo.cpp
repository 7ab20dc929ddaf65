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

#include "bvq/qubo.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "bvq/error.hpp"
#include "bvq/textio.hpp"

namespace bvq {

namespace {

void check_length(std::size_t got, std::size_t expected, std::string_view what) {
    if (got != expected) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << what << " has length " << got
            << " but the problem dimension is " << expected;
        throw DimensionError(msg.str());
    }
}

}  // namespace

BinaryVector::BinaryVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] > 1)
            throw InvalidArgument("binary vector element " + std::to_string(i) +
                                  " is not 0 or 1");
}

BinaryVector BinaryVector::from_string(std::string_view text) {
    std::vector<std::uint8_t> bits(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '0' && text[i] != '1')
            throw FormatError("bit string contains '" + std::string(1, text[i]) + "'");
        bits[i] = text[i] == '1' ? 1 : 0;
    }
    return BinaryVector(std::move(bits));
}

std::string BinaryVector::to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) s[i] = '1';
    return s;
}

std::size_t BinaryVector::popcount() const {
    std::size_t count = 0;
    for (auto b : bits_) count += b;
    return count;
}

std::size_t hamming_distance(const BinaryVector& a, const BinaryVector& b) {
    check_length(b.size(), a.size(), "second vector");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

std::size_t BinaryVectorHash::operator()(const BinaryVector& v) const noexcept {
    std::size_t h = 1469598103934665603ULL ^ v.size();
    for (auto b : v.bits()) h = (h ^ b) * 1099511628211ULL;
    return h;
}

SpinVector::SpinVector(std::vector<std::int8_t> spins) : spins_(std::move(spins)) {
    for (std::size_t i = 0; i < spins_.size(); ++i)
        if (spins_[i] != 1 && spins_[i] != -1)
            throw InvalidArgument("spin vector element " + std::to_string(i) +
                                  " is not -1 or +1");
}

SpinVector binary_to_spin(const BinaryVector& x) {
    std::vector<std::int8_t> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = static_cast<std::int8_t>(2 * x[i] - 1);
    return SpinVector(std::move(s));
}

BinaryVector spin_to_binary(const SpinVector& s) {
    std::vector<std::uint8_t> x(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) x[i] = static_cast<std::uint8_t>((s[i] + 1) / 2);
    return BinaryVector(std::move(x));
}

namespace detail {

QuadraticForm::QuadraticForm(std::vector<double> linear, QuadraticMap quadratic, double offset,
                             std::string_view kind)
    : linear_(std::move(linear)), offset_(offset) {
    const std::string name(kind);
    if (linear_.empty()) throw InvalidArgument(name + " problem must have at least one variable");
    if (!std::isfinite(offset_)) throw InvalidArgument(name + " offset is not finite");
    for (std::size_t i = 0; i < linear_.size(); ++i)
        if (!std::isfinite(linear_[i]))
            throw InvalidArgument(name + " linear coefficient " + std::to_string(i) +
                                  " is not finite");
    for (const auto& [key, value] : quadratic) {
        const auto [i, j] = key;
        if (i >= j || j >= linear_.size())
            throw InvalidArgument(name + " quadratic key (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") must satisfy i < j < n");
        if (!std::isfinite(value))
            throw InvalidArgument(name + " quadratic coefficient (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") is not finite");
        if (value != 0.0) quadratic_.emplace(key, value);
    }
    adjacency_.resize(linear_.size());
    for (const auto& [key, value] : quadratic_) {
        adjacency_[key.first].push_back({key.second, value});
        adjacency_[key.second].push_back({key.first, value});
    }
}

double QuadraticForm::coupling(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const auto it = quadratic_.find({i, j});
    return it == quadratic_.end() ? 0.0 : it->second;
}

}  // namespace detail

QuboProblem::QuboProblem(std::vector<double> linear, QuadraticMap quadratic, double offset)
    : QuadraticForm(std::move(linear), std::move(quadratic), offset, "QUBO") {}

QuboProblem QuboProblem::with_offset(double offset) const {
    return QuboProblem(linear(), quadratic(), offset);
}

IsingProblem::IsingProblem(std::vector<double> h, QuadraticMap j, double offset)
    : QuadraticForm(std::move(h), std::move(j), offset, "Ising") {}

double qubo_energy(const QuboProblem& q, const BinaryVector& x) {
    check_length(x.size(), q.n(), "binary vector");
    double energy = q.offset();
    for (std::size_t i = 0; i < q.n(); ++i)
        if (x[i]) energy += q.linear()[i];
    for (const auto& [key, value] : q.quadratic())
        if (x[key.first] && x[key.second]) energy += value;
    return energy;
}

double ising_energy(const IsingProblem& m, const SpinVector& s) {
    check_length(s.size(), m.n(), "spin vector");
    double energy = m.offset();
    for (std::size_t i = 0; i < m.n(); ++i) energy += m.h()[i] * s[i];
    for (const auto& [key, value] : m.j()) energy += value * s[key.first] * s[key.second];
    return energy;
}

IsingProblem qubo_to_ising(const QuboProblem& q) {
    // x = (s + 1) / 2
    std::vector<double> h(q.n());
    double offset = q.offset();
    for (std::size_t i = 0; i < q.n(); ++i) {
        h[i] = q.linear()[i] / 2.0;
        offset += q.linear()[i] / 2.0;
    }
    QuadraticMap j;
    for (const auto& [key, value] : q.quadratic()) {
        const double quarter = value / 4.0;
        j.emplace(key, quarter);
        h[key.first] += quarter;
        h[key.second] += quarter;
        offset += quarter;
    }
    return IsingProblem(std::move(h), std::move(j), offset);
}

QuboProblem ising_to_qubo(const IsingProblem& m) {
    // s = 2x - 1
    std::vector<double> linear(m.n());
    double offset = m.offset();
    for (std::size_t i = 0; i < m.n(); ++i) {
        linear[i] = 2.0 * m.h()[i];
        offset -= m.h()[i];
    }
    QuadraticMap quadratic;
    for (const auto& [key, value] : m.j()) {
        quadratic.emplace(key, 4.0 * value);
        linear[key.first] -= 2.0 * value;
        linear[key.second] -= 2.0 * value;
        offset += value;
    }
    return QuboProblem(std::move(linear), std::move(quadratic), offset);
}

ConnectivityReport analyze_fully_connected(std::size_t n, std::size_t max_clique) {
    if (max_clique < 1) throw InvalidArgument("max_clique must be at least 1");
    if (n < 1) throw InvalidArgument("problem dimension must be at least 1");
    ConnectivityReport report;
    report.n = n;
    report.edge_count = n * (n - 1) / 2;
    report.is_fully_connected = true;
    report.max_supported_clique = max_clique;
    report.fits_hardware = n <= max_clique;
    return report;
}

ConnectivityReport analyze_connectivity(const QuboProblem& q, std::size_t max_clique) {
    if (max_clique < 1) throw InvalidArgument("max_clique must be at least 1");
    ConnectivityReport report;
    report.n = q.n();
    report.edge_count = q.edge_count();
    report.is_fully_connected = report.edge_count == q.n() * (q.n() - 1) / 2;
    report.max_supported_clique = max_clique;
    report.fits_hardware = q.n() <= max_clique;
    return report;
}

namespace {

void write_form(std::ostream& out, const detail::QuadraticForm& form, std::string_view tag) {
    out << tag << " v1 n=" << form.n() << " offset=" << textio::format_decimal(form.offset())
        << '\n';
    for (std::size_t i = 0; i < form.n(); ++i)
        if (form.linear_terms()[i] != 0.0)
            out << "L " << i << ' ' << textio::format_decimal(form.linear_terms()[i]) << '\n';
    for (const auto& [key, value] : form.quadratic_terms())
        out << "Q " << key.first << ' ' << key.second << ' ' << textio::format_decimal(value)
            << '\n';
}

struct ParsedForm {
    std::vector<double> linear;
    QuadraticMap quadratic;
    double offset = 0.0;
};

ParsedForm read_form(std::istream& in, std::string_view tag) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError(std::string(tag) + " file is empty");
    const auto header = textio::split_ws(line);
    if (header.size() != 4 || header[0] != tag || header[1] != "v1")
        throw FormatError("expected '" + std::string(tag) + " v1 n=<n> offset=<x>' header");
    const auto n = textio::parse_uint(textio::header_value(header[2], "n"));
    ParsedForm form;
    form.offset = textio::parse_double(textio::header_value(header[3], "offset"));
    form.linear.assign(n, 0.0);
    std::vector<bool> seen(n, false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = textio::split_ws(line);
        if (tokens.empty()) continue;
        const std::string where = " on line " + std::to_string(line_no);
        if (tokens[0] == "L" && tokens.size() == 3) {
            const auto i = textio::parse_uint(tokens[1]);
            if (i >= n) throw FormatError("linear index out of range" + where);
            if (seen[i]) throw FormatError("duplicate linear term" + where);
            seen[i] = true;
            form.linear[i] = textio::parse_double(tokens[2]);
        } else if (tokens[0] == "Q" && tokens.size() == 4) {
            const auto i = textio::parse_uint(tokens[1]);
            const auto j = textio::parse_uint(tokens[2]);
            if (!(i < j && j < n)) throw FormatError("quadratic key must satisfy i < j < n" + where);
            if (!form.quadratic.emplace(IndexPair{i, j}, textio::parse_double(tokens[3])).second)
                throw FormatError("duplicate quadratic term" + where);
        } else {
            throw FormatError("unrecognized record" + where);
        }
    }
    return form;
}

}  // namespace

void write_qubo(std::ostream& out, const QuboProblem& q) { write_form(out, q, "QUBO"); }
void write_ising(std::ostream& out, const IsingProblem& m) { write_form(out, m, "ISING"); }

QuboProblem read_qubo(std::istream& in) {
    auto form = read_form(in, "QUBO");
    return QuboProblem(std::move(form.linear), std::move(form.quadratic), form.offset);
}

IsingProblem read_ising(std::istream& in) {
    auto form = read_form(in, "ISING");
    return IsingProblem(std::move(form.linear), std::move(form.quadratic), form.offset);
}

void save_qubo(const std::filesystem::path& path, const QuboProblem& q) {
    auto out = textio::open_output(path);
    write_qubo(out, q);
}

QuboProblem load_qubo(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return read_qubo(in);
}

void save_ising(const std::filesystem::path& path, const IsingProblem& m) {
    auto out = textio::open_output(path);
    write_ising(out, m);
}

IsingProblem load_ising(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return read_ising(in);
}

}  // namespace bvq
