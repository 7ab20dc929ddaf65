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

#include "bvq/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "bvq/error.hpp"
#include "bvq/textio.hpp"

namespace bvq {

LabeledDataset::LabeledDataset(std::size_t bits) : bits_(bits) {
    if (bits_ == 0) throw InvalidArgument("dataset vectors must have at least one bit");
}

void LabeledDataset::add(BinaryVector x, double y, std::string provenance) {
    if (x.size() != bits_)
        throw DimensionError("dimension mismatch: row has " + std::to_string(x.size()) +
                             " bits but the dataset holds " + std::to_string(bits_) +
                             "-bit vectors");
    if (!std::isfinite(y)) throw InvalidArgument("dataset label is not finite");
    if (provenance.empty() || provenance.find_first_of(" \t\n") != std::string::npos)
        throw InvalidArgument("provenance tag must be a single non-empty word");
    index_.insert(x);
    x_.push_back(std::move(x));
    y_.push_back(y);
    provenance_.push_back(std::move(provenance));
}

bool LabeledDataset::add_unique(BinaryVector x, double y, std::string provenance) {
    if (contains(x)) return false;
    add(std::move(x), y, std::move(provenance));
    return true;
}

bool LabeledDataset::contains(const BinaryVector& x) const { return index_.count(x) > 0; }

bool LabeledDataset::has_duplicates() const {
    for (const auto& v : x_)
        if (index_.count(v) > 1) return true;
    return false;
}

double LabeledDataset::max_label() const {
    if (y_.empty()) throw Error("dataset is empty");
    return *std::max_element(y_.begin(), y_.end());
}

void write_dataset(std::ostream& out, const LabeledDataset& data) {
    out << "DATASET v1 n=" << data.bits() << " count=" << data.size() << '\n';
    for (std::size_t r = 0; r < data.size(); ++r)
        out << data.x()[r].to_string() << ' ' << textio::format_decimal(data.y()[r]) << ' '
            << data.provenance()[r] << '\n';
}

LabeledDataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("dataset file is empty");
    const auto header = textio::split_ws(line);
    if (header.size() != 4 || header[0] != "DATASET" || header[1] != "v1")
        throw FormatError("expected 'DATASET v1 n=<bits> count=<rows>' header");
    const auto bits = textio::parse_uint(textio::header_value(header[2], "n"));
    const auto count = textio::parse_uint(textio::header_value(header[3], "count"));
    LabeledDataset data(bits);
    while (std::getline(in, line)) {
        const auto tokens = textio::split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 3) throw FormatError("dataset row must have 3 fields: " + line);
        data.add(BinaryVector::from_string(tokens[0]), textio::parse_double(tokens[1]),
                 std::string(tokens[2]));
    }
    if (data.size() != count)
        throw FormatError("dataset header declares " + std::to_string(count) + " rows but " +
                          std::to_string(data.size()) + " were read");
    return data;
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& data) {
    auto out = textio::open_output(path);
    write_dataset(out, data);
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return read_dataset(in);
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& data) {
    out << "bits,label,provenance\n";
    for (std::size_t r = 0; r < data.size(); ++r)
        out << data.x()[r].to_string() << ',' << textio::format_decimal(data.y()[r]) << ','
            << data.provenance()[r] << '\n';
}

}  // namespace bvq
