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
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "bvq/qubo.hpp"

namespace bvq {

// Binary latent vectors with figure-of-merit labels and a provenance tag
// per row ("random", "iter3", ...). All vectors share one length.
class LabeledDataset {
 public:
    explicit LabeledDataset(std::size_t bits);

    std::size_t bits() const { return bits_; }
    std::size_t size() const { return x_.size(); }
    bool empty() const { return x_.empty(); }

    const std::vector<BinaryVector>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<std::string>& provenance() const { return provenance_; }

    void add(BinaryVector x, double y, std::string provenance);

    // Appends unless the vector is already present; returns whether it was added.
    bool add_unique(BinaryVector x, double y, std::string provenance);

    bool contains(const BinaryVector& x) const;
    bool has_duplicates() const;

    double max_label() const;

 private:
    std::size_t bits_;
    std::vector<BinaryVector> x_;
    std::vector<double> y_;
    std::vector<std::string> provenance_;
    std::unordered_multiset<BinaryVector, BinaryVectorHash> index_;
};

// "DATASET v1 n=<bits> count=<rows>" followed by "<bits> <label> <tag>" rows.
void write_dataset(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset load_dataset(const std::filesystem::path& path);

// Columns bits,label,provenance.
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);

}  // namespace bvq
