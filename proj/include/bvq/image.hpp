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
#include <span>
#include <vector>

namespace bvq {

// Square grayscale image in row-major order with pixels in [0, 1].
class Image {
 public:
    Image() = default;
    explicit Image(std::size_t side, double fill = 0.0);
    Image(std::size_t side, std::vector<double> pixels);

    std::size_t side() const { return side_; }
    std::size_t pixel_count() const { return pixels_.size(); }
    double operator()(std::size_t row, std::size_t col) const { return pixels_[row * side_ + col]; }
    double& operator()(std::size_t row, std::size_t col) { return pixels_[row * side_ + col]; }
    const std::vector<double>& pixels() const { return pixels_; }
    std::span<const double> span() const { return pixels_; }

    bool is_binary() const;
    Image thresholded(double level = 0.5) const;

    friend bool operator==(const Image&, const Image&) = default;

 private:
    std::size_t side_ = 0;
    std::vector<double> pixels_;
};

// Separable Gaussian filter with standard deviation `sigma_px`, truncated
// at three sigma, with clamped edges and a unit-sum kernel.
Image gaussian_blur(const Image& image, double sigma_px);

// Plain PGM (P2).
void write_pgm(std::ostream& out, const Image& image);
Image read_pgm(std::istream& in);
void save_pgm(const std::filesystem::path& path, const Image& image);
Image load_pgm(const std::filesystem::path& path);

// "IMG v1 m=<m> count=<c>"; binary images are written as a 0/1 string,
// others as m*m decimals.
void write_image_set(std::ostream& out, std::size_t side, std::span<const Image> images);
std::vector<Image> read_image_set(std::istream& in);
void save_image_set(const std::filesystem::path& path, std::size_t side,
                    std::span<const Image> images);
std::vector<Image> load_image_set(const std::filesystem::path& path);

}  // namespace bvq
