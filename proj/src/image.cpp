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

#include "bvq/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bvq/error.hpp"
#include "bvq/textio.hpp"

namespace bvq {

Image::Image(std::size_t side, double fill) : side_(side), pixels_(side * side, fill) {
    if (side_ == 0) throw InvalidArgument("image side must be positive");
    if (!(fill >= 0.0 && fill <= 1.0)) throw InvalidArgument("pixel values must lie in [0, 1]");
}

Image::Image(std::size_t side, std::vector<double> pixels) : side_(side), pixels_(std::move(pixels)) {
    if (side_ == 0) throw InvalidArgument("image side must be positive");
    if (pixels_.size() != side_ * side_)
        throw DimensionError("image of side " + std::to_string(side_) + " needs " +
                             std::to_string(side_ * side_) + " pixels, got " +
                             std::to_string(pixels_.size()));
    for (const double p : pixels_)
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("pixel values must lie in [0, 1]");
}

bool Image::is_binary() const {
    return std::all_of(pixels_.begin(), pixels_.end(), [](double p) { return p == 0.0 || p == 1.0; });
}

Image Image::thresholded(double level) const {
    std::vector<double> out(pixels_.size());
    for (std::size_t i = 0; i < pixels_.size(); ++i) out[i] = pixels_[i] > level ? 1.0 : 0.0;
    return Image(side_, std::move(out));
}

Image gaussian_blur(const Image& image, double sigma_px) {
    if (!(sigma_px >= 0.0) || !std::isfinite(sigma_px))
        throw InvalidArgument("blur radius must be finite and non-negative");
    if (sigma_px == 0.0) return image;
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma_px));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t d = -radius; d <= radius; ++d) {
        const double w = std::exp(-0.5 * static_cast<double>(d * d) / (sigma_px * sigma_px));
        kernel[static_cast<std::size_t>(d + radius)] = w;
        total += w;
    }
    for (auto& w : kernel) w /= total;

    const auto side = static_cast<std::ptrdiff_t>(image.side());
    auto clamp = [side](std::ptrdiff_t i) { return std::clamp<std::ptrdiff_t>(i, 0, side - 1); };
    std::vector<double> rows(image.pixel_count());
    for (std::ptrdiff_t r = 0; r < side; ++r)
        for (std::ptrdiff_t c = 0; c < side; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t d = -radius; d <= radius; ++d)
                acc += kernel[static_cast<std::size_t>(d + radius)] *
                       image(static_cast<std::size_t>(r), static_cast<std::size_t>(clamp(c + d)));
            rows[static_cast<std::size_t>(r * side + c)] = acc;
        }
    std::vector<double> out(image.pixel_count());
    for (std::ptrdiff_t r = 0; r < side; ++r)
        for (std::ptrdiff_t c = 0; c < side; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t d = -radius; d <= radius; ++d)
                acc += kernel[static_cast<std::size_t>(d + radius)] *
                       rows[static_cast<std::size_t>(clamp(r + d) * side + c)];
            out[static_cast<std::size_t>(r * side + c)] = std::clamp(acc, 0.0, 1.0);
        }
    return Image(image.side(), std::move(out));
}

void write_pgm(std::ostream& out, const Image& image) {
    out << "P2\n" << image.side() << ' ' << image.side() << "\n255\n";
    for (std::size_t r = 0; r < image.side(); ++r) {
        for (std::size_t c = 0; c < image.side(); ++c)
            out << (c ? " " : "") << std::lround(image(r, c) * 255.0);
        out << '\n';
    }
}

Image read_pgm(std::istream& in) {
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (const auto t : textio::split_ws(line)) tokens.emplace_back(t);
    }
    if (tokens.size() < 4 || tokens[0] != "P2") throw FormatError("not a plain PGM (P2) image");
    const auto width = textio::parse_uint(tokens[1]);
    const auto height = textio::parse_uint(tokens[2]);
    const auto maxval = textio::parse_uint(tokens[3]);
    if (width != height || width == 0) throw FormatError("PGM image must be square and non-empty");
    if (maxval == 0) throw FormatError("PGM maxval must be positive");
    if (tokens.size() != 4 + width * height)
        throw FormatError("PGM pixel count does not match its header");
    std::vector<double> pixels(width * height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const auto v = textio::parse_uint(tokens[4 + i]);
        if (v > maxval) throw FormatError("PGM pixel exceeds maxval");
        pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return Image(width, std::move(pixels));
}

void save_pgm(const std::filesystem::path& path, const Image& image) {
    auto out = textio::open_output(path);
    write_pgm(out, image);
}

Image load_pgm(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return read_pgm(in);
}

void write_image_set(std::ostream& out, std::size_t side, std::span<const Image> images) {
    out << "IMG v1 m=" << side << " count=" << images.size() << '\n';
    for (const auto& image : images) {
        if (image.side() != side)
            throw DimensionError("image of side " + std::to_string(image.side()) +
                                 " in a set of side " + std::to_string(side));
        if (image.is_binary()) {
            std::string row(image.pixel_count(), '0');
            for (std::size_t i = 0; i < row.size(); ++i)
                if (image.pixels()[i] == 1.0) row[i] = '1';
            out << row << '\n';
        } else {
            for (std::size_t i = 0; i < image.pixel_count(); ++i)
                out << (i ? " " : "") << textio::format_decimal(image.pixels()[i]);
            out << '\n';
        }
    }
}

std::vector<Image> read_image_set(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("image set file is empty");
    const auto header = textio::split_ws(line);
    if (header.size() != 4 || header[0] != "IMG" || header[1] != "v1")
        throw FormatError("expected 'IMG v1 m=<m> count=<c>' header");
    const auto side = textio::parse_uint(textio::header_value(header[2], "m"));
    const auto count = textio::parse_uint(textio::header_value(header[3], "count"));
    const std::size_t pixels = side * side;
    std::vector<Image> images;
    while (std::getline(in, line)) {
        const auto tokens = textio::split_ws(line);
        if (tokens.empty()) continue;
        std::vector<double> values(pixels);
        if (tokens.size() == 1 && tokens[0].size() == pixels &&
            tokens[0].find_first_not_of("01") == std::string_view::npos) {
            for (std::size_t i = 0; i < pixels; ++i) values[i] = tokens[0][i] == '1' ? 1.0 : 0.0;
        } else if (tokens.size() == pixels) {
            for (std::size_t i = 0; i < pixels; ++i) values[i] = textio::parse_double(tokens[i]);
        } else {
            throw FormatError("image row " + std::to_string(images.size()) + " has " +
                              std::to_string(tokens.size()) + " fields, expected " +
                              std::to_string(pixels) + " decimals or one 0/1 string");
        }
        images.emplace_back(side, std::move(values));
    }
    if (images.size() != count)
        throw FormatError("image set header declares " + std::to_string(count) + " images but " +
                          std::to_string(images.size()) + " were read");
    return images;
}

void save_image_set(const std::filesystem::path& path, std::size_t side,
                    std::span<const Image> images) {
    auto out = textio::open_output(path);
    write_image_set(out, side, images);
}

std::vector<Image> load_image_set(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return read_image_set(in);
}

}  // namespace bvq
