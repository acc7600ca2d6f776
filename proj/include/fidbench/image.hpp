#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fidbench {

// Row-major pixel index. Throws IndexError when (row, col) is outside the grid.
std::size_t flatten_index(std::size_t row, std::size_t col, std::size_t width, std::size_t height);
std::pair<std::size_t, std::size_t> unflatten_index(std::size_t index, std::size_t width,
                                                    std::size_t height);

// Grayscale image with intensities in [0, 1], stored row-major. Flattening an
// image to a feature vector is the identity on pixels(): feature
// flatten_index(r, c, width) is pixel (r, c).
class Image {
public:
    Image() = default;
    Image(std::size_t width, std::size_t height, double fill = 0.0);
    Image(std::size_t width, std::size_t height, std::vector<double> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    double at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    void set(std::size_t row, std::size_t col, double value);

    std::span<const double> pixels() const noexcept { return pixels_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> pixels_;
};

// Per-pixel non-negative importance. Stored as float32, the precision of the
// PFM files it is persisted in.
class SaliencyMap {
public:
    SaliencyMap() = default;
    SaliencyMap(std::size_t width, std::size_t height);
    SaliencyMap(std::size_t width, std::size_t height, std::vector<float> values);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const float> values() const noexcept { return values_; }
    std::vector<double> as_doubles() const;

    bool operator==(const SaliencyMap&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<float> values_;
};

// Binary PGM (P5, maxval 255). Intensity = byte / 255.
Image read_image_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_image_pgm(const Image& img);
std::uint8_t quantize_pixel(double value);

// Grayscale PFM ("Pf", scale -1.0 = little-endian). Rows are stored bottom to
// top as the format requires.
SaliencyMap read_saliency_pfm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_saliency_pfm(const SaliencyMap& map);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file(const std::string& path, const std::string& text);

Image load_image(const std::string& path);
SaliencyMap load_saliency(const std::string& path);

} // namespace fidbench
