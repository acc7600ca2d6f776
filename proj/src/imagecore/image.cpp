#include "fidbench/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fidbench/error.hpp"

namespace fidbench {

std::size_t flatten_index(std::size_t row, std::size_t col, std::size_t width, std::size_t height) {
    if (row >= height || col >= width) {
        throw IndexError("pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                         ") outside " + std::to_string(width) + "x" + std::to_string(height));
    }
    return row * width + col;
}

std::pair<std::size_t, std::size_t> unflatten_index(std::size_t index, std::size_t width,
                                                    std::size_t height) {
    if (width == 0 || index >= width * height) {
        throw IndexError("feature index " + std::to_string(index) + " outside " +
                         std::to_string(width) + "x" + std::to_string(height));
    }
    return {index / width, index % width};
}

namespace {

void check_unit_interval(std::span<const double> pixels) {
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        if (!(pixels[i] >= 0.0 && pixels[i] <= 1.0)) {
            throw ValidationError("pixel " + std::to_string(i) + " = " + std::to_string(pixels[i]) +
                                  " outside [0, 1]");
        }
    }
}

} // namespace

Image::Image(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
    if (!(fill >= 0.0 && fill <= 1.0)) {
        throw ValidationError("fill value outside [0, 1]");
    }
}

Image::Image(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (pixels_.size() != width * height) {
        throw ValidationError("pixel count " + std::to_string(pixels_.size()) + " != " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
    check_unit_interval(pixels_);
}

void Image::set(std::size_t row, std::size_t col, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("pixel value outside [0, 1]");
    }
    pixels_[flatten_index(row, col, width_, height_)] = value;
}

SaliencyMap::SaliencyMap(std::size_t width, std::size_t height)
    : width_(width), height_(height), values_(width * height, 0.0f) {}

SaliencyMap::SaliencyMap(std::size_t width, std::size_t height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (values_.size() != width * height) {
        throw ValidationError("saliency count " + std::to_string(values_.size()) + " != " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] >= 0.0f) || !std::isfinite(values_[i])) {
            throw ValidationError("saliency value " + std::to_string(i) +
                                  " is negative or not finite");
        }
    }
}

std::vector<double> SaliencyMap::as_doubles() const {
    return {values_.begin(), values_.end()};
}

} // namespace fidbench
