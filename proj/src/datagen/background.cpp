#include <algorithm>
#include <cmath>
#include <filesystem>

#include "fidbench/datagen.hpp"
#include "fidbench/error.hpp"
#include "fidbench/rng.hpp"

namespace fidbench::datagen {

std::string_view background_name(BackgroundMode mode) {
    switch (mode) {
    case BackgroundMode::uniform:
        return "uniform";
    case BackgroundMode::procedural:
        return "procedural";
    case BackgroundMode::texture:
        return "texture";
    }
    return "unknown";
}

BackgroundMode parse_background_mode(std::string_view name) {
    for (auto mode : {BackgroundMode::uniform, BackgroundMode::procedural, BackgroundMode::texture}) {
        if (background_name(mode) == name) {
            return mode;
        }
    }
    throw ValidationError("unknown background mode '" + std::string(name) + "'");
}

namespace {

double smoothstep(double t) {
    return t * t * (3.0 - 2.0 * t);
}

// One octave of lattice value noise in [0, 1).
class ValueNoise {
public:
    ValueNoise(Rng& rng, std::size_t width, std::size_t height, std::size_t cell)
        : cell_(cell), cols_(width / cell + 2), rows_(height / cell + 2), lattice_(rows_ * cols_) {
        for (double& v : lattice_) {
            v = rng.uniform01();
        }
    }

    double at(std::size_t row, std::size_t col) const {
        const std::size_t r0 = row / cell_;
        const std::size_t c0 = col / cell_;
        const double ty = smoothstep(static_cast<double>(row % cell_) / static_cast<double>(cell_));
        const double tx = smoothstep(static_cast<double>(col % cell_) / static_cast<double>(cell_));
        const double top = lerp(node(r0, c0), node(r0, c0 + 1), tx);
        const double bottom = lerp(node(r0 + 1, c0), node(r0 + 1, c0 + 1), tx);
        return lerp(top, bottom, ty);
    }

private:
    static double lerp(double a, double b, double t) { return a + (b - a) * t; }
    double node(std::size_t r, std::size_t c) const { return lattice_[r * cols_ + c]; }

    std::size_t cell_;
    std::size_t cols_;
    std::size_t rows_;
    std::vector<double> lattice_;
};

Image procedural_background(std::uint64_t seed, std::size_t width, std::size_t height) {
    Rng rng(seed);
    const std::size_t coarse = std::max<std::size_t>(2, std::min(width, height) / 8);
    const std::size_t fine = std::max<std::size_t>(2, coarse / 2);
    const ValueNoise low(rng, width, height, coarse);
    const ValueNoise high(rng, width, height, fine);

    std::vector<double> pixels(width * height);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double v = (2.0 * low.at(r, c) + high.at(r, c)) / 3.0;
            pixels[r * width + c] = std::clamp(v * background_max, 0.0, background_max);
        }
    }
    return Image(width, height, std::move(pixels));
}

Image texture_background(const std::string& path, std::size_t width, std::size_t height) {
    const Image source = load_image(path);
    std::vector<double> pixels(width * height);
    for (std::size_t r = 0; r < height; ++r) {
        const std::size_t sr = r * source.height() / height;
        for (std::size_t c = 0; c < width; ++c) {
            pixels[r * width + c] = source.at(sr, c * source.width() / width);
        }
    }
    const auto [lo, hi] = std::minmax_element(pixels.begin(), pixels.end());
    const double min = *lo;
    const double range = *hi - *lo;
    for (double& p : pixels) {
        p = range > 0.0 ? std::clamp((p - min) / range * background_max, 0.0, background_max) : 0.0;
    }
    return Image(width, height, std::move(pixels));
}

} // namespace

Image generate_background(const Background& background, std::size_t width, std::size_t height) {
    switch (background.mode) {
    case BackgroundMode::uniform:
        return Image(width, height, 0.0);
    case BackgroundMode::procedural:
        return procedural_background(background.seed, width, height);
    case BackgroundMode::texture:
        return texture_background(background.texture_path, width, height);
    }
    throw ValidationError("unknown background mode");
}

std::vector<std::string> list_textures(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::directory_iterator it(dir, ec);
    if (ec) {
        throw IoError("cannot read texture directory " + dir + ": " + ec.message());
    }
    std::vector<std::string> out;
    for (const auto& entry : it) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            out.push_back(entry.path().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace fidbench::datagen
