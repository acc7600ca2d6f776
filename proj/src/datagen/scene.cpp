#include <cmath>
#include <string>

#include "fidbench/datagen.hpp"
#include "fidbench/error.hpp"
#include "fidbench/rng.hpp"

namespace fidbench::datagen {

std::string_view shape_name(ShapeKind kind) {
    switch (kind) {
    case ShapeKind::circle:
        return "circle";
    case ShapeKind::square:
        return "square";
    case ShapeKind::cross:
        return "cross";
    }
    return "unknown";
}

ShapeKind parse_shape_kind(std::string_view name) {
    for (ShapeKind kind : all_shape_kinds) {
        if (shape_name(kind) == name) {
            return kind;
        }
    }
    throw ValidationError("unknown shape kind '" + std::string(name) + "'");
}

std::array<int, 3> SceneSpec::counts() const {
    std::array<int, 3> out{0, 0, 0};
    for (const auto& s : shapes) {
        ++out[static_cast<std::size_t>(s.kind)];
    }
    return out;
}

double ssin(int n_circles, int n_squares, int n_crosses) {
    if (n_circles < 0 || n_squares < 0 || n_crosses < 0) {
        throw ValidationError("ssin: counts must be non-negative");
    }
    // sin(pi/2 * n) on the integer lattice.
    constexpr double quarter_sine[4] = {0.0, 1.0, 0.0, -1.0};
    return 0.5 * quarter_sine[n_circles % 4] + 0.25 * quarter_sine[n_squares % 4] +
           quarter_sine[n_crosses % 4] / 6.0;
}

std::int64_t cross_half_thickness(std::int64_t size) {
    return std::min(size, std::max<std::int64_t>(1, size / 4));
}

bool shape_contains(const ShapeInstance& shape, std::int64_t row, std::int64_t col) {
    const std::int64_t dr = row - shape.center_row;
    const std::int64_t dc = col - shape.center_col;
    const std::int64_t s = shape.size;
    switch (shape.kind) {
    case ShapeKind::circle:
        return dr * dr + dc * dc <= s * s;
    case ShapeKind::square:
        return std::abs(dr) <= s && std::abs(dc) <= s;
    case ShapeKind::cross: {
        const std::int64_t t = cross_half_thickness(s);
        const bool horizontal = std::abs(dr) <= t && std::abs(dc) <= s;
        const bool vertical = std::abs(dc) <= t && std::abs(dr) <= s;
        return horizontal || vertical;
    }
    }
    return false;
}

void rasterize_shape(const ShapeInstance& shape, Image& canvas) {
    const auto h = static_cast<std::int64_t>(canvas.height());
    const auto w = static_cast<std::int64_t>(canvas.width());
    const std::int64_t s = shape.size;
    if (s < 0 || shape.center_row - s < 0 || shape.center_col - s < 0 ||
        shape.center_row + s >= h || shape.center_col + s >= w) {
        throw BoundsError(std::string(shape_name(shape.kind)) + " at (" +
                          std::to_string(shape.center_row) + ", " +
                          std::to_string(shape.center_col) + ") size " + std::to_string(s) +
                          " leaves the " + std::to_string(w) + "x" + std::to_string(h) + " canvas");
    }
    for (std::int64_t r = shape.center_row - s; r <= shape.center_row + s; ++r) {
        for (std::int64_t c = shape.center_col - s; c <= shape.center_col + s; ++c) {
            if (shape_contains(shape, r, c)) {
                canvas.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c), 1.0);
            }
        }
    }
}

int GenerationConfig::effective_size_min() const {
    if (size_min > 0) {
        return size_min;
    }
    const auto side = static_cast<double>(std::min(width, height));
    return std::max(1, static_cast<int>(std::lround(4.0 * side / 128.0)));
}

int GenerationConfig::effective_size_max() const {
    if (size_max > 0) {
        return size_max;
    }
    const auto side = static_cast<double>(std::min(width, height));
    return std::max(effective_size_min(), static_cast<int>(std::lround(12.0 * side / 128.0)));
}

void GenerationConfig::validate() const {
    if (width == 0 || height == 0) {
        throw ValidationError("image dimensions must be positive");
    }
    for (std::size_t k = 0; k < 3; ++k) {
        if (count_min[k] < 0 || count_max[k] < count_min[k]) {
            throw ValidationError("invalid count range for " +
                                  std::string(shape_name(static_cast<ShapeKind>(k))));
        }
    }
    const int lo = effective_size_min();
    const int hi = effective_size_max();
    if (lo < 0 || hi < lo) {
        throw ValidationError("invalid size range [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
    }
    if (static_cast<std::size_t>(2 * hi + 1) > std::min(width, height)) {
        throw ValidationError("size_max " + std::to_string(hi) + " does not fit a " +
                              std::to_string(width) + "x" + std::to_string(height) + " image");
    }
    if (max_attempts < 1) {
        throw ValidationError("max_attempts must be >= 1");
    }
    if (background_mode == BackgroundMode::texture && texture_dir.empty()) {
        throw ValidationError("background_mode=texture requires texture_dir");
    }
}

namespace {

// Boxes must keep at least one background pixel between them.
bool separated(const ShapeInstance& a, const ShapeInstance& b) {
    const std::int64_t reach = a.size + b.size + 1;
    return std::abs(a.center_row - b.center_row) > reach ||
           std::abs(a.center_col - b.center_col) > reach;
}

} // namespace

SceneSpec sample_scene(const GenerationConfig& config, std::uint64_t seed,
                       std::span<const std::string> textures) {
    config.validate();
    Rng rng(seed);
    SceneSpec scene;

    std::array<int, 3> counts{};
    for (std::size_t k = 0; k < 3; ++k) {
        counts[k] = static_cast<int>(rng.uniform_int(config.count_min[k], config.count_max[k]));
    }

    scene.background.mode = config.background_mode;
    if (config.background_mode == BackgroundMode::procedural) {
        scene.background.seed = rng.next_u64();
    } else if (config.background_mode == BackgroundMode::texture) {
        if (textures.empty()) {
            throw GenerationError("no texture files available in '" + config.texture_dir + "'");
        }
        scene.background.texture_path = textures[rng.uniform_index(textures.size())];
    }

    const int size_lo = config.effective_size_min();
    const int size_hi = config.effective_size_max();
    const auto h = static_cast<std::int64_t>(config.height);
    const auto w = static_cast<std::int64_t>(config.width);

    for (ShapeKind kind : all_shape_kinds) {
        for (int i = 0; i < counts[static_cast<std::size_t>(kind)]; ++i) {
            bool placed = false;
            for (int attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
                ShapeInstance candidate;
                candidate.kind = kind;
                candidate.size = rng.uniform_int(size_lo, size_hi);
                candidate.center_row = rng.uniform_int(candidate.size, h - 1 - candidate.size);
                candidate.center_col = rng.uniform_int(candidate.size, w - 1 - candidate.size);
                placed = true;
                for (const auto& other : scene.shapes) {
                    if (!separated(candidate, other)) {
                        placed = false;
                        break;
                    }
                }
                if (placed) {
                    scene.shapes.push_back(candidate);
                }
            }
            if (!placed) {
                throw GenerationError("could not place " + std::string(shape_name(kind)) +
                                      " after " + std::to_string(config.max_attempts) +
                                      " attempts (scene seed " + std::to_string(seed) + ")");
            }
        }
    }
    return scene;
}

Image render_scene(const SceneSpec& scene, std::size_t width, std::size_t height) {
    Image canvas = generate_background(scene.background, width, height);
    for (const auto& shape : scene.shapes) {
        rasterize_shape(shape, canvas);
    }
    return canvas;
}

LabeledImage generate_image(const GenerationConfig& config, std::size_t index,
                            std::span<const std::string> textures) {
    const std::uint64_t seed = derive_seed(config.master_seed, stream::scene, index);
    LabeledImage out;
    out.scene = sample_scene(config, seed, textures);
    out.image = render_scene(out.scene, config.width, config.height);
    const auto counts = out.scene.counts();
    out.label = ssin(counts[0], counts[1], counts[2]);
    return out;
}

} // namespace fidbench::datagen
