#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fidbench/config.hpp"
#include "fidbench/image.hpp"

namespace fidbench::datagen {

enum class ShapeKind { circle = 0, square = 1, cross = 2 };

inline constexpr std::array<ShapeKind, 3> all_shape_kinds{ShapeKind::circle, ShapeKind::square,
                                                          ShapeKind::cross};

std::string_view shape_name(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view name);

// size is the radius (circle), half-side (square) or half-arm length (cross);
// every kind occupies the box [center - size, center + size] on both axes.
struct ShapeInstance {
    ShapeKind kind = ShapeKind::circle;
    std::int64_t center_row = 0;
    std::int64_t center_col = 0;
    std::int64_t size = 0;

    bool operator==(const ShapeInstance&) const = default;
};

// Half-thickness of the cross bars: max(1, size / 4), capped at size so the
// cross stays inside its box.
std::int64_t cross_half_thickness(std::int64_t size);
bool shape_contains(const ShapeInstance& shape, std::int64_t row, std::int64_t col);

enum class BackgroundMode { uniform, procedural, texture };

std::string_view background_name(BackgroundMode mode);
BackgroundMode parse_background_mode(std::string_view name);

struct Background {
    BackgroundMode mode = BackgroundMode::uniform;
    std::uint64_t seed = 0;   // procedural
    std::string texture_path; // texture

    bool operator==(const Background&) const = default;
};

struct SceneSpec {
    std::vector<ShapeInstance> shapes;
    Background background;

    std::array<int, 3> counts() const; // circle, square, cross
    bool operator==(const SceneSpec&) const = default;
};

struct GenerationConfig {
    std::size_t width = 64;
    std::size_t height = 64;
    std::size_t n_train = 5000;
    std::size_t n_val = 500;
    std::array<int, 3> count_min{0, 0, 0}; // indexed by ShapeKind
    std::array<int, 3> count_max{3, 3, 3};
    int size_min = 0; // 0 means derived from the resolution
    int size_max = 0;
    int max_attempts = 1000;
    BackgroundMode background_mode = BackgroundMode::uniform;
    std::string texture_dir;
    std::uint64_t master_seed = 0;

    // Default shape extents (2 * size) span [8, 24] pixels at 128x128, i.e.
    // size in [4, 12], scaled by min(width, height) / 128.
    int effective_size_min() const;
    int effective_size_max() const;
    void validate() const;
};

// 1/2 sin(pi/2 n_c) + 1/4 sin(pi/2 n_s) + 1/6 sin(pi/2 n_cr). The sine is
// evaluated exactly on the quarter-period lattice.
double ssin(int n_circles, int n_squares, int n_crosses);

// Sets foreground pixels to 1.0. Throws BoundsError if the shape's box leaves
// the canvas.
void rasterize_shape(const ShapeInstance& shape, Image& canvas);

// Procedural value noise in [0, 0.75]; texture files are resized
// nearest-neighbour and min-max rescaled into [0, 0.75].
inline constexpr double background_max = 0.75;
Image generate_background(const Background& background, std::size_t width, std::size_t height);

std::vector<std::string> list_textures(const std::string& dir);

SceneSpec sample_scene(const GenerationConfig& config, std::uint64_t seed,
                       std::span<const std::string> textures = {});
Image render_scene(const SceneSpec& scene, std::size_t width, std::size_t height);

struct LabeledImage {
    Image image;
    double label = 0.0;
    SceneSpec scene;
};

LabeledImage generate_image(const GenerationConfig& config, std::size_t index,
                            std::span<const std::string> textures = {});

enum class Split { train, validation };
std::string_view split_name(Split split);

struct ManifestRecord {
    std::string filename; // relative to the dataset directory
    double label = 0.0;
    std::array<int, 3> counts{};
    Split split = Split::train;
    std::size_t index = 0;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;
    GenerationConfig config;
};

std::string image_filename(std::size_t index);
std::string scene_filename(std::size_t index);

// Writes images/{index:06}.pgm, scenes/{index:06}.txt, manifest.csv and
// generation.cfg under out_dir. Per-image seeds derive from (master_seed,
// index), so any image can be regenerated alone.
DatasetManifest generate_dataset(const GenerationConfig& config, const std::string& out_dir);

std::string format_manifest(const DatasetManifest& manifest);
std::vector<ManifestRecord> parse_manifest(const std::string& text);
DatasetManifest read_manifest(const std::string& dataset_dir);

std::string format_scene(const SceneSpec& scene);
SceneSpec parse_scene(const std::string& text);

std::string format_generation_config(const GenerationConfig& config);
// Applies recognised keys from a flat key=value map; unknown keys are ignored
// so one file can configure every pipeline stage.
void apply_generation_keys(GenerationConfig& config, const KeyValues& kv);

} // namespace fidbench::datagen
