#include <charconv>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fidbench/datagen.hpp"
#include "fidbench/error.hpp"

namespace fidbench::datagen {

namespace fs = std::filesystem;

std::string_view split_name(Split split) {
    return split == Split::train ? "train" : "validation";
}

std::string image_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "images/%06zu.pgm", index);
    return buf;
}

std::string scene_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scenes/%06zu.txt", index);
    return buf;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

template <typename T>
bool parse_exact(const std::string& text, T& value) {
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc() && ptr == end && !text.empty();
}

// "images/000123.pgm" -> 123
std::size_t index_from_filename(const std::string& filename, std::size_t offset) {
    const std::string stem = fs::path(filename).stem().string();
    std::size_t index = 0;
    if (!parse_exact(stem, index)) {
        throw FormatError("manifest: filename '" + filename + "' has no numeric stem", offset);
    }
    return index;
}

const char* const kind_keys[3] = {"n_circles", "n_squares", "n_crosses"};

} // namespace

std::string format_manifest(const DatasetManifest& manifest) {
    std::string out = "filename,label,n_circles,n_squares,n_crosses,split\n";
    for (const auto& r : manifest.records) {
        out += r.filename + "," + format_double(r.label) + "," + std::to_string(r.counts[0]) + "," +
               std::to_string(r.counts[1]) + "," + std::to_string(r.counts[2]) + "," +
               std::string(split_name(r.split)) + "\n";
    }
    return out;
}

std::vector<ManifestRecord> parse_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t offset = 0;
    if (!std::getline(in, line) || line != "filename,label,n_circles,n_squares,n_crosses,split") {
        throw FormatError("manifest: unexpected header", 0);
    }
    offset += line.size() + 1;
    std::vector<ManifestRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        const auto fields = split_fields(line, ',');
        if (fields.size() != 6) {
            throw FormatError("manifest: expected 6 fields", offset);
        }
        ManifestRecord r;
        r.filename = fields[0];
        if (!parse_exact(fields[1], r.label)) {
            throw FormatError("manifest: bad label '" + fields[1] + "'", offset);
        }
        for (std::size_t k = 0; k < 3; ++k) {
            if (!parse_exact(fields[2 + k], r.counts[k]) || r.counts[k] < 0) {
                throw FormatError("manifest: bad count '" + fields[2 + k] + "'", offset);
            }
        }
        if (fields[5] == "train") {
            r.split = Split::train;
        } else if (fields[5] == "validation") {
            r.split = Split::validation;
        } else {
            throw FormatError("manifest: bad split '" + fields[5] + "'", offset);
        }
        r.index = index_from_filename(r.filename, offset);
        records.push_back(std::move(r));
        offset += line.size() + 1;
    }
    return records;
}

std::string format_scene(const SceneSpec& scene) {
    std::string out = "background " + std::string(background_name(scene.background.mode));
    if (scene.background.mode == BackgroundMode::procedural) {
        out += " " + std::to_string(scene.background.seed);
    } else if (scene.background.mode == BackgroundMode::texture) {
        out += " " + scene.background.texture_path;
    }
    out += "\n";
    for (const auto& s : scene.shapes) {
        out += std::string(shape_name(s.kind)) + " " + std::to_string(s.center_row) + " " +
               std::to_string(s.center_col) + " " + std::to_string(s.size) + "\n";
    }
    return out;
}

SceneSpec parse_scene(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t offset = 0;
    SceneSpec scene;
    if (!std::getline(in, line) || line.rfind("background ", 0) != 0) {
        throw FormatError("scene: first line must be the background spec", 0);
    }
    {
        const std::string rest = line.substr(11);
        const auto space = rest.find(' ');
        scene.background.mode = parse_background_mode(rest.substr(0, space));
        const std::string arg = space == std::string::npos ? "" : rest.substr(space + 1);
        if (scene.background.mode == BackgroundMode::procedural &&
            !parse_exact(arg, scene.background.seed)) {
            throw FormatError("scene: bad procedural seed", 11);
        }
        if (scene.background.mode == BackgroundMode::texture) {
            scene.background.texture_path = arg;
        }
    }
    offset += line.size() + 1;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            const auto fields = split_fields(line, ' ');
            ShapeInstance s;
            if (fields.size() != 4 || !parse_exact(fields[1], s.center_row) ||
                !parse_exact(fields[2], s.center_col) || !parse_exact(fields[3], s.size)) {
                throw FormatError("scene: expected 'kind row col size'", offset);
            }
            s.kind = parse_shape_kind(fields[0]);
            scene.shapes.push_back(s);
        }
        offset += line.size() + 1;
    }
    return scene;
}

std::string format_generation_config(const GenerationConfig& config) {
    KeyValues kv;
    kv.set("width", std::to_string(config.width));
    kv.set("height", std::to_string(config.height));
    kv.set("n_train", std::to_string(config.n_train));
    kv.set("n_val", std::to_string(config.n_val));
    for (std::size_t k = 0; k < 3; ++k) {
        kv.set(std::string(kind_keys[k]) + "_min", std::to_string(config.count_min[k]));
        kv.set(std::string(kind_keys[k]) + "_max", std::to_string(config.count_max[k]));
    }
    kv.set("size_min", std::to_string(config.effective_size_min()));
    kv.set("size_max", std::to_string(config.effective_size_max()));
    kv.set("max_attempts", std::to_string(config.max_attempts));
    kv.set("background_mode", std::string(background_name(config.background_mode)));
    kv.set("texture_dir", config.texture_dir);
    kv.set("master_seed", std::to_string(config.master_seed));
    return kv.format();
}

void apply_generation_keys(GenerationConfig& config, const KeyValues& kv) {
    config.width = static_cast<std::size_t>(kv.get_int("width", static_cast<std::int64_t>(config.width)));
    config.height =
        static_cast<std::size_t>(kv.get_int("height", static_cast<std::int64_t>(config.height)));
    config.n_train =
        static_cast<std::size_t>(kv.get_int("n_train", static_cast<std::int64_t>(config.n_train)));
    config.n_val = static_cast<std::size_t>(kv.get_int("n_val", static_cast<std::int64_t>(config.n_val)));
    for (std::size_t k = 0; k < 3; ++k) {
        config.count_min[k] = static_cast<int>(kv.get_int("count_min", config.count_min[k]));
        config.count_max[k] = static_cast<int>(kv.get_int("count_max", config.count_max[k]));
    }
    for (std::size_t k = 0; k < 3; ++k) {
        config.count_min[k] =
            static_cast<int>(kv.get_int(std::string(kind_keys[k]) + "_min", config.count_min[k]));
        config.count_max[k] =
            static_cast<int>(kv.get_int(std::string(kind_keys[k]) + "_max", config.count_max[k]));
    }
    config.size_min = static_cast<int>(kv.get_int("size_min", config.size_min));
    config.size_max = static_cast<int>(kv.get_int("size_max", config.size_max));
    config.max_attempts = static_cast<int>(kv.get_int("max_attempts", config.max_attempts));
    if (const auto mode = kv.get("background_mode")) {
        config.background_mode = parse_background_mode(*mode);
    }
    config.texture_dir = kv.get_string("texture_dir", config.texture_dir);
    config.master_seed = kv.get_u64("master_seed", config.master_seed);
}

DatasetManifest generate_dataset(const GenerationConfig& config, const std::string& out_dir) {
    config.validate();
    const fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root / "images", ec);
    if (!ec) {
        fs::create_directories(root / "scenes", ec);
    }
    if (ec) {
        throw IoError("cannot create dataset directory " + out_dir + ": " + ec.message());
    }

    std::vector<std::string> textures;
    if (config.background_mode == BackgroundMode::texture) {
        textures = list_textures(config.texture_dir);
    }

    DatasetManifest manifest;
    manifest.config = config;
    const std::size_t total = config.n_train + config.n_val;
    manifest.records.reserve(total);
    for (std::size_t index = 0; index < total; ++index) {
        const LabeledImage item = generate_image(config, index, textures);
        write_file((root / image_filename(index)).string(), write_image_pgm(item.image));
        write_file((root / scene_filename(index)).string(), format_scene(item.scene));

        ManifestRecord r;
        r.filename = image_filename(index);
        r.label = item.label;
        r.counts = item.scene.counts();
        r.split = index < config.n_train ? Split::train : Split::validation;
        r.index = index;
        manifest.records.push_back(std::move(r));
    }
    write_file((root / "manifest.csv").string(), format_manifest(manifest));
    write_file((root / "generation.cfg").string(), format_generation_config(config));
    return manifest;
}

DatasetManifest read_manifest(const std::string& dataset_dir) {
    const fs::path root(dataset_dir);
    const std::string manifest_path = (root / "manifest.csv").string();
    const auto bytes = read_file(manifest_path);
    DatasetManifest manifest;
    try {
        manifest.records = parse_manifest(std::string(bytes.begin(), bytes.end()));
    } catch (const FormatError& e) {
        throw FormatError(manifest_path + ": " + e.message(), e.offset());
    }
    const fs::path cfg = root / "generation.cfg";
    if (fs::exists(cfg)) {
        apply_generation_keys(manifest.config, KeyValues::load(cfg.string()));
    }
    return manifest;
}

} // namespace fidbench::datagen
