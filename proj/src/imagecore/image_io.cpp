#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fidbench/error.hpp"
#include "fidbench/image.hpp"

namespace fidbench {

namespace {

bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Netpbm-style header tokenizer: whitespace separated, '#' starts a comment
// running to end of line.
class HeaderReader {
public:
    HeaderReader(std::span<const std::uint8_t> bytes, const char* format)
        : bytes_(bytes), format_(format) {}

    std::string token() {
        skip_space_and_comments();
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#') {
            ++pos_;
        }
        if (pos_ == start) {
            fail("unexpected end of header");
        }
        return {reinterpret_cast<const char*>(bytes_.data() + start), pos_ - start};
    }

    std::size_t positive_integer(const char* what) {
        const std::size_t at = pos_;
        const std::string text = token();
        std::size_t value = 0;
        for (char c : text) {
            if (c < '0' || c > '9' || value > (std::size_t{1} << 32)) {
                throw FormatError(std::string(format_) + ": bad " + what + " '" + text + "'", at);
            }
            value = value * 10 + static_cast<std::size_t>(c - '0');
        }
        if (value == 0) {
            throw FormatError(std::string(format_) + ": " + what + " must be positive", at);
        }
        return value;
    }

    // Exactly one whitespace byte separates the header from the payload.
    void end_of_header() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
            fail("missing whitespace after header");
        }
        ++pos_;
    }

    std::size_t position() const { return pos_; }

    [[noreturn]] void fail(const std::string& message) const {
        throw FormatError(std::string(format_) + ": " + message, pos_);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    const char* format_;
    std::size_t pos_ = 0;
};

void append(std::vector<std::uint8_t>& out, const std::string& text) {
    out.insert(out.end(), text.begin(), text.end());
}

} // namespace

std::uint8_t quantize_pixel(double value) {
    const double clamped = value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

Image read_image_pgm(std::span<const std::uint8_t> bytes) {
    HeaderReader header(bytes, "PGM");
    if (header.token() != "P5") {
        throw FormatError("PGM: expected magic P5", 0);
    }
    const std::size_t width = header.positive_integer("width");
    const std::size_t height = header.positive_integer("height");
    const std::size_t maxval_at = header.position();
    const std::size_t maxval = header.positive_integer("maxval");
    if (maxval != 255) {
        throw FormatError("PGM: maxval " + std::to_string(maxval) + " unsupported, need 255",
                          maxval_at);
    }
    header.end_of_header();

    const std::size_t offset = header.position();
    const std::size_t count = width * height;
    if (bytes.size() - offset < count) {
        throw FormatError("PGM: truncated payload, expected " + std::to_string(count) +
                              " bytes, found " + std::to_string(bytes.size() - offset),
                          bytes.size());
    }
    std::vector<double> pixels(count);
    for (std::size_t i = 0; i < count; ++i) {
        pixels[i] = static_cast<double>(bytes[offset + i]) / 255.0;
    }
    return Image(width, height, std::move(pixels));
}

std::vector<std::uint8_t> write_image_pgm(const Image& img) {
    std::vector<std::uint8_t> out;
    append(out, "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                    "\n255\n");
    out.reserve(out.size() + img.size());
    for (double p : img.pixels()) {
        out.push_back(quantize_pixel(p));
    }
    return out;
}

SaliencyMap read_saliency_pfm(std::span<const std::uint8_t> bytes) {
    HeaderReader header(bytes, "PFM");
    if (header.token() != "Pf") {
        throw FormatError("PFM: expected grayscale magic Pf", 0);
    }
    const std::size_t width = header.positive_integer("width");
    const std::size_t height = header.positive_integer("height");
    const std::size_t scale_at = header.position();
    const std::string scale_text = header.token();
    double scale = 0.0;
    try {
        std::size_t used = 0;
        scale = std::stod(scale_text, &used);
        if (used != scale_text.size()) {
            throw std::invalid_argument(scale_text);
        }
    } catch (const std::exception&) {
        throw FormatError("PFM: bad scale '" + scale_text + "'", scale_at);
    }
    if (scale == 0.0 || !std::isfinite(scale)) {
        throw FormatError("PFM: scale must be finite and nonzero", scale_at);
    }
    header.end_of_header();

    const bool little_endian = scale < 0.0;
    const std::size_t offset = header.position();
    const std::size_t count = width * height;
    if ((bytes.size() - offset) / 4 < count) {
        throw FormatError("PFM: truncated payload, expected " + std::to_string(count * 4) +
                              " bytes",
                          bytes.size());
    }

    std::vector<float> values(count);
    for (std::size_t file_row = 0; file_row < height; ++file_row) {
        const std::size_t row = height - 1 - file_row;
        for (std::size_t col = 0; col < width; ++col) {
            const std::size_t at = offset + 4 * (file_row * width + col);
            std::uint32_t word = 0;
            std::memcpy(&word, bytes.data() + at, 4);
            if ((std::endian::native == std::endian::little) != little_endian) {
                word = __builtin_bswap32(word);
            }
            const float value = std::bit_cast<float>(word);
            if (std::isnan(value)) {
                throw FormatError("PFM: NaN value", at);
            }
            if (!(value >= 0.0f) || std::isinf(value)) {
                throw FormatError("PFM: saliency must be finite and non-negative", at);
            }
            values[row * width + col] = value;
        }
    }
    return SaliencyMap(width, height, std::move(values));
}

std::vector<std::uint8_t> write_saliency_pfm(const SaliencyMap& map) {
    std::vector<std::uint8_t> out;
    append(out, "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                    "\n-1.0\n");
    const std::size_t header = out.size();
    out.resize(header + 4 * map.size());
    const auto values = map.values();
    for (std::size_t file_row = 0; file_row < map.height(); ++file_row) {
        const std::size_t row = map.height() - 1 - file_row;
        for (std::size_t col = 0; col < map.width(); ++col) {
            auto word = std::bit_cast<std::uint32_t>(values[row * map.width() + col]);
            if constexpr (std::endian::native == std::endian::big) {
                word = __builtin_bswap32(word);
            }
            std::memcpy(out.data() + header + 4 * (file_row * map.width() + col), &word, 4);
        }
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("read failed: " + path);
    }
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot create " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

void write_file(const std::string& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Image load_image(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return read_image_pgm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.message(), e.offset());
    }
}

SaliencyMap load_saliency(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return read_saliency_pfm(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.message(), e.offset());
    }
}

} // namespace fidbench
