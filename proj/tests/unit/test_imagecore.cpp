#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <set>
#include <string>

#include "fidbench/error.hpp"
#include "fidbench/image.hpp"
#include "fidbench/rng.hpp"

using namespace fidbench;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return {s.begin(), s.end()};
}

Image random_image(Rng& rng, std::size_t w, std::size_t h) {
    std::vector<double> px(w * h);
    for (auto& v : px) {
        v = rng.uniform01();
    }
    return Image(w, h, std::move(px));
}

} // namespace

TEST_CASE("flatten_index examples") {
    CHECK(flatten_index(0, 0, 128, 128) == 0);
    CHECK(flatten_index(1, 0, 128, 128) == 128);
    CHECK(flatten_index(2, 3, 4, 4) == 11);
    CHECK_THROWS_AS(flatten_index(4, 0, 4, 4), IndexError);
    CHECK_THROWS_AS(flatten_index(0, 4, 4, 4), IndexError);
}

TEST_CASE("flatten_index is a bijection on 8x8") {
    std::set<std::size_t> seen;
    for (std::size_t r = 0; r < 8; ++r) {
        for (std::size_t c = 0; c < 8; ++c) {
            const auto i = flatten_index(r, c, 8, 8);
            CHECK(i < 64);
            seen.insert(i);
            const auto [rr, cc] = unflatten_index(i, 8, 8);
            CHECK(rr == r);
            CHECK(cc == c);
        }
    }
    CHECK(seen.size() == 64);
    CHECK_THROWS_AS(unflatten_index(64, 8, 8), IndexError);
}

TEST_CASE("image pixels are validated") {
    CHECK_THROWS_AS(Image(2, 2, std::vector<double>{0, 0, 0}), ValidationError);
    CHECK_THROWS_AS(Image(1, 1, std::vector<double>{1.5}), ValidationError);
    CHECK_THROWS_AS(Image(1, 1, std::vector<double>{std::nan("")}), ValidationError);
    Image img(3, 2);
    img.set(1, 2, 0.5);
    CHECK(img.at(1, 2) == 0.5);
    CHECK(img.pixels()[5] == 0.5);
    CHECK_THROWS_AS(img.set(0, 0, -0.1), ValidationError);
}

TEST_CASE("saliency values are validated") {
    CHECK_THROWS_AS(SaliencyMap(1, 1, std::vector<float>{-1.0f}), ValidationError);
    CHECK_THROWS_AS(SaliencyMap(1, 1, std::vector<float>{std::numeric_limits<float>::infinity()}),
                    ValidationError);
    const SaliencyMap m(2, 1, std::vector<float>{0.25f, 3.0f});
    const auto d = m.as_doubles();
    CHECK(d[0] == 0.25);
    CHECK(d[1] == 3.0);
}

TEST_CASE("PGM decode of a hand-written file") {
    auto bytes = bytes_of("P5\n# comment\n3 2\n255\n");
    for (std::uint8_t b : {0, 51, 255, 128, 1, 254}) {
        bytes.push_back(b);
    }
    const Image img = read_image_pgm(bytes);
    CHECK(img.width() == 3);
    CHECK(img.height() == 2);
    CHECK(img.at(0, 1) == 51.0 / 255.0);
    CHECK(img.at(0, 2) == 1.0);
    CHECK(img.at(1, 0) == 128.0 / 255.0);
    auto expected = bytes_of("P5\n3 2\n255\n");
    expected.insert(expected.end(), bytes.end() - 6, bytes.end());
    CHECK(write_image_pgm(img) == expected);
}

TEST_CASE("PGM malformed inputs raise FormatError") {
    CHECK_THROWS_AS(read_image_pgm(bytes_of("P2\n1 1\n255\n0")), FormatError);
    CHECK_THROWS_AS(read_image_pgm(bytes_of("P5\n1 1\n65535\n00")), FormatError);
    CHECK_THROWS_AS(read_image_pgm(bytes_of("P5\n0 1\n255\n")), FormatError);
    CHECK_THROWS_AS(read_image_pgm(bytes_of("P5\nx 1\n255\n")), FormatError);
    const auto truncated = bytes_of("P5\n2 2\n255\nabc");
    try {
        read_image_pgm(truncated);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == truncated.size());
    }
}

TEST_CASE("PGM round trip is within one grey level") {
    Rng rng(7);
    for (int k = 0; k < 100; ++k) {
        const auto w = static_cast<std::size_t>(rng.uniform_int(1, 40));
        const auto h = static_cast<std::size_t>(rng.uniform_int(1, 40));
        const Image img = random_image(rng, w, h);
        const Image back = read_image_pgm(write_image_pgm(img));
        REQUIRE(back.width() == w);
        REQUIRE(back.height() == h);
        for (std::size_t i = 0; i < img.size(); ++i) {
            CHECK(std::fabs(back.pixels()[i] - img.pixels()[i]) <= 1.0 / 255.0);
        }
        // quantized images survive unchanged
        CHECK(read_image_pgm(write_image_pgm(back)) == back);
    }
}

TEST_CASE("quantize_pixel rounds to nearest") {
    CHECK(quantize_pixel(0.0) == 0);
    CHECK(quantize_pixel(1.0) == 255);
    CHECK(quantize_pixel(0.5) == 128);
    CHECK(quantize_pixel(0.4 / 255.0) == 0);
    CHECK(quantize_pixel(0.6 / 255.0) == 1);
}

TEST_CASE("PFM header, row order and payload") {
    const SaliencyMap m(2, 2, std::vector<float>{1.0f, 2.0f, 3.0f, 4.0f});
    const auto bytes = write_saliency_pfm(m);
    const std::string header = "Pf\n2 2\n-1.0\n";
    REQUIRE(bytes.size() == header.size() + 16);
    CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) == header);
    float first = 0.0f;
    std::memcpy(&first, bytes.data() + header.size(), 4);
    CHECK(first == 3.0f); // bottom row comes first
    CHECK(read_saliency_pfm(bytes) == m);
}

TEST_CASE("PFM round trip is bit-exact") {
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        const auto w = static_cast<std::size_t>(rng.uniform_int(1, 32));
        const auto h = static_cast<std::size_t>(rng.uniform_int(1, 32));
        std::vector<float> v(w * h);
        for (auto& x : v) {
            x = static_cast<float>(rng.uniform01() * 1e3 * static_cast<double>(rng.uniform_int(0, 1)));
        }
        const SaliencyMap m(w, h, v);
        const SaliencyMap back = read_saliency_pfm(write_saliency_pfm(m));
        REQUIRE(back.size() == m.size());
        CHECK(std::memcmp(back.values().data(), m.values().data(), m.size() * 4) == 0);
    }
    std::vector<float> big(128 * 128);
    for (std::size_t i = 0; i < big.size(); ++i) {
        big[i] = static_cast<float>(i) * 1e-3f;
    }
    const SaliencyMap large(128, 128, big);
    CHECK(read_saliency_pfm(write_saliency_pfm(large)) == large);
    const SaliencyMap zeros(4, 4);
    CHECK(read_saliency_pfm(write_saliency_pfm(zeros)) == zeros);
}

TEST_CASE("PFM rejects NaN and negative values") {
    auto bytes = write_saliency_pfm(SaliencyMap(2, 1, std::vector<float>{1.0f, 1.0f}));
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + bytes.size() - 4, &nan, 4);
    CHECK_THROWS_AS(read_saliency_pfm(bytes), FormatError);
    const float neg = -2.0f;
    std::memcpy(bytes.data() + bytes.size() - 4, &neg, 4);
    CHECK_THROWS_AS(read_saliency_pfm(bytes), FormatError);
    CHECK_THROWS_AS(read_saliency_pfm(bytes_of("PF\n1 1\n-1.0\n0000")), FormatError);
    CHECK_THROWS_AS(read_saliency_pfm(bytes_of("Pf\n1 1\n-1.0\n00")), FormatError);
}

TEST_CASE("PFM big-endian input") {
    auto bytes = bytes_of("Pf\n1 1\n1.0\n");
    const float v = 1.5f;
    std::uint8_t raw[4];
    std::memcpy(raw, &v, 4);
    for (int i = 3; i >= 0; --i) {
        bytes.push_back(raw[i]);
    }
    CHECK(read_saliency_pfm(bytes).values()[0] == 1.5f);
}

TEST_CASE("file helpers") {
    const auto dir = std::filesystem::temp_directory_path() / "fidbench_imagecore_test";
    std::filesystem::create_directories(dir);
    const Image img(2, 1, std::vector<double>{0.0, 1.0});
    write_file((dir / "a.pgm").string(), write_image_pgm(img));
    CHECK(load_image((dir / "a.pgm").string()) == img);
    CHECK_THROWS_AS(load_image((dir / "missing.pgm").string()), IoError);
    write_file((dir / "bad.pgm").string(), std::string("P5\n2 1\n255\n"));
    try {
        load_image((dir / "bad.pgm").string());
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("bad.pgm") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
