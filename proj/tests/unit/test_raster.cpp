#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "roadprop/raster.hpp"

using namespace roadprop;

TEST_CASE("rgb_to_hsv primary colors") {
    const Hsv red = rgb_to_hsv(Rgb8{255, 0, 0});
    CHECK(red.h == doctest::Approx(0.0));
    CHECK(red.s == doctest::Approx(1.0));
    CHECK(red.v == doctest::Approx(1.0));

    const Hsv green = rgb_to_hsv(Rgb8{0, 255, 0});
    CHECK(green.h == doctest::Approx(120.0));
    CHECK(green.s == doctest::Approx(1.0));
    CHECK(green.v == doctest::Approx(1.0));
}

TEST_CASE("rgb_to_hsv achromatic convention") {
    const Hsv gray = rgb_to_hsv(Rgb8{128, 128, 128});
    CHECK(gray.h == 0.0f);
    CHECK(gray.s == 0.0f);
    CHECK(gray.v == doctest::Approx(128.0 / 255.0).epsilon(1e-3));

    const Hsv black = rgb_to_hsv(Rgb8{0, 0, 0});
    CHECK(black.h == 0.0f);
    CHECK(black.s == 0.0f);
    CHECK(black.v == 0.0f);
}

TEST_CASE("hsv round-trip within one per channel") {
    // Exhaustive over a 32^3 subsample of the 8-bit cube.
    for (int r = 0; r < 256; r += 8) {
        for (int g = 0; g < 256; g += 8) {
            for (int b = 0; b < 256; b += 8) {
                const Rgb8 in{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                              static_cast<std::uint8_t>(b)};
                const Rgb8 out = hsv_to_rgb(rgb_to_hsv(in));
                REQUIRE(std::abs(int(out.r) - r) <= 1);
                REQUIRE(std::abs(int(out.g) - g) <= 1);
                REQUIRE(std::abs(int(out.b) - b) <= 1);
            }
        }
    }
}

TEST_CASE("tile exact divisor yields identity tiles") {
    const RasterImage img = testutil::random_image(1024, 1024, 1);
    const Tiling t = tile(img, 512);
    REQUIRE(t.tiles.size() == 4);
    CHECK(t.grid.offsets ==
          std::vector<std::pair<int, int>>{{0, 0}, {512, 0}, {0, 512}, {512, 512}});
    CHECK(t.grid.cols == 2);
    CHECK(t.grid.rows == 2);
}

TEST_CASE("tile identity when size matches") {
    const RasterImage img = testutil::random_image(512, 512, 2);
    const Tiling t = tile(img, 512);
    REQUIRE(t.tiles.size() == 1);
    CHECK(t.tiles[0] == img);
}

TEST_CASE("tile pads edges by replication and reassembles") {
    const RasterImage img = testutil::random_image(600, 600, 3);
    const Tiling t = tile(img, 512);
    REQUIRE(t.tiles.size() == 4);

    const RasterImage padded = assemble(t.tiles, t.grid);
    REQUIRE(padded.width == 1024);
    REQUIRE(padded.height == 1024);
    // Interior matches, padding replicates the last row/column.
    for (int y = 0; y < 1024; ++y)
        for (int x = 0; x < 1024; ++x)
            REQUIRE(padded.at(x, y) == img.at(std::min(x, 599), std::min(y, 599)));
    CHECK(crop(padded, 600, 600) == img);
}

TEST_CASE("tiling covers every parent pixel exactly once") {
    const RasterImage img = testutil::random_image(70, 45, 4);
    const Tiling t = tile(img, 32);
    Grid<int> seen(70, 45, 0);
    for (std::size_t k = 0; k < t.tiles.size(); ++k) {
        const auto [ox, oy] = t.grid.offsets[k];
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x)
                if (seen.in_bounds(ox + x, oy + y)) ++seen.at(ox + x, oy + y);
    }
    for (int v : seen.data) REQUIRE(v == 1);
}

TEST_CASE("tile rejects invalid sizes") {
    CHECK_THROWS_AS(tile(RasterImage(), 512), std::invalid_argument);
    CHECK_THROWS_AS(tile(testutil::random_image(8, 8, 5), 0), std::invalid_argument);
}
