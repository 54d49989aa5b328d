#include "roadprop/raster.hpp"

#include <algorithm>
#include <cmath>

namespace roadprop {

Hsv rgb_to_hsv(Rgb8 p) {
    const float r = p.r / 255.0f;
    const float g = p.g / 255.0f;
    const float b = p.b / 255.0f;
    const float mx = std::max({r, g, b});
    const float mn = std::min({r, g, b});
    const float delta = mx - mn;

    Hsv out;
    out.v = mx;
    if (delta <= 0.0f || mx <= 0.0f) {
        return out;  // achromatic: H = 0, S = 0
    }
    out.s = delta / mx;

    float h;
    if (mx == r) {
        h = 60.0f * ((g - b) / delta);
    } else if (mx == g) {
        h = 60.0f * ((b - r) / delta + 2.0f);
    } else {
        h = 60.0f * ((r - g) / delta + 4.0f);
    }
    if (h < 0.0f) h += 360.0f;
    if (h >= 360.0f) h -= 360.0f;
    out.h = h;
    return out;
}

Rgb8 hsv_to_rgb(const Hsv& c) {
    const float v = std::clamp(c.v, 0.0f, 1.0f);
    const float s = std::clamp(c.s, 0.0f, 1.0f);
    float h = c.h;
    h = h - 360.0f * std::floor(h / 360.0f);  // wrap into [0, 360)

    const float chroma = v * s;
    const float hp = h / 60.0f;
    const float x = chroma * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
    float r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
        case 0: r = chroma; g = x; break;
        case 1: r = x; g = chroma; break;
        case 2: g = chroma; b = x; break;
        case 3: g = x; b = chroma; break;
        case 4: r = x; b = chroma; break;
        default: r = chroma; b = x; break;
    }
    const float m = v - chroma;
    auto to8 = [](float f) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(f, 0.0f, 1.0f) * 255.0f));
    };
    return Rgb8{to8(r + m), to8(g + m), to8(b + m)};
}

HsvImage rgb_to_hsv(const RasterImage& img) {
    HsvImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = rgb_to_hsv(img.data[i]);
    return out;
}

Tiling tile(const RasterImage& img, int size) {
    if (img.width < 1 || img.height < 1)
        throw std::invalid_argument("tile: zero-sized image");
    if (size < 1)
        throw std::invalid_argument("tile: size must be >= 1");

    Tiling out;
    TileGrid& grid = out.grid;
    grid.tile_size = size;
    grid.parent_width = img.width;
    grid.parent_height = img.height;
    grid.cols = (img.width + size - 1) / size;
    grid.rows = (img.height + size - 1) / size;

    for (int ty = 0; ty < grid.rows; ++ty) {
        for (int tx = 0; tx < grid.cols; ++tx) {
            const int ox = tx * size;
            const int oy = ty * size;
            grid.offsets.emplace_back(ox, oy);
            RasterImage t(size, size);
            for (int y = 0; y < size; ++y) {
                const int sy = std::min(oy + y, img.height - 1);
                for (int x = 0; x < size; ++x) {
                    const int sx = std::min(ox + x, img.width - 1);
                    t.at(x, y) = img.at(sx, sy);
                }
            }
            out.tiles.push_back(std::move(t));
        }
    }
    return out;
}

RasterImage assemble(const std::vector<RasterImage>& tiles, const TileGrid& grid) {
    if (tiles.size() != grid.offsets.size())
        throw std::invalid_argument("assemble: tile count does not match grid");
    RasterImage out(grid.padded_width(), grid.padded_height());
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        const auto [ox, oy] = grid.offsets[k];
        const RasterImage& t = tiles[k];
        if (t.width != grid.tile_size || t.height != grid.tile_size)
            throw std::invalid_argument("assemble: tile has wrong dimensions");
        for (int y = 0; y < t.height; ++y)
            for (int x = 0; x < t.width; ++x) out.at(ox + x, oy + y) = t.at(x, y);
    }
    return out;
}

RasterImage crop(const RasterImage& img, int width, int height) {
    if (width > img.width || height > img.height)
        throw std::invalid_argument("crop: region exceeds image");
    RasterImage out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out.at(x, y) = img.at(x, y);
    return out;
}

}  // namespace roadprop
