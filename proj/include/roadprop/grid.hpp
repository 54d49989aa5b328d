#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace roadprop {

// Row-major 2-D pixel grid, the container behind every raster type.
// A default-constructed grid is empty (0x0); sized grids require
// dimensions >= 1.
template <typename T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("Grid: dimensions must be >= 1");
        data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    T& at(int x, int y) { return data[index(x, y)]; }
    const T& at(int x, int y) const { return data[index(x, y)]; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::size_t pixel_count() const { return data.size(); }
    bool same_size(const Grid& other) const {
        return width == other.width && height == other.height;
    }
    bool operator==(const Grid& other) const = default;
};

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb8&) const = default;
};

// H in degrees [0, 360), S and V as fractions in [0, 1].
struct Hsv {
    float h = 0.0f, s = 0.0f, v = 0.0f;
};

enum class TriState : std::uint8_t { NonRoad = 0, Unknown = 1, Road = 2 };

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

using RasterImage = Grid<Rgb8>;
using HsvImage = Grid<Hsv>;
using TriStateMask = Grid<TriState>;
using BinaryMask = Grid<std::uint8_t>;  // 0 or 1 per pixel

// Per-pixel values in [0, 1] when used as a probability map; filter
// outputs and gradients reuse the same container without the range
// constraint. Stored as 32-bit floats; accumulation happens in double.
using ProbMap = Grid<float>;
using FloatField = Grid<float>;

inline void require_same_size(int wa, int ha, int wb, int hb, const char* what) {
    if (wa != wb || ha != hb)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

template <typename A, typename B>
void require_same_size(const Grid<A>& a, const Grid<B>& b, const char* what) {
    require_same_size(a.width, a.height, b.width, b.height, what);
}

}  // namespace roadprop
