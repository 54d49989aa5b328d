#pragma once

#include <utility>
#include <vector>

#include "roadprop/grid.hpp"

namespace roadprop {

// Hexcone RGB -> HSV. Achromatic pixels (max == min) get H = 0, S = 0 so
// downstream histograms stay deterministic.
Hsv rgb_to_hsv(Rgb8 p);
Rgb8 hsv_to_rgb(const Hsv& c);

HsvImage rgb_to_hsv(const RasterImage& img);

// Placement of fixed-size tiles over a parent raster. Tiles are laid out
// on a cols x rows grid; edge tiles extend past the parent and are filled
// by edge replication.
struct TileGrid {
    int tile_size = 512;
    int parent_width = 0;
    int parent_height = 0;
    int cols = 0;
    int rows = 0;
    std::vector<std::pair<int, int>> offsets;  // (x, y) origin of each tile

    int padded_width() const { return cols * tile_size; }
    int padded_height() const { return rows * tile_size; }
};

struct Tiling {
    std::vector<RasterImage> tiles;
    TileGrid grid;
};

Tiling tile(const RasterImage& img, int size);

// Reassembles the padded parent from tiles; inverse of tile() up to the
// replicated border.
RasterImage assemble(const std::vector<RasterImage>& tiles, const TileGrid& grid);

RasterImage crop(const RasterImage& img, int width, int height);

}  // namespace roadprop
