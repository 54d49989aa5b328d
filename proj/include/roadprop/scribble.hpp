#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "roadprop/grid.hpp"

namespace roadprop {

struct Polyline {
    std::vector<Vec2> vertices;  // pixel coordinates, real-valued
};

enum class ScribbleCategory : std::uint8_t { Foreground, Background };

struct Scribble {
    Polyline line;
    ScribbleCategory category = ScribbleCategory::Foreground;
};

struct ScribbleSet {
    std::vector<Scribble> scribbles;

    bool empty() const { return scribbles.empty(); }
};

// Buffer widths in meters plus the ground sampling distance that converts
// them to pixels.
struct BufferParams {
    double a1_m = 6.0;
    double a2_m = 18.0;
    double gsd_m = 1.2;

    double a1_px() const { return a1_m / gsd_m; }
    double a2_px() const { return a2_m / gsd_m; }
    void validate() const;
};

// Euclidean distance in pixels to the nearest seed. Seed pixels carry
// exactly 0; a field built from an empty seed mask carries the no-seed
// sentinel everywhere.
using DistanceField = Grid<double>;
inline constexpr double kNoSeedDistance = std::numeric_limits<double>::max();

// One-pixel-wide 8-connected Bresenham trace of every polyline segment;
// out-of-bounds portions are clipped. Vertices are rounded to the nearest
// pixel first.
BinaryMask rasterize(const ScribbleSet& set, int width, int height);
BinaryMask rasterize(const ScribbleSet& set, int width, int height,
                     ScribbleCategory only);

// Exact Euclidean distance transform (two-pass lower-envelope algorithm).
// Matches the brute-force per-pixel minimum bit for bit.
DistanceField distance_transform(const BinaryMask& seeds);

// Tri-state buffer inference around the rasterized foreground scribbles:
// d <= a1 -> Road, d > a2 -> NonRoad, otherwise Unknown.
TriStateMask buffer_mask(const ScribbleSet& scribbles, const BufferParams& params,
                         int width, int height);
TriStateMask buffer_mask(const BinaryMask& foreground_raster, const BufferParams& params);

// Binary structuring element with an anchor inside its bounds.
struct StructuringElement {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells;  // row-major, nonzero = set

    bool cell(int x, int y) const {
        return cells[static_cast<std::size_t>(y) * width + x] != 0;
    }
    // size x size cross: row size/2 and column size/2 set.
    static StructuringElement cross(int size);
};

// Morphological erosion. A pixel survives iff every set kernel cell,
// placed with the anchor on the pixel, lands on a set mask pixel;
// out-of-bounds cells count as unset, so the image border erodes.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& kernel,
                 int anchor_x, int anchor_y);

// Zhang-Suen iterative thinning to a fixed point. Output is a subset of
// the input and preserves 8-connectivity of each component.
BinaryMask skeletonize(const BinaryMask& mask);

// Converts a thin mask into polylines by walking 8-connected curves.
// Pixels with >= 3 set neighbors act as junctions and split curves; the
// union of the rasterized polylines reproduces the input mask exactly.
std::vector<Polyline> trace_curves(const BinaryMask& thin);

// Foreground scribbles simulated from a road-surface ground truth:
// skeletonize(erode(gt, cross(7), anchor (3,6))) traced into polylines.
ScribbleSet simulate_scribbles(const BinaryMask& gt_surface);

// Text format: one polyline per line, category tag (fg|bg) followed by
// whitespace-separated "x,y" vertex pairs.
ScribbleSet read_scribbles(const std::filesystem::path& path);
void write_scribbles(const std::filesystem::path& path, const ScribbleSet& set);
ScribbleSet parse_scribbles(const std::string& text);

}  // namespace roadprop
