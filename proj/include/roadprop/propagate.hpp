#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "roadprop/grid.hpp"
#include "roadprop/scribble.hpp"
#include "roadprop/superpixel.hpp"

namespace roadprop {

struct PropagationConfig {
    BufferParams buffer;
    SlicParams slic;
    HistogramSpec hist;
    double pairwise_gamma = 1.0;
    double pairwise_sigma = 1.0;
    double kl_eps = 1e-8;
    int tile_size = 512;
};

// Tri-state proposal produced by fusing the buffer and graph masks. Its
// Road region always contains every rasterized foreground scribble pixel.
using ProposalMask = TriStateMask;

// Fusion rule: a pixel that is road in the graph mask but NonRoad in the
// buffer mask becomes Unknown; every other pixel keeps its buffer value.
ProposalMask fuse_masks(const TriStateMask& buffer, const BinaryMask& graph);

// Stage timings in milliseconds for one tile, for logging.
struct TileTrace {
    double buffer_ms = 0.0;
    double slic_ms = 0.0;
    double stats_ms = 0.0;
    double graph_ms = 0.0;
    double flow_ms = 0.0;
    bool graph_stage_ran = false;
};

// Full per-tile pipeline: buffer inference, SLIC, histograms, seed
// assignment, Delaunay graph energy, max-flow, projection, fusion. When
// seed assignment finds no foreground or no background seeds the graph
// stage is skipped and the buffer mask is returned unchanged.
ProposalMask propagate_tile(const RasterImage& img, const ScribbleSet& scribbles,
                            const PropagationConfig& config, TileTrace* trace = nullptr);
ProposalMask propagate_tile(const RasterImage& img, const BinaryMask& foreground_raster,
                            const PropagationConfig& config, TileTrace* trace = nullptr);

struct TileSummary {
    std::string stem;
    double road_frac = 0.0;
    double unknown_frac = 0.0;
    double nonroad_frac = 0.0;
};

struct DatasetSummary {
    std::vector<TileSummary> tiles;    // sorted by stem
    std::vector<std::string> skipped;  // stems with no scribble file
};

// Invoked per finished tile (serialized under a lock); timing values vary
// run to run, everything else is deterministic.
using TileLogger = std::function<void(const TileSummary&, const TileTrace&)>;

// Batch propagation over paired image / scribble directories. Scribbles
// pair by stem as either "<stem>.txt" polylines or "<stem>.png"
// pre-rasterized foreground masks. Tiles are independent; jobs > 1 runs
// them on a worker pool with byte-identical outputs.
DatasetSummary propagate_dataset(const std::filesystem::path& image_dir,
                                 const std::filesystem::path& scribble_dir,
                                 const std::filesystem::path& out_dir,
                                 const PropagationConfig& config, int jobs = 1,
                                 const std::optional<std::filesystem::path>& overlay_dir = {},
                                 const TileLogger& logger = {});

// Input image with Road tinted red at 50% opacity and Unknown yellow at 30%.
RasterImage overlay_proposal(const RasterImage& img, const ProposalMask& proposal);

}  // namespace roadprop
