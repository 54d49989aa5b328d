#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "roadprop/grid.hpp"
#include "roadprop/superpixel.hpp"

namespace roadprop {

enum class SeedClass : std::uint8_t { Free = 0, ForegroundSeed = 1, BackgroundSeed = 2 };

struct SeedAssignment {
    std::vector<SeedClass> classes;  // per superpixel id
};

// Undirected adjacency between superpixel centroids.
struct AdjacencyGraph {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;  // first < second, sorted, unique
};

// Binary labeling energy: per-node unary costs plus symmetric n-link
// weights paid when an edge's endpoints take different labels. Hard seed
// constraints use hard_cost, which exceeds the sum of every finite
// capacity in the instance.
struct EnergyGraph {
    struct Edge {
        int a = 0;
        int b = 0;
        double weight = 0.0;
    };
    std::vector<double> cost_fg;  // unary cost of labeling the node foreground
    std::vector<double> cost_bg;  // unary cost of labeling the node background
    std::vector<Edge> edges;
    double hard_cost = 0.0;

    int node_count() const { return static_cast<int>(cost_fg.size()); }
};

struct CutResult {
    std::vector<std::uint8_t> labels;  // 1 = foreground
    double cut_value = 0.0;
    double flow_value = 0.0;
};

// Delaunay edges of the centroid set (incremental Bowyer-Watson under a
// bounding super-triangle). Duplicate points merge onto the first id;
// fully collinear input degrades to a consecutive-neighbor chain.
AdjacencyGraph delaunay_adjacency(const std::vector<Vec2>& centroids);

// ForegroundSeed iff the superpixel contains a scribble pixel;
// BackgroundSeed iff it has none and lies entirely in the NonRoad region
// of the buffer mask; Free otherwise. Throws NoSeedsError when either
// seed class is empty.
SeedAssignment assign_seeds(const SuperpixelLabeling& labeling,
                            const BinaryMask& scribble_raster,
                            const TriStateMask& buffer);

// Unary terms: seeds get (0, hard) / (hard, 0); free nodes pay
// KL(hist_i || class hist) per label. Pairwise weight
// w_ij = gamma * exp(-KL_sym(hist_i, hist_j) / sigma_h).
EnergyGraph build_energy(const std::vector<SuperpixelStats>& stats,
                         const AdjacencyGraph& adjacency,
                         const SeedAssignment& seeds,
                         const ColorHistogram& fg_hist,
                         const ColorHistogram& bg_hist,
                         double gamma = 1.0, double sigma_h = 1.0,
                         double kl_eps = 1e-8);

// Exact global minimum of the binary submodular energy via
// Boykov-Kolmogorov augmenting-path max-flow on the s-t reduction.
CutResult max_flow(const EnergyGraph& graph);

// Evaluates the energy of an arbitrary labeling (1 = foreground).
double labeling_energy(const EnergyGraph& graph, const std::vector<std::uint8_t>& labels);

// Projects per-node labels back to pixels.
BinaryMask graph_mask(const SuperpixelLabeling& labeling, const CutResult& cut);

}  // namespace roadprop
