#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "roadprop/grid.hpp"

namespace roadprop {

// Raised when a seed class (foreground or background) has no members, in
// which case the graph stage cannot run and callers fall back to the
// buffer mask.
struct NoSeedsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SlicParams {
    int target_count = 400;
    double compactness = 20.0;
    int max_iterations = 10;
};

struct SuperpixelLabeling {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> labels;  // per pixel, in [0, count)
    int count = 0;

    std::int32_t at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

struct HistogramSpec {
    int h_bins = 20;
    int s_bins = 20;

    int total_bins() const { return h_bins * s_bins; }
};

// Joint H x S histogram, flattened row-major in H. Normalized to sum 1.
struct ColorHistogram {
    std::vector<double> bins;
};

struct SuperpixelStats {
    int id = 0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    std::int64_t pixel_count = 0;
    ColorHistogram histogram;
};

// SLIC clustering in CIELAB+XY with grid initialization, gradient-based
// center perturbation, windowed assignment, and connectivity enforcement.
// Deterministic: ties break toward the lower superpixel id.
SuperpixelLabeling slic_segment(const RasterImage& img, const SlicParams& params);

// Per-superpixel centroid, pixel count, and normalized H x S histogram.
std::vector<SuperpixelStats> compute_stats(const HsvImage& img,
                                           const SuperpixelLabeling& labeling,
                                           const HistogramSpec& spec = {});

// KL(p || q) in nats over epsilon-smoothed, renormalized histograms.
// Always finite and >= 0. Inputs must be normalized.
double kl_divergence(const ColorHistogram& p, const ColorHistogram& q,
                     double eps = 1e-8);

// Pixel-count-weighted sum of member histograms, renormalized. Throws
// NoSeedsError for an empty member set.
ColorHistogram cumulative_class_histogram(const std::vector<SuperpixelStats>& stats,
                                          const std::vector<int>& members);

}  // namespace roadprop
