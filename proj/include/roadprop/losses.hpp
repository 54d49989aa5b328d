#pragma once

#include "roadprop/grid.hpp"

namespace roadprop {

// Bandwidths of the dense Gaussian kernel over RGBXY features: color in
// 8-bit units, space in pixels.
struct KernelParams {
    double sigma_rgb = 15.0;
    double sigma_xy = 100.0;
};

struct LossWeights {
    double alpha = 0.5;  // regularizer weight
    double beta = 0.7;   // boundary weight
};

struct LossReport {
    double pbce = 0.0;
    double reg = 0.0;
    double bound = 0.0;
    double seg = 0.0;    // pbce + alpha * reg
    double total = 0.0;  // seg + beta * bound
};

enum class FilterBackend { Brute, Fast };

// Gradient form of the regularizer: Full is the exact gradient
// W*1 - 2*W*S of S'W(1-S) for symmetric W; TwoWsOnly drops the
// S-independent W*1 term and returns -2*W*S.
enum class RegGradForm { Full, TwoWsOnly };

// Binary cross-entropy summed over known (Road / NonRoad) pixels only.
// Log arguments are clamped below at 1e-7; a perfect 0/1 prediction
// scores exactly 0. mean_normalized divides by the known-pixel count.
double partial_bce(const ProbMap& seg, const TriStateMask& proposal,
                   bool mean_normalized = false);

// (W s)_p = sum_q exp(-|I_p - I_q|^2 / (2 sigma_rgb^2)
//                    -|x_p - x_q|^2 / (2 sigma_xy^2)) * s_q,
// diagonal included with weight 1. O(N^2); intended for small images.
FloatField dense_filter_brute(const ProbMap& s, const RasterImage& img,
                              const KernelParams& params);

// Permutohedral-lattice approximation of dense_filter_brute on the 5-D
// (R,G,B,x,y) feature space. Deterministic; relative L2 error against the
// brute filter stays within a few percent.
FloatField dense_filter_fast(const ProbMap& s, const RasterImage& img,
                             const KernelParams& params);

// R(S) = sum_p S_p * (W (1 - S))_p, always >= 0 for S in [0,1]^N.
double regularized_loss(const ProbMap& seg, const RasterImage& img,
                        const KernelParams& params,
                        FilterBackend backend = FilterBackend::Fast);

// Analytic gradient of regularized_loss (two filter passes).
FloatField regularized_loss_grad(const ProbMap& seg, const RasterImage& img,
                                 const KernelParams& params,
                                 FilterBackend backend = FilterBackend::Fast,
                                 RegGradForm form = RegGradForm::Full);

// Mean squared error between a target edge map and a boundary map.
double boundary_mse(const ProbMap& target, const ProbMap& boundary);

// total = pbce + alpha * reg + beta * bound, all from the same
// accumulator widths.
LossReport joint_loss(const ProbMap& seg, const TriStateMask& proposal,
                      const RasterImage& img, const ProbMap& edge_target,
                      const ProbMap& boundary, const LossWeights& weights = {},
                      const KernelParams& params = {},
                      FilterBackend backend = FilterBackend::Fast);

// Pixel set iff value >= threshold.
BinaryMask binarize(const ProbMap& seg, double threshold = 0.5);

// Sobel gradient magnitude of luminance, rescaled to [0, 1]. A classical
// stand-in for learned boundary detectors when no precomputed edge map is
// available.
ProbMap sobel_edges(const RasterImage& img);

}  // namespace roadprop
