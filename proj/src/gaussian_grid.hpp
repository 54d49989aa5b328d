#pragma once

// Fast dense Gaussian filtering over 5-D (R,G,B,x,y) features: splat onto
// a regular lattice spanning the data, blur each axis with a sampled
// Gaussian FIR, slice back. Internal to the filter backends.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace roadprop::detail {

inline constexpr int kGridDim = 5;

// Approximates v -> W v for W_pq = exp(-0.5 * |f_p - f_q|^2), f in units
// of the per-dimension bandwidth, W_pp = 1.
//
// Grid spacing is cell_size bandwidths per cell. The multilinear splat
// and slice each act as a tent-kernel convolution with variance
// (cell_size^2)/6 per axis, so the FIR blur runs at the reduced width
// sigma_b^2 = 1 - cell_size^2/3 to keep the composite kernel at unit
// variance. The composite diagonal is computable per point in closed
// form and divided out symmetrically, pinning the kernel peak at 1.
class GaussianGridFilter {
public:
    // features: n rows of kGridDim bandwidth-scaled values.
    GaussianGridFilter(const std::vector<float>& features, int n, double cell_size = 0.5,
                       std::size_t max_cells = std::size_t(1) << 24)
        : n_(n) {
        // Coarsen until the lattice fits the cell budget.
        double h = cell_size;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 24) throw std::runtime_error("GaussianGridFilter: cannot fit lattice");
            if (plan(features, h) <= max_cells) break;
            h *= 1.26;
        }
        build(features, h);
    }

    int point_count() const { return n_; }

    // out = calibrated W * in, value_size interleaved channels.
    void apply(const float* in, float* out, int value_size) const {
        const int vd = value_size;
        std::vector<float> grid(cells_ * vd, 0.0f);
        std::vector<float> scratch(cells_ * vd, 0.0f);

        // Splat with the diagonal pre-scaling folded in.
        for (int k = 0; k < n_; ++k) {
            const float scale = inv_sqrt_diag_[static_cast<std::size_t>(k)];
            const auto& sp = splats_[static_cast<std::size_t>(k)];
            for (int c = 0; c < (1 << kGridDim); ++c) {
                const std::size_t cell = sp.cell[c];
                const float w = sp.weight[c] * scale;
                if (w == 0.0f) continue;
                for (int v = 0; v < vd; ++v)
                    grid[cell * vd + v] += w * in[static_cast<std::size_t>(k) * vd + v];
            }
        }

        // Separable Gaussian FIR along each lattice axis.
        for (int dim = 0; dim < kGridDim; ++dim) {
            const std::size_t stride = strides_[dim] * vd;
            const int extent = shape_[dim];
            const auto& taps = taps_[dim];
            const int radius = static_cast<int>(taps.size()) - 1;
            const std::size_t lines = cells_ / static_cast<std::size_t>(extent);
            for (std::size_t line = 0; line < lines; ++line) {
                const std::size_t base = line_base(line, dim) * vd;
                for (int i = 0; i < extent; ++i) {
                    for (int v = 0; v < vd; ++v) {
                        float acc = taps[0] * grid[base + static_cast<std::size_t>(i) * stride + v];
                        for (int t = 1; t <= radius; ++t) {
                            if (i - t >= 0)
                                acc += taps[t] *
                                       grid[base + static_cast<std::size_t>(i - t) * stride + v];
                            if (i + t < extent)
                                acc += taps[t] *
                                       grid[base + static_cast<std::size_t>(i + t) * stride + v];
                        }
                        scratch[base + static_cast<std::size_t>(i) * stride + v] = acc;
                    }
                }
            }
            std::swap(grid, scratch);
        }

        // Slice with the diagonal post-scaling.
        for (int k = 0; k < n_; ++k) {
            const float scale = inv_sqrt_diag_[static_cast<std::size_t>(k)];
            const auto& sp = splats_[static_cast<std::size_t>(k)];
            for (int v = 0; v < vd; ++v) out[static_cast<std::size_t>(k) * vd + v] = 0.0f;
            for (int c = 0; c < (1 << kGridDim); ++c) {
                const std::size_t cell = sp.cell[c];
                const float w = sp.weight[c] * scale;
                if (w == 0.0f) continue;
                for (int v = 0; v < vd; ++v)
                    out[static_cast<std::size_t>(k) * vd + v] += w * grid[cell * vd + v];
            }
        }
    }

private:
    struct Splat {
        std::array<std::size_t, 1 << kGridDim> cell;
        std::array<float, 1 << kGridDim> weight;
    };

    std::size_t plan(const std::vector<float>& features, double h) {
        for (int d = 0; d < kGridDim; ++d) {
            float lo = features[static_cast<std::size_t>(d)];
            float hi = lo;
            for (int k = 1; k < n_; ++k) {
                const float v = features[static_cast<std::size_t>(k) * kGridDim + d];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            origin_[d] = lo;
            shape_[d] = static_cast<int>(std::floor((hi - lo) / h)) + 2;
        }
        std::size_t cells = 1;
        for (int d = 0; d < kGridDim; ++d) {
            if (cells > (std::size_t(1) << 60) / static_cast<std::size_t>(shape_[d]))
                return std::size_t(-1);
            cells *= static_cast<std::size_t>(shape_[d]);
        }
        return cells;
    }

    void build(const std::vector<float>& features, double h) {
        cells_ = plan(features, h);
        strides_[kGridDim - 1] = 1;
        for (int d = kGridDim - 2; d >= 0; --d)
            strides_[d] = strides_[d + 1] * static_cast<std::size_t>(shape_[d + 1]);

        // When the budget forces cells wider than the tent compensation can
        // absorb, floor the blur variance; the composite kernel then comes
        // out wider than requested but stays a bounded, unit-peak Gaussian.
        const double sigma_b2 = std::max(1.0 - h * h / 3.0, 0.05);
        const double sigma_b = std::sqrt(sigma_b2);
        const int radius = std::max(1, static_cast<int>(std::ceil(3.5 * sigma_b / h)));
        for (int d = 0; d < kGridDim; ++d) {
            taps_[d].resize(static_cast<std::size_t>(radius) + 1);
            for (int t = 0; t <= radius; ++t)
                taps_[d][static_cast<std::size_t>(t)] =
                    static_cast<float>(std::exp(-0.5 * (t * h) * (t * h) / sigma_b2));
        }
        const double tap1 = std::exp(-0.5 * h * h / sigma_b2);

        splats_.resize(static_cast<std::size_t>(n_));
        inv_sqrt_diag_.resize(static_cast<std::size_t>(n_));
        for (int k = 0; k < n_; ++k) {
            std::array<int, kGridDim> base;
            std::array<double, kGridDim> frac;
            double diag = 1.0;
            for (int d = 0; d < kGridDim; ++d) {
                const double g =
                    (features[static_cast<std::size_t>(k) * kGridDim + d] - origin_[d]) / h;
                base[d] = static_cast<int>(std::floor(g));
                frac[d] = g - base[d];
                const double w0 = 1.0 - frac[d], w1 = frac[d];
                diag *= w0 * w0 + w1 * w1 + 2.0 * w0 * w1 * tap1;
            }
            inv_sqrt_diag_[static_cast<std::size_t>(k)] =
                static_cast<float>(1.0 / std::sqrt(diag));

            Splat& sp = splats_[static_cast<std::size_t>(k)];
            for (int c = 0; c < (1 << kGridDim); ++c) {
                std::size_t cell = 0;
                double w = 1.0;
                for (int d = 0; d < kGridDim; ++d) {
                    const int bit = (c >> d) & 1;
                    cell += strides_[d] * static_cast<std::size_t>(base[d] + bit);
                    w *= bit ? frac[d] : 1.0 - frac[d];
                }
                sp.cell[c] = cell;
                sp.weight[c] = static_cast<float>(w);
            }
        }
    }

    // Start offset of the line'th 1-D run along dim.
    std::size_t line_base(std::size_t line, int dim) const {
        std::size_t base = 0;
        for (int d = kGridDim - 1; d >= 0; --d) {
            if (d == dim) continue;
            const std::size_t extent = static_cast<std::size_t>(shape_[d]);
            base += (line % extent) * strides_[d];
            line /= extent;
        }
        return base;
    }

    int n_ = 0;
    std::size_t cells_ = 0;
    std::array<float, kGridDim> origin_{};
    std::array<int, kGridDim> shape_{};
    std::array<std::size_t, kGridDim> strides_{};
    std::array<std::vector<float>, kGridDim> taps_;
    std::vector<Splat> splats_;
    std::vector<float> inv_sqrt_diag_;
};

}  // namespace roadprop::detail
