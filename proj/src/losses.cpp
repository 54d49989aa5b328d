#include "roadprop/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gaussian_grid.hpp"

namespace roadprop {

namespace {

// ---------------------------------------------------------------------------
// Dense Gaussian kernel over (R,G,B,x,y), unit peak: W_pp = 1.
// ---------------------------------------------------------------------------

// One brute-force pass (W v) in double precision. The loss and gradient
// paths stay in double end to end so finite-difference checks are not
// polluted by float truncation.
std::vector<double> brute_filter(const std::vector<double>& v, const RasterImage& img,
                                 const KernelParams& params) {
    const int w = img.width, h = img.height;
    const std::size_t n = img.pixel_count();
    const double inv2_rgb = 1.0 / (2.0 * params.sigma_rgb * params.sigma_rgb);
    const double inv2_xy = 1.0 / (2.0 * params.sigma_xy * params.sigma_xy);
    std::vector<double> out(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
        const Rgb8 cp = img.data[p];
        double acc = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            const int qx = static_cast<int>(q % w), qy = static_cast<int>(q / w);
            const Rgb8 cq = img.data[q];
            const double dr = double(cp.r) - cq.r;
            const double dg = double(cp.g) - cq.g;
            const double db = double(cp.b) - cq.b;
            const double dx = px - qx, dy = py - qy;
            const double e = (dr * dr + dg * dg + db * db) * inv2_rgb +
                             (dx * dx + dy * dy) * inv2_xy;
            acc += std::exp(-e) * v[q];
        }
        out[p] = acc;
    }
    (void)h;
    return out;
}

std::vector<float> rgbxy_features(const RasterImage& img, const KernelParams& params) {
    if (!(params.sigma_rgb > 0.0) || !(params.sigma_xy > 0.0))
        throw std::invalid_argument("KernelParams: bandwidths must be > 0");
    const float inv_rgb = static_cast<float>(1.0 / params.sigma_rgb);
    const float inv_xy = static_cast<float>(1.0 / params.sigma_xy);
    std::vector<float> f(img.pixel_count() * detail::kGridDim);
    std::size_t i = 0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Rgb8 p = img.at(x, y);
            f[i * detail::kGridDim + 0] = p.r * inv_rgb;
            f[i * detail::kGridDim + 1] = p.g * inv_rgb;
            f[i * detail::kGridDim + 2] = p.b * inv_rgb;
            f[i * detail::kGridDim + 3] = x * inv_xy;
            f[i * detail::kGridDim + 4] = y * inv_xy;
            ++i;
        }
    }
    return f;
}

void require_prob_map(const ProbMap& s, const char* what) {
    for (float v : s.data)
        if (!(v >= 0.0f && v <= 1.0f))
            throw std::invalid_argument(std::string(what) + ": value outside [0,1]");
}

}  // namespace

double partial_bce(const ProbMap& seg, const TriStateMask& proposal, bool mean_normalized) {
    require_same_size(seg, proposal, "partial_bce");
    constexpr double kClamp = 1e-7;
    double sum = 0.0;
    std::int64_t known = 0;
    for (std::size_t i = 0; i < seg.data.size(); ++i) {
        const TriState y = proposal.data[i];
        if (y == TriState::Unknown) continue;
        ++known;
        const double s = seg.data[i];
        if (y == TriState::Road)
            sum -= std::log(std::max(s, kClamp));
        else
            sum -= std::log(std::max(1.0 - s, kClamp));
    }
    if (mean_normalized && known > 0) sum /= static_cast<double>(known);
    return sum;
}

FloatField dense_filter_brute(const ProbMap& s, const RasterImage& img,
                              const KernelParams& params) {
    require_same_size(s, img, "dense_filter_brute");
    std::vector<double> v(s.data.begin(), s.data.end());
    const std::vector<double> filtered = brute_filter(v, img, params);
    FloatField out(s.width, s.height);
    for (std::size_t i = 0; i < filtered.size(); ++i) out.data[i] = static_cast<float>(filtered[i]);
    return out;
}

FloatField dense_filter_fast(const ProbMap& s, const RasterImage& img,
                             const KernelParams& params) {
    require_same_size(s, img, "dense_filter_fast");
    const detail::GaussianGridFilter filter(rgbxy_features(img, params),
                                            static_cast<int>(img.pixel_count()));
    FloatField out(s.width, s.height);
    filter.apply(s.data.data(), out.data.data(), 1);
    return out;
}

double regularized_loss(const ProbMap& seg, const RasterImage& img, const KernelParams& params,
                        FilterBackend backend) {
    require_same_size(seg, img, "regularized_loss");
    require_prob_map(seg, "regularized_loss");
    const std::size_t n = seg.data.size();
    double r = 0.0;
    if (backend == FilterBackend::Brute) {
        std::vector<double> inv(n);
        for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 - seg.data[i];
        const std::vector<double> filtered = brute_filter(inv, img, params);
        for (std::size_t i = 0; i < n; ++i) r += seg.data[i] * filtered[i];
    } else {
        FloatField inv(seg.width, seg.height);
        for (std::size_t i = 0; i < n; ++i) inv.data[i] = 1.0f - seg.data[i];
        const FloatField filtered = dense_filter_fast(inv, img, params);
        for (std::size_t i = 0; i < n; ++i)
            r += static_cast<double>(seg.data[i]) * filtered.data[i];
    }
    return r;
}

FloatField regularized_loss_grad(const ProbMap& seg, const RasterImage& img,
                                 const KernelParams& params, FilterBackend backend,
                                 RegGradForm form) {
    require_same_size(seg, img, "regularized_loss_grad");
    require_prob_map(seg, "regularized_loss_grad");
    const std::size_t n = seg.data.size();
    FloatField grad(seg.width, seg.height);
    if (backend == FilterBackend::Brute) {
        std::vector<double> sv(seg.data.begin(), seg.data.end());
        const std::vector<double> ws = brute_filter(sv, img, params);
        if (form == RegGradForm::Full) {
            const std::vector<double> w1 = brute_filter(std::vector<double>(n, 1.0), img, params);
            for (std::size_t i = 0; i < n; ++i)
                grad.data[i] = static_cast<float>(w1[i] - 2.0 * ws[i]);
        } else {
            for (std::size_t i = 0; i < n; ++i) grad.data[i] = static_cast<float>(-2.0 * ws[i]);
        }
    } else {
        const detail::GaussianGridFilter filter(rgbxy_features(img, params),
                                                static_cast<int>(n));
        // One pass over (1, S) interleaved gives W*1 and W*S together.
        std::vector<float> in(n * 2), out(n * 2);
        for (std::size_t i = 0; i < n; ++i) {
            in[i * 2] = 1.0f;
            in[i * 2 + 1] = seg.data[i];
        }
        filter.apply(in.data(), out.data(), 2);
        if (form == RegGradForm::Full) {
            for (std::size_t i = 0; i < n; ++i) grad.data[i] = out[i * 2] - 2.0f * out[i * 2 + 1];
        } else {
            for (std::size_t i = 0; i < n; ++i) grad.data[i] = -2.0f * out[i * 2 + 1];
        }
    }
    return grad;
}

double boundary_mse(const ProbMap& target, const ProbMap& boundary) {
    require_same_size(target, boundary, "boundary_mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < target.data.size(); ++i) {
        const double d = double(target.data[i]) - double(boundary.data[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(target.data.size());
}

LossReport joint_loss(const ProbMap& seg, const TriStateMask& proposal, const RasterImage& img,
                      const ProbMap& edge_target, const ProbMap& boundary,
                      const LossWeights& weights, const KernelParams& params,
                      FilterBackend backend) {
    LossReport report;
    report.pbce = partial_bce(seg, proposal);
    report.reg = regularized_loss(seg, img, params, backend);
    report.bound = boundary_mse(edge_target, boundary);
    report.seg = report.pbce + weights.alpha * report.reg;
    report.total = report.seg + weights.beta * report.bound;
    return report;
}

BinaryMask binarize(const ProbMap& seg, double threshold) {
    BinaryMask out(seg.width, seg.height, 0);
    for (std::size_t i = 0; i < seg.data.size(); ++i)
        out.data[i] = static_cast<double>(seg.data[i]) >= threshold ? 1 : 0;
    return out;
}

ProbMap sobel_edges(const RasterImage& img) {
    const int w = img.width, h = img.height;
    std::vector<double> lum(img.pixel_count());
    for (std::size_t i = 0; i < lum.size(); ++i) {
        const Rgb8 p = img.data[i];
        lum[i] = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    }
    auto at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return lum[static_cast<std::size_t>(y) * w + x];
    };
    std::vector<double> mag(img.pixel_count());
    double peak = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            const double gy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
            const double m = std::hypot(gx, gy);
            mag[static_cast<std::size_t>(y) * w + x] = m;
            peak = std::max(peak, m);
        }
    }
    ProbMap out(w, h, 0.0f);
    if (peak > 0.0)
        for (std::size_t i = 0; i < mag.size(); ++i)
            out.data[i] = static_cast<float>(mag[i] / peak);
    return out;
}

}  // namespace roadprop
