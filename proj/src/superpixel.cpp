#include "roadprop/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roadprop/raster.hpp"

namespace roadprop {

namespace {

struct Lab {
    double l = 0, a = 0, b = 0;
};

double srgb_to_linear(std::uint8_t c8) {
    const double c = c8 / 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

Lab rgb_to_lab(Rgb8 p) {
    const double r = srgb_to_linear(p.r);
    const double g = srgb_to_linear(p.g);
    const double b = srgb_to_linear(p.b);
    // sRGB -> XYZ, D65 white.
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double xn = 0.95047, yn = 1.0, zn = 1.08883;
    auto f = [](double t) {
        constexpr double d = 6.0 / 29.0;
        return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
    };
    const double fx = f(x / xn), fy = f(y / yn), fz = f(z / zn);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct Cluster {
    double l = 0, a = 0, b = 0;
    double x = 0, y = 0;
};

// Per-label 4-connected component bookkeeping used by the connectivity
// enforcement step.
struct Component {
    std::int32_t label = 0;
    std::vector<std::size_t> pixels;
    std::size_t first = 0;
};

}  // namespace

SuperpixelLabeling slic_segment(const RasterImage& img, const SlicParams& params) {
    const int w = img.width, h = img.height;
    const std::size_t area = static_cast<std::size_t>(w) * h;
    if (params.target_count < 1)
        throw std::invalid_argument("slic_segment: target_count must be >= 1");
    if (area < static_cast<std::size_t>(params.target_count))
        throw std::invalid_argument("slic_segment: image smaller than one cell");
    if (!(params.compactness > 0.0))
        throw std::invalid_argument("slic_segment: compactness must be > 0");

    std::vector<Lab> lab(area);
    for (std::size_t i = 0; i < area; ++i) lab[i] = rgb_to_lab(img.data[i]);

    const double spacing = std::sqrt(static_cast<double>(area) / params.target_count);

    // Grid initialization; ceil keeps at least target_count cells.
    const int nx = std::clamp(
        static_cast<int>(std::ceil(std::sqrt(params.target_count * double(w) / h))), 1, w);
    const int ny = std::clamp(static_cast<int>(std::ceil(double(params.target_count) / nx)), 1, h);

    auto gradient = [&](int x, int y) {
        const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
        const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
        const Lab& pl = lab[static_cast<std::size_t>(y) * w + xl];
        const Lab& pr = lab[static_cast<std::size_t>(y) * w + xr];
        const Lab& pu = lab[static_cast<std::size_t>(yu) * w + x];
        const Lab& pd = lab[static_cast<std::size_t>(yd) * w + x];
        auto sq = [](double v) { return v * v; };
        return sq(pr.l - pl.l) + sq(pr.a - pl.a) + sq(pr.b - pl.b) + sq(pd.l - pu.l) +
               sq(pd.a - pu.a) + sq(pd.b - pu.b);
    };

    std::vector<Cluster> centers;
    centers.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int cx = std::clamp(static_cast<int>((i + 0.5) * w / nx), 0, w - 1);
            int cy = std::clamp(static_cast<int>((j + 0.5) * h / ny), 0, h - 1);
            // Perturb to the lowest-gradient spot in the 3x3 window.
            double best = gradient(cx, cy);
            int bx = cx, by = cy;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int px = cx + dx, py = cy + dy;
                    if (px < 0 || px >= w || py < 0 || py >= h) continue;
                    const double g = gradient(px, py);
                    if (g < best) {
                        best = g;
                        bx = px;
                        by = py;
                    }
                }
            }
            const Lab& c = lab[static_cast<std::size_t>(by) * w + bx];
            centers.push_back({c.l, c.a, c.b, double(bx), double(by)});
        }
    }

    const double spatial_weight = params.compactness / spacing;
    std::vector<std::int32_t> labels(area, -1);
    std::vector<double> dist(area);

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::max());
        std::fill(labels.begin(), labels.end(), -1);
        // Centers scanned in id order with strict improvement, so equal
        // distances keep the lower id.
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const Cluster& c = centers[k];
            const int x0 = std::max(0, static_cast<int>(std::floor(c.x - 2 * spacing)));
            const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + 2 * spacing)));
            const int y0 = std::max(0, static_cast<int>(std::floor(c.y - 2 * spacing)));
            const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + 2 * spacing)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t idx = static_cast<std::size_t>(y) * w + x;
                    const Lab& p = lab[idx];
                    const double dc = std::sqrt((p.l - c.l) * (p.l - c.l) +
                                                (p.a - c.a) * (p.a - c.a) +
                                                (p.b - c.b) * (p.b - c.b));
                    const double dxy = std::sqrt((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y));
                    const double d = dc + spatial_weight * dxy;
                    if (d < dist[idx]) {
                        dist[idx] = d;
                        labels[idx] = static_cast<std::int32_t>(k);
                    }
                }
            }
        }
        // Any pixel outside every window joins the nearest center by full
        // distance (rare; degenerate geometries only).
        for (std::size_t idx = 0; idx < area; ++idx) {
            if (labels[idx] >= 0) continue;
            const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
            const Lab& p = lab[idx];
            for (std::size_t k = 0; k < centers.size(); ++k) {
                const Cluster& c = centers[k];
                const double dc = std::sqrt((p.l - c.l) * (p.l - c.l) +
                                            (p.a - c.a) * (p.a - c.a) +
                                            (p.b - c.b) * (p.b - c.b));
                const double dxy = std::sqrt((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y));
                const double d = dc + spatial_weight * dxy;
                if (d < dist[idx]) {
                    dist[idx] = d;
                    labels[idx] = static_cast<std::int32_t>(k);
                }
            }
        }

        std::vector<Cluster> sums(centers.size());
        std::vector<std::int64_t> counts(centers.size(), 0);
        for (std::size_t idx = 0; idx < area; ++idx) {
            const std::int32_t k = labels[idx];
            Cluster& s = sums[k];
            const Lab& p = lab[idx];
            s.l += p.l;
            s.a += p.a;
            s.b += p.b;
            s.x += static_cast<double>(idx % w);
            s.y += static_cast<double>(idx / w);
            ++counts[k];
        }
        double moved = 0.0;
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (counts[k] == 0) continue;
            Cluster next{sums[k].l / counts[k], sums[k].a / counts[k], sums[k].b / counts[k],
                         sums[k].x / counts[k], sums[k].y / counts[k]};
            const double dx = next.x - centers[k].x, dy = next.y - centers[k].y;
            moved = std::max(moved, std::sqrt(dx * dx + dy * dy));
            centers[k] = next;
        }
        if (moved < 0.5) break;
    }

    // Connectivity enforcement: find 4-connected components per label, keep
    // each label's largest component if it clears the size floor, and
    // absorb the rest into the largest adjacent survivor.
    std::vector<std::int32_t> comp_of(area, -1);
    std::vector<Component> comps;
    {
        std::vector<std::size_t> stack;
        for (std::size_t start = 0; start < area; ++start) {
            if (comp_of[start] >= 0) continue;
            const std::int32_t label = labels[start];
            const std::int32_t cid = static_cast<std::int32_t>(comps.size());
            comps.push_back({label, {}, start});
            comp_of[start] = cid;
            stack.assign(1, start);
            while (!stack.empty()) {
                const std::size_t idx = stack.back();
                stack.pop_back();
                comps[cid].pixels.push_back(idx);
                const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
                const int nbs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
                for (const auto& nb : nbs) {
                    if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= h) continue;
                    const std::size_t nidx = static_cast<std::size_t>(nb[1]) * w + nb[0];
                    if (comp_of[nidx] >= 0 || labels[nidx] != label) continue;
                    comp_of[nidx] = cid;
                    stack.push_back(nidx);
                }
            }
        }
    }

    const std::size_t min_size =
        std::max<std::size_t>(1, area / (4 * std::max<std::size_t>(1, centers.size())));
    std::vector<std::int32_t> main_comp(centers.size(), -1);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        std::int32_t& m = main_comp[comps[c].label];
        if (m < 0 || comps[c].pixels.size() > comps[m].pixels.size())
            m = static_cast<std::int32_t>(c);
    }
    std::vector<bool> survives(comps.size(), false);
    std::size_t survivor_count = 0;
    std::int32_t biggest = -1;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const std::int32_t c = main_comp[k];
        if (c < 0) continue;
        if (biggest < 0 || comps[c].pixels.size() > comps[biggest].pixels.size()) biggest = c;
        if (comps[c].pixels.size() >= min_size) {
            survives[c] = true;
            ++survivor_count;
        }
    }
    if (survivor_count == 0 && biggest >= 0) survives[biggest] = true;

    std::vector<std::size_t> region_size(comps.size(), 0);
    std::vector<std::int32_t> final_comp(area);  // surviving component per pixel
    for (std::size_t idx = 0; idx < area; ++idx) final_comp[idx] = comp_of[idx];
    for (std::size_t c = 0; c < comps.size(); ++c)
        if (survives[c]) region_size[c] = comps[c].pixels.size();

    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            if (survives[c] || comps[c].pixels.empty()) continue;
            // Largest adjacent surviving region; ties to the lowest id.
            std::int32_t best = -1;
            for (const std::size_t idx : comps[c].pixels) {
                const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
                const int nbs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
                for (const auto& nb : nbs) {
                    if (nb[0] < 0 || nb[0] >= w || nb[1] < 0 || nb[1] >= h) continue;
                    const std::int32_t oc = final_comp[static_cast<std::size_t>(nb[1]) * w + nb[0]];
                    if (!survives[oc] || oc == static_cast<std::int32_t>(c)) continue;
                    if (best < 0 || region_size[oc] > region_size[best] ||
                        (region_size[oc] == region_size[best] && oc < best))
                        best = oc;
                }
            }
            if (best < 0) continue;  // try again after neighbors are absorbed
            for (const std::size_t idx : comps[c].pixels) final_comp[idx] = best;
            region_size[best] += comps[c].pixels.size();
            comps[best].pixels.insert(comps[best].pixels.end(), comps[c].pixels.begin(),
                                      comps[c].pixels.end());
            comps[c].pixels.clear();
            progress = true;
        }
    }

    // Compact ids in scan order of first appearance.
    SuperpixelLabeling out;
    out.width = w;
    out.height = h;
    out.labels.assign(area, -1);
    std::vector<std::int32_t> remap(comps.size(), -1);
    std::int32_t next_id = 0;
    for (std::size_t idx = 0; idx < area; ++idx) {
        const std::int32_t c = final_comp[idx];
        if (remap[c] < 0) remap[c] = next_id++;
        out.labels[idx] = remap[c];
    }
    out.count = next_id;
    return out;
}

std::vector<SuperpixelStats> compute_stats(const HsvImage& img, const SuperpixelLabeling& labeling,
                                           const HistogramSpec& spec) {
    require_same_size(img.width, img.height, labeling.width, labeling.height, "compute_stats");
    if (spec.h_bins < 1 || spec.s_bins < 1)
        throw std::invalid_argument("compute_stats: histogram bins must be >= 1");

    const int bins = spec.total_bins();
    std::vector<SuperpixelStats> stats(labeling.count);
    for (int k = 0; k < labeling.count; ++k) {
        stats[k].id = k;
        stats[k].histogram.bins.assign(bins, 0.0);
    }

    const double h_bin_width = 360.0 / spec.h_bins;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::int32_t k = labeling.at(x, y);
            SuperpixelStats& s = stats[k];
            const Hsv& p = img.at(x, y);
            const int hb = std::clamp(static_cast<int>(p.h / h_bin_width), 0, spec.h_bins - 1);
            const int sb = std::clamp(static_cast<int>(p.s * spec.s_bins), 0, spec.s_bins - 1);
            s.histogram.bins[static_cast<std::size_t>(hb) * spec.s_bins + sb] += 1.0;
            s.centroid_x += x;
            s.centroid_y += y;
            ++s.pixel_count;
        }
    }
    for (SuperpixelStats& s : stats) {
        if (s.pixel_count == 0)
            throw std::logic_error("compute_stats: label with no pixels");
        s.centroid_x /= static_cast<double>(s.pixel_count);
        s.centroid_y /= static_cast<double>(s.pixel_count);
        for (double& b : s.histogram.bins) b /= static_cast<double>(s.pixel_count);
    }
    return stats;
}

namespace {

void require_normalized(const ColorHistogram& h, const char* what) {
    double sum = 0.0;
    for (double b : h.bins) {
        if (b < 0.0) throw std::invalid_argument(std::string(what) + ": negative bin");
        sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(what) + ": histogram not normalized");
}

}  // namespace

double kl_divergence(const ColorHistogram& p, const ColorHistogram& q, double eps) {
    if (p.bins.size() != q.bins.size())
        throw std::invalid_argument("kl_divergence: size mismatch");
    require_normalized(p, "kl_divergence");
    require_normalized(q, "kl_divergence");
    const double n = static_cast<double>(p.bins.size());
    const double z = 1.0 + n * eps;
    double kl = 0.0;
    for (std::size_t i = 0; i < p.bins.size(); ++i) {
        const double pi = (p.bins[i] + eps) / z;
        const double qi = (q.bins[i] + eps) / z;
        kl += pi * std::log(pi / qi);
    }
    return std::max(kl, 0.0);
}

ColorHistogram cumulative_class_histogram(const std::vector<SuperpixelStats>& stats,
                                          const std::vector<int>& members) {
    if (members.empty()) throw NoSeedsError("cumulative_class_histogram: empty member set");
    const std::size_t bins = stats.at(static_cast<std::size_t>(members[0])).histogram.bins.size();
    ColorHistogram out;
    out.bins.assign(bins, 0.0);
    double total = 0.0;
    for (int id : members) {
        const SuperpixelStats& s = stats.at(static_cast<std::size_t>(id));
        if (s.histogram.bins.size() != bins)
            throw std::invalid_argument("cumulative_class_histogram: bin count mismatch");
        const double wgt = static_cast<double>(s.pixel_count);
        for (std::size_t i = 0; i < bins; ++i) out.bins[i] += wgt * s.histogram.bins[i];
        total += wgt;
    }
    for (double& b : out.bins) b /= total;
    return out;
}

}  // namespace roadprop
