#pragma once

// Shared test fixtures: deterministic random inputs, brute-force oracles
// kept independent of the library implementations they check, and the
// synthetic road scenes used by the pipeline tests.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "roadprop/grid.hpp"
#include "roadprop/scribble.hpp"

namespace testutil {

using namespace roadprop;

inline RasterImage random_image(int w, int h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> color(0, 255);
    RasterImage img(w, h);
    for (Rgb8& p : img.data)
        p = {static_cast<std::uint8_t>(color(rng)), static_cast<std::uint8_t>(color(rng)),
             static_cast<std::uint8_t>(color(rng))};
    return img;
}

inline ProbMap random_prob(int w, int h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    ProbMap p(w, h);
    for (float& v : p.data) v = dist(rng);
    return p;
}

inline BinaryMask random_mask(int w, int h, double density, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::bernoulli_distribution dist(density);
    BinaryMask m(w, h, 0);
    for (auto& v : m.data) v = dist(rng) ? 1 : 0;
    return m;
}

// O(N*S) exact oracle: per-pixel minimum squared distance over all seeds,
// then the same sqrt the library applies.
inline std::vector<double> brute_distance(const BinaryMask& seeds) {
    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < seeds.height; ++y)
        for (int x = 0; x < seeds.width; ++x)
            if (seeds.at(x, y)) pts.emplace_back(x, y);
    std::vector<double> out(seeds.pixel_count(), kNoSeedDistance);
    if (pts.empty()) return out;
    for (int y = 0; y < seeds.height; ++y) {
        for (int x = 0; x < seeds.width; ++x) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (const auto& [sx, sy] : pts) {
                const std::int64_t dx = x - sx, dy = y - sy;
                best = std::min(best, dx * dx + dy * dy);
            }
            out[seeds.index(x, y)] = std::sqrt(static_cast<double>(best));
        }
    }
    return out;
}

// Dense Gaussian kernel entry, the loss-kernel contract.
inline double kernel_entry(const Rgb8& cp, const Rgb8& cq, double dx, double dy, double sigma_rgb,
                           double sigma_xy) {
    const double dr = double(cp.r) - cq.r, dg = double(cp.g) - cq.g, db = double(cp.b) - cq.b;
    return std::exp(-(dr * dr + dg * dg + db * db) / (2 * sigma_rgb * sigma_rgb) -
                    (dx * dx + dy * dy) / (2 * sigma_xy * sigma_xy));
}

// Independent double-precision evaluation of S' W (1-S).
inline double brute_regularized_loss(const std::vector<double>& s, const RasterImage& img,
                                     double sigma_rgb, double sigma_xy) {
    const int w = img.width;
    const std::size_t n = img.pixel_count();
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
        double inner = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            const int qx = static_cast<int>(q % w), qy = static_cast<int>(q / w);
            inner += kernel_entry(img.data[p], img.data[q], px - qx, py - qy, sigma_rgb,
                                  sigma_xy) *
                     (1.0 - s[q]);
        }
        total += s[p] * inner;
    }
    return total;
}

inline double point_segment_distance(double px, double py, double ax, double ay, double bx,
                                     double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

// Synthetic aerial scene: straight and curved roads of known width over a
// contrasting background, with additive noise. Ground truth is computed
// from exact point-to-segment distances, independent of the pipeline.
struct RoadScene {
    RasterImage image;
    BinaryMask gt_surface;
    BinaryMask gt_boundary;  // gt pixels with a non-gt 8-neighbor
    ScribbleSet scribbles;   // centerlines, foreground
};

inline RoadScene make_road_scene(std::uint32_t seed, int size = 256) {
    struct Road {
        Polyline line;
        double width;
    };
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    const double s = size;

    std::vector<Road> roads;
    {
        // Horizontal road, crossed by the vertical one.
        const double y = s * (0.16 + jitter(rng));
        roads.push_back({Polyline{{{0.0, y}, {s - 1, y}}}, 16.0});
    }
    {
        // Vertical road, ending before the curve below.
        const double x = s * (0.80 + jitter(rng));
        roads.push_back({Polyline{{{x, 0.0}, {x, s * 0.42}}}, 14.0});
    }
    {
        // Curved road: sine sweep across the full width.
        Polyline line;
        const double base = s * (0.62 + jitter(rng));
        const double amp = s * 0.10;
        for (int x = 0; x < size; x += 4)
            line.vertices.push_back({double(x), base + amp * std::sin(x / (s * 0.155))});
        roads.push_back({line, 18.0});
    }
    {
        // Second horizontal road near the bottom.
        const double y = s * (0.90 + jitter(rng));
        roads.push_back({Polyline{{{0.0, y}, {s - 1, y}}}, 16.0});
    }
    {
        // Short narrow diagonal, clear of the others.
        const double x0 = s * (0.08 + jitter(rng)), y0 = s * (0.46 + jitter(rng));
        const double x1 = s * (0.24 + jitter(rng)), y1 = s * (0.33 + jitter(rng));
        roads.push_back({Polyline{{{x0, y0}, {x1, y1}}}, 10.0});
    }

    RoadScene scene;
    scene.gt_surface = BinaryMask(size, size, 0);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            for (const Road& r : roads) {
                bool inside = false;
                for (std::size_t i = 0; i + 1 < r.line.vertices.size() && !inside; ++i) {
                    const Vec2& a = r.line.vertices[i];
                    const Vec2& b = r.line.vertices[i + 1];
                    if (point_segment_distance(x, y, a.x, a.y, b.x, b.y) <= r.width / 2)
                        inside = true;
                }
                if (inside) {
                    scene.gt_surface.at(x, y) = 1;
                    break;
                }
            }
        }
    }

    scene.gt_boundary = BinaryMask(size, size, 0);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            if (!scene.gt_surface.at(x, y)) continue;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (scene.gt_surface.in_bounds(nx, ny) && !scene.gt_surface.at(nx, ny)) {
                        scene.gt_boundary.at(x, y) = 1;
                        dy = 2;
                        break;
                    }
                }
            }
        }
    }

    const Rgb8 road_color{105, 105, 105};
    const Rgb8 bg_color{70, 140, 80};
    std::normal_distribution<double> noise(0.0, 8.0);
    scene.image = RasterImage(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const Rgb8 base = scene.gt_surface.at(x, y) ? road_color : bg_color;
            auto ch = [&](double v) {
                return static_cast<std::uint8_t>(std::clamp(v + noise(rng), 0.0, 255.0));
            };
            scene.image.at(x, y) = {ch(base.r), ch(base.g), ch(base.b)};
        }
    }

    for (const Road& r : roads)
        scene.scribbles.scribbles.push_back({r.line, ScribbleCategory::Foreground});
    return scene;
}

// Unique per-test scratch directory under the system temp dir.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("roadprop_test_" + tag + "_" + std::to_string(counter.fetch_add(1)) + "_" +
                 std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
