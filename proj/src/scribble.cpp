#include "roadprop/scribble.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "roadprop/io.hpp"

namespace roadprop {

void BufferParams::validate() const {
    if (!(gsd_m > 0.0)) throw std::invalid_argument("BufferParams: gsd_m must be > 0");
    if (!(a1_m > 0.0) || !(a1_m < a2_m))
        throw std::invalid_argument("BufferParams: requires 0 < a1_m < a2_m");
}

namespace {

void draw_segment(BinaryMask& mask, int x0, int y0, int x1, int y1) {
    // Bresenham; produces an 8-connected trace. Out-of-bounds pixels are
    // skipped, which clips the segment against the image.
    const int dx = std::abs(x1 - x0);
    const int sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0);
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        if (mask.in_bounds(x0, y0)) mask.at(x0, y0) = 1;
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

int round_px(double v) { return static_cast<int>(std::llround(v)); }

}  // namespace

BinaryMask rasterize(const ScribbleSet& set, int width, int height) {
    BinaryMask mask(width, height, 0);
    for (const Scribble& s : set.scribbles) {
        const auto& vs = s.line.vertices;
        if (vs.empty()) continue;
        if (vs.size() == 1) {
            const int x = round_px(vs[0].x), y = round_px(vs[0].y);
            if (mask.in_bounds(x, y)) mask.at(x, y) = 1;
            continue;
        }
        for (std::size_t i = 0; i + 1 < vs.size(); ++i)
            draw_segment(mask, round_px(vs[i].x), round_px(vs[i].y), round_px(vs[i + 1].x),
                         round_px(vs[i + 1].y));
    }
    return mask;
}

BinaryMask rasterize(const ScribbleSet& set, int width, int height, ScribbleCategory only) {
    ScribbleSet filtered;
    for (const Scribble& s : set.scribbles)
        if (s.category == only) filtered.scribbles.push_back(s);
    return rasterize(filtered, width, height);
}

namespace {

// Values stay exact integers well below 2^53, so the parabola
// intersections are computed from exact inputs.
constexpr double kBigSq = 1e15;

// 1-D squared-distance lower envelope (Felzenszwalb-Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = double(q) - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

DistanceField distance_transform(const BinaryMask& seeds) {
    const int w = seeds.width, h = seeds.height;
    DistanceField field(w, h, 0.0);

    // Column pass: squared distance to the nearest seed within each column.
    std::vector<double> colsq(static_cast<std::size_t>(w) * h, kBigSq);
    for (int x = 0; x < w; ++x) {
        int last = -1;
        for (int y = 0; y < h; ++y) {
            if (seeds.at(x, y)) last = y;
            if (last >= 0) {
                const double dy = y - last;
                colsq[field.index(x, y)] = dy * dy;
            }
        }
        last = -1;
        for (int y = h - 1; y >= 0; --y) {
            if (seeds.at(x, y)) last = y;
            if (last >= 0) {
                const double dy = last - y;
                colsq[field.index(x, y)] = std::min(colsq[field.index(x, y)], dy * dy);
            }
        }
    }

    // Row pass: lower envelope over the column distances.
    std::vector<double> f(w), d(w), z(w + 1);
    std::vector<int> v(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = colsq[field.index(x, y)];
        edt_1d(f, d, v, z);
        for (int x = 0; x < w; ++x) {
            field.at(x, y) = d[x] >= kBigSq / 2 ? kNoSeedDistance
                                                : std::sqrt(static_cast<double>(
                                                      static_cast<std::int64_t>(d[x] + 0.5)));
        }
    }
    return field;
}

TriStateMask buffer_mask(const BinaryMask& foreground_raster, const BufferParams& params) {
    params.validate();
    const double a1 = params.a1_px();
    const double a2 = params.a2_px();
    const DistanceField dist = distance_transform(foreground_raster);
    TriStateMask mask(foreground_raster.width, foreground_raster.height, TriState::NonRoad);
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        const double d = dist.data[i];
        if (d <= a1)
            mask.data[i] = TriState::Road;
        else if (d > a2)
            mask.data[i] = TriState::NonRoad;
        else
            mask.data[i] = TriState::Unknown;
    }
    return mask;
}

TriStateMask buffer_mask(const ScribbleSet& scribbles, const BufferParams& params, int width,
                         int height) {
    return buffer_mask(rasterize(scribbles, width, height, ScribbleCategory::Foreground),
                       params);
}

StructuringElement StructuringElement::cross(int size) {
    if (size < 1) throw std::invalid_argument("cross: size must be >= 1");
    StructuringElement se;
    se.width = size;
    se.height = size;
    se.cells.assign(static_cast<std::size_t>(size) * size, 0);
    const int mid = size / 2;
    for (int i = 0; i < size; ++i) {
        se.cells[static_cast<std::size_t>(mid) * size + i] = 1;  // row
        se.cells[static_cast<std::size_t>(i) * size + mid] = 1;  // column
    }
    return se;
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& kernel, int anchor_x,
                 int anchor_y) {
    if (anchor_x < 0 || anchor_x >= kernel.width || anchor_y < 0 || anchor_y >= kernel.height)
        throw std::invalid_argument("erode: anchor outside kernel");
    BinaryMask out(mask.width, mask.height, 0);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            bool keep = true;
            for (int ky = 0; keep && ky < kernel.height; ++ky) {
                for (int kx = 0; kx < kernel.width; ++kx) {
                    if (!kernel.cell(kx, ky)) continue;
                    const int mx = x + kx - anchor_x;
                    const int my = y + ky - anchor_y;
                    if (!mask.in_bounds(mx, my) || !mask.at(mx, my)) {
                        keep = false;
                        break;
                    }
                }
            }
            if (keep) out.at(x, y) = 1;
        }
    }
    return out;
}

namespace {

// Zhang-Suen neighborhood in the order p2..p9 = N, NE, E, SE, S, SW, W, NW.
constexpr std::array<std::pair<int, int>, 8> kNbr = {{{0, -1},
                                                      {1, -1},
                                                      {1, 0},
                                                      {1, 1},
                                                      {0, 1},
                                                      {-1, 1},
                                                      {-1, 0},
                                                      {-1, -1}}};

inline int px(const BinaryMask& m, int x, int y) {
    return m.in_bounds(x, y) ? m.at(x, y) : 0;
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& mask) {
    BinaryMask cur = mask;
    BinaryMask next = cur;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            next = cur;
            for (int y = 0; y < cur.height; ++y) {
                for (int x = 0; x < cur.width; ++x) {
                    if (!cur.at(x, y)) continue;
                    int n[8];
                    for (int i = 0; i < 8; ++i) n[i] = px(cur, x + kNbr[i].first, y + kNbr[i].second);
                    const int b = n[0] + n[1] + n[2] + n[3] + n[4] + n[5] + n[6] + n[7];
                    if (b < 2 || b > 6) continue;
                    int a = 0;
                    for (int i = 0; i < 8; ++i)
                        if (n[i] == 0 && n[(i + 1) % 8] == 1) ++a;
                    if (a != 1) continue;
                    // n[0]=N(p2) n[2]=E(p4) n[4]=S(p6) n[6]=W(p8)
                    if (pass == 0) {
                        if (n[0] * n[2] * n[4] != 0) continue;
                        if (n[2] * n[4] * n[6] != 0) continue;
                    } else {
                        if (n[0] * n[2] * n[6] != 0) continue;
                        if (n[0] * n[4] * n[6] != 0) continue;
                    }
                    next.at(x, y) = 0;
                    changed = true;
                }
            }
            std::swap(cur, next);
        }
    }
    return cur;
}

namespace {

int neighbor_count(const BinaryMask& m, int x, int y) {
    int c = 0;
    for (const auto& [dx, dy] : kNbr) c += px(m, x + dx, y + dy);
    return c;
}

struct Tracer {
    const BinaryMask& thin;
    BinaryMask visited;   // chain pixels already traced
    BinaryMask covered;   // pixels emitted into any polyline
    BinaryMask junction;  // >= 3 set neighbors
    std::vector<Polyline> out;

    explicit Tracer(const BinaryMask& m)
        : thin(m),
          visited(m.width, m.height, 0),
          covered(m.width, m.height, 0),
          junction(m.width, m.height, 0) {}

    bool is_chain(int x, int y) const {
        return px(thin, x, y) && !junction.at(x, y);
    }

    // Collapses maximal constant-direction runs; Bresenham between run
    // endpoints reproduces exactly the same pixels.
    Polyline compress(const std::vector<Vec2>& path) const {
        Polyline line;
        if (path.empty()) return line;
        line.vertices.push_back(path[0]);
        for (std::size_t i = 1; i < path.size(); ++i) {
            if (i + 1 < path.size()) {
                const double dx0 = path[i].x - path[i - 1].x;
                const double dy0 = path[i].y - path[i - 1].y;
                const double dx1 = path[i + 1].x - path[i].x;
                const double dy1 = path[i + 1].y - path[i].y;
                if (dx0 == dx1 && dy0 == dy1) continue;
            }
            line.vertices.push_back(path[i]);
        }
        return line;
    }

    void emit(const std::vector<Vec2>& path) {
        for (const Vec2& v : path) covered.at(static_cast<int>(v.x), static_cast<int>(v.y)) = 1;
        out.push_back(compress(path));
    }

    // Lowest-index set junction neighbor, skipping `avoid`.
    bool junction_neighbor(int x, int y, int avoid_x, int avoid_y, int& jx, int& jy) const {
        for (const auto& [dx, dy] : kNbr) {
            const int nx = x + dx, ny = y + dy;
            if (!thin.in_bounds(nx, ny) || !junction.at(nx, ny)) continue;
            if (nx == avoid_x && ny == avoid_y) continue;
            jx = nx;
            jy = ny;
            return true;
        }
        return false;
    }

    void trace_from(int sx, int sy) {
        std::vector<Vec2> path;
        int jx, jy;
        int head_jx = -1, head_jy = -1;
        if (junction_neighbor(sx, sy, -1, -1, jx, jy)) {
            path.push_back({double(jx), double(jy)});
            head_jx = jx;
            head_jy = jy;
        }
        int cx = sx, cy = sy;
        for (;;) {
            path.push_back({double(cx), double(cy)});
            visited.at(cx, cy) = 1;
            bool advanced = false;
            for (const auto& [dx, dy] : kNbr) {
                const int nx = cx + dx, ny = cy + dy;
                if (!thin.in_bounds(nx, ny) || !is_chain(nx, ny) || visited.at(nx, ny)) continue;
                cx = nx;
                cy = ny;
                advanced = true;
                break;
            }
            if (!advanced) break;
        }
        if (junction_neighbor(cx, cy, path.size() == 2 ? head_jx : -1,
                              path.size() == 2 ? head_jy : -1, jx, jy))
            path.push_back({double(jx), double(jy)});
        emit(path);
    }
};

}  // namespace

std::vector<Polyline> trace_curves(const BinaryMask& thin) {
    Tracer tr(thin);
    for (int y = 0; y < thin.height; ++y)
        for (int x = 0; x < thin.width; ++x)
            if (thin.at(x, y) && neighbor_count(thin, x, y) >= 3) tr.junction.at(x, y) = 1;

    auto chain_degree = [&](int x, int y) {
        int c = 0;
        for (const auto& [dx, dy] : kNbr)
            if (thin.in_bounds(x + dx, y + dy) && tr.is_chain(x + dx, y + dy)) ++c;
        return c;
    };

    // Open chains: start at endpoints or at pixels touching a junction.
    for (int y = 0; y < thin.height; ++y) {
        for (int x = 0; x < thin.width; ++x) {
            if (!tr.is_chain(x, y) || tr.visited.at(x, y)) continue;
            int jx, jy;
            if (chain_degree(x, y) <= 1 || tr.junction_neighbor(x, y, -1, -1, jx, jy))
                tr.trace_from(x, y);
        }
    }
    // Remaining chains are closed loops.
    for (int y = 0; y < thin.height; ++y)
        for (int x = 0; x < thin.width; ++x)
            if (tr.is_chain(x, y) && !tr.visited.at(x, y)) tr.trace_from(x, y);
    // Anything still uncovered (e.g. junction clusters) becomes a point.
    for (int y = 0; y < thin.height; ++y)
        for (int x = 0; x < thin.width; ++x)
            if (thin.at(x, y) && !tr.covered.at(x, y))
                tr.emit({{double(x), double(y)}});

    return std::move(tr.out);
}

ScribbleSet simulate_scribbles(const BinaryMask& gt_surface) {
    const BinaryMask eroded = erode(gt_surface, StructuringElement::cross(7), 3, 6);
    const BinaryMask thin = skeletonize(eroded);
    ScribbleSet set;
    for (Polyline& line : trace_curves(thin))
        set.scribbles.push_back({std::move(line), ScribbleCategory::Foreground});
    return set;
}

ScribbleSet parse_scribbles(const std::string& text) {
    ScribbleSet set;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;  // blank line
        Scribble s;
        if (tag == "fg")
            s.category = ScribbleCategory::Foreground;
        else if (tag == "bg")
            s.category = ScribbleCategory::Background;
        else
            throw std::invalid_argument("scribble line " + std::to_string(lineno) +
                                        ": unknown category '" + tag + "'");
        std::string pair;
        while (ls >> pair) {
            const auto comma = pair.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("scribble line " + std::to_string(lineno) +
                                            ": expected x,y pair, got '" + pair + "'");
            Vec2 v;
            std::size_t used = 0;
            try {
                v.x = std::stod(pair.substr(0, comma), &used);
                if (used != comma) throw std::invalid_argument("");
                v.y = std::stod(pair.substr(comma + 1), &used);
                if (used != pair.size() - comma - 1) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw std::invalid_argument("scribble line " + std::to_string(lineno) +
                                            ": bad coordinate '" + pair + "'");
            }
            if (!std::isfinite(v.x) || !std::isfinite(v.y))
                throw std::invalid_argument("scribble line " + std::to_string(lineno) +
                                            ": non-finite coordinate");
            s.line.vertices.push_back(v);
        }
        if (s.line.vertices.empty())
            throw std::invalid_argument("scribble line " + std::to_string(lineno) +
                                        ": polyline needs at least one vertex");
        set.scribbles.push_back(std::move(s));
    }
    return set;
}

ScribbleSet read_scribbles(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_scribbles(buf.str());
}

void write_scribbles(const std::filesystem::path& path, const ScribbleSet& set) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.precision(10);
    for (const Scribble& s : set.scribbles) {
        os << (s.category == ScribbleCategory::Foreground ? "fg" : "bg");
        for (const Vec2& v : s.line.vertices) os << ' ' << v.x << ',' << v.y;
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace roadprop
