#include "roadprop/graphcut.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace roadprop {

namespace {

using ld = long double;

ld orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (ld(b.x) - a.x) * (ld(c.y) - a.y) - (ld(b.y) - a.y) * (ld(c.x) - a.x);
}

// > 0 iff d lies strictly inside the circumcircle of the counterclockwise
// triangle abc; ties (cocircular within tolerance) count as outside.
bool in_circumcircle(Vec2 a, Vec2 b, Vec2 c, const Vec2& d) {
    if (orient2d(a, b, c) < 0) std::swap(b, c);
    const ld adx = a.x - d.x, ady = a.y - d.y;
    const ld bdx = b.x - d.x, bdy = b.y - d.y;
    const ld cdx = c.x - d.x, cdy = c.y - d.y;
    const ld ad = adx * adx + ady * ady;
    const ld bd = bdx * bdx + bdy * bdy;
    const ld cd = cdx * cdx + cdy * cdy;
    const ld det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                   ad * (bdx * cdy - bdy * cdx);
    const ld scale = std::max({std::fabs(adx), std::fabs(ady), std::fabs(bdx), std::fabs(bdy),
                               std::fabs(cdx), std::fabs(cdy), ld(1)});
    return det > 1e-10L * scale * scale * scale * scale;
}

struct Tri {
    int a, b, c;
    bool alive = true;
};

void add_edge(std::set<std::pair<int, int>>& edges, int u, int v) {
    if (u == v) return;
    edges.emplace(std::min(u, v), std::max(u, v));
}

}  // namespace

AdjacencyGraph delaunay_adjacency(const std::vector<Vec2>& centroids) {
    if (centroids.empty())
        throw std::invalid_argument("delaunay_adjacency: needs at least one centroid");

    AdjacencyGraph g;
    g.node_count = static_cast<int>(centroids.size());

    // Duplicate coordinates collapse onto the first id carrying them.
    std::vector<int> order;  // distinct point ids, in input order
    std::vector<int> canon(centroids.size());
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        int found = -1;
        for (int j : order) {
            if (centroids[j].x == centroids[i].x && centroids[j].y == centroids[i].y) {
                found = j;
                break;
            }
        }
        if (found < 0) {
            canon[i] = static_cast<int>(i);
            order.push_back(static_cast<int>(i));
        } else {
            canon[i] = found;
        }
    }
    if (order.size() == 1) return g;
    if (order.size() == 2) {
        g.edges.emplace_back(std::min(order[0], order[1]), std::max(order[0], order[1]));
        return g;
    }

    // Fully collinear input: consecutive-neighbor chain along the line.
    {
        const Vec2& p0 = centroids[order[0]];
        double far = -1.0;
        Vec2 dir{1.0, 0.0};
        double scale = 1.0;
        for (int j : order) {
            const double dx = centroids[j].x - p0.x, dy = centroids[j].y - p0.y;
            const double d2 = dx * dx + dy * dy;
            scale = std::max({scale, std::fabs(dx), std::fabs(dy)});
            if (d2 > far) {
                far = d2;
                dir = {dx, dy};
            }
        }
        bool collinear = true;
        for (int j : order) {
            const double cross = (centroids[j].x - p0.x) * dir.y - (centroids[j].y - p0.y) * dir.x;
            if (std::fabs(cross) > 1e-9 * scale * scale) {
                collinear = false;
                break;
            }
        }
        if (collinear) {
            std::vector<int> sorted = order;
            std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
                const double ta = (centroids[a].x - p0.x) * dir.x + (centroids[a].y - p0.y) * dir.y;
                const double tb = (centroids[b].x - p0.x) * dir.x + (centroids[b].y - p0.y) * dir.y;
                return ta < tb;
            });
            std::set<std::pair<int, int>> edges;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
                add_edge(edges, sorted[i], sorted[i + 1]);
            g.edges.assign(edges.begin(), edges.end());
            return g;
        }
    }

    // Incremental Bowyer-Watson under a bounding super-triangle.
    std::vector<Vec2> pts;
    pts.reserve(order.size() + 3);
    for (int j : order) pts.push_back(centroids[j]);
    double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
    for (const Vec2& p : pts) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double cx = (minx + maxx) / 2, cy = (miny + maxy) / 2;
    const double delta = std::max({maxx - minx, maxy - miny, 1.0});
    const int n = static_cast<int>(pts.size());
    pts.push_back({cx - 20 * delta, cy - 10 * delta});
    pts.push_back({cx + 20 * delta, cy - 10 * delta});
    pts.push_back({cx, cy + 20 * delta});

    std::vector<Tri> tris;
    tris.push_back({n, n + 1, n + 2});

    for (int p = 0; p < n; ++p) {
        std::vector<int> bad;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!tris[t].alive) continue;
            if (in_circumcircle(pts[tris[t].a], pts[tris[t].b], pts[tris[t].c], pts[p]))
                bad.push_back(static_cast<int>(t));
        }
        // Boundary of the cavity: edges of bad triangles seen exactly once.
        std::vector<std::array<int, 2>> boundary;
        auto toggle = [&boundary](int u, int v) {
            for (std::size_t i = 0; i < boundary.size(); ++i) {
                if ((boundary[i][0] == u && boundary[i][1] == v) ||
                    (boundary[i][0] == v && boundary[i][1] == u)) {
                    boundary.erase(boundary.begin() + static_cast<std::ptrdiff_t>(i));
                    return;
                }
            }
            boundary.push_back({u, v});
        };
        for (int t : bad) {
            toggle(tris[t].a, tris[t].b);
            toggle(tris[t].b, tris[t].c);
            toggle(tris[t].c, tris[t].a);
            tris[t].alive = false;
        }
        for (const auto& e : boundary) tris.push_back({e[0], e[1], p});
    }

    std::set<std::pair<int, int>> edges;
    for (const Tri& t : tris) {
        if (!t.alive || t.a >= n || t.b >= n || t.c >= n) continue;
        add_edge(edges, order[t.a], order[t.b]);
        add_edge(edges, order[t.b], order[t.c]);
        add_edge(edges, order[t.c], order[t.a]);
    }
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

SeedAssignment assign_seeds(const SuperpixelLabeling& labeling, const BinaryMask& scribble_raster,
                            const TriStateMask& buffer) {
    require_same_size(labeling.width, labeling.height, scribble_raster.width,
                      scribble_raster.height, "assign_seeds");
    require_same_size(labeling.width, labeling.height, buffer.width, buffer.height,
                      "assign_seeds");

    std::vector<std::uint8_t> has_scribble(labeling.count, 0);
    std::vector<std::uint8_t> all_nonroad(labeling.count, 1);
    for (int y = 0; y < labeling.height; ++y) {
        for (int x = 0; x < labeling.width; ++x) {
            const std::int32_t k = labeling.at(x, y);
            if (scribble_raster.at(x, y)) has_scribble[k] = 1;
            if (buffer.at(x, y) != TriState::NonRoad) all_nonroad[k] = 0;
        }
    }

    SeedAssignment out;
    out.classes.resize(labeling.count);
    bool any_fg = false, any_bg = false;
    for (int k = 0; k < labeling.count; ++k) {
        if (has_scribble[k]) {
            out.classes[k] = SeedClass::ForegroundSeed;
            any_fg = true;
        } else if (all_nonroad[k]) {
            out.classes[k] = SeedClass::BackgroundSeed;
            any_bg = true;
        } else {
            out.classes[k] = SeedClass::Free;
        }
    }
    if (!any_fg) throw NoSeedsError("assign_seeds: no foreground seeds");
    if (!any_bg) throw NoSeedsError("assign_seeds: no background seeds");
    return out;
}

EnergyGraph build_energy(const std::vector<SuperpixelStats>& stats,
                         const AdjacencyGraph& adjacency, const SeedAssignment& seeds,
                         const ColorHistogram& fg_hist, const ColorHistogram& bg_hist,
                         double gamma, double sigma_h, double kl_eps) {
    const int k = static_cast<int>(stats.size());
    if (static_cast<int>(seeds.classes.size()) != k || adjacency.node_count != k)
        throw std::invalid_argument("build_energy: node count mismatch");
    if (!(gamma >= 0.0) || !(sigma_h > 0.0))
        throw std::invalid_argument("build_energy: invalid pairwise parameters");

    EnergyGraph g;
    g.cost_fg.assign(k, 0.0);
    g.cost_bg.assign(k, 0.0);
    double finite_sum = 0.0;

    for (int i = 0; i < k; ++i) {
        if (seeds.classes[i] != SeedClass::Free) continue;
        g.cost_fg[i] = kl_divergence(stats[i].histogram, fg_hist, kl_eps);
        g.cost_bg[i] = kl_divergence(stats[i].histogram, bg_hist, kl_eps);
        finite_sum += g.cost_fg[i] + g.cost_bg[i];
    }
    for (const auto& [a, b] : adjacency.edges) {
        const double kl_sym = 0.5 * (kl_divergence(stats[a].histogram, stats[b].histogram, kl_eps) +
                                     kl_divergence(stats[b].histogram, stats[a].histogram, kl_eps));
        const double w = gamma * std::exp(-kl_sym / sigma_h);
        g.edges.push_back({a, b, w});
        finite_sum += w;
    }

    g.hard_cost = 1.0 + finite_sum;
    for (int i = 0; i < k; ++i) {
        if (seeds.classes[i] == SeedClass::ForegroundSeed)
            g.cost_bg[i] = g.hard_cost;
        else if (seeds.classes[i] == SeedClass::BackgroundSeed)
            g.cost_fg[i] = g.hard_cost;
    }
    return g;
}

double labeling_energy(const EnergyGraph& graph, const std::vector<std::uint8_t>& labels) {
    if (labels.size() != graph.cost_fg.size())
        throw std::invalid_argument("labeling_energy: label count mismatch");
    double e = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        e += labels[i] ? graph.cost_fg[i] : graph.cost_bg[i];
    for (const auto& edge : graph.edges)
        if (labels[edge.a] != labels[edge.b]) e += edge.weight;
    return e;
}

namespace {

// Boykov-Kolmogorov augmenting-path max-flow over the s-t reduction of the
// binary energy: the source link of node i carries cost_bg[i], the sink
// link cost_fg[i], n-links are symmetric. Terminal capacities are folded
// into tr_cap after pre-pushing their common part.
class BkSolver {
public:
    explicit BkSolver(const EnergyGraph& graph) : n_(graph.node_count()) {
        tr_cap_.resize(n_);
        out_.resize(n_);
        tree_.assign(n_, kFree);
        parent_.assign(n_, kNone);
        for (int i = 0; i < n_; ++i) {
            const double cs = graph.cost_bg[i];  // source link
            const double ct = graph.cost_fg[i];  // sink link
            flow_ += std::min(cs, ct);
            tr_cap_[i] = cs - ct;
        }
        arcs_.reserve(graph.edges.size() * 2);
        for (const auto& e : graph.edges) {
            out_[e.a].push_back(static_cast<int>(arcs_.size()));
            arcs_.push_back({e.b, e.weight});
            out_[e.b].push_back(static_cast<int>(arcs_.size()));
            arcs_.push_back({e.a, e.weight});
        }
    }

    CutResult solve() {
        for (int i = 0; i < n_; ++i) {
            if (tr_cap_[i] > kEps) {
                tree_[i] = kSrc;
                parent_[i] = kTerminal;
                active_.push_back(i);
            } else if (tr_cap_[i] < -kEps) {
                tree_[i] = kSnk;
                parent_[i] = kTerminal;
                active_.push_back(i);
            }
        }
        for (;;) {
            const int bridge = grow();
            if (bridge < 0) break;
            augment(bridge);
            adopt();
        }
        CutResult result;
        result.labels.resize(n_);
        for (int i = 0; i < n_; ++i) result.labels[i] = tree_[i] == kSrc ? 1 : 0;
        result.flow_value = flow_;
        return result;
    }

private:
    struct Arc {
        int head;
        double rcap;
    };

    static constexpr char kFree = 0, kSrc = 1, kSnk = 2;
    static constexpr int kNone = -2, kTerminal = -1;
    static constexpr double kEps = 1e-10;

    int tail(int a) const { return arcs_[a ^ 1].head; }

    bool rooted(int q) const {
        while (true) {
            const int pa = parent_[q];
            if (pa == kTerminal) return true;
            if (pa == kNone) return false;
            q = tree_[q] == kSrc ? tail(pa) : arcs_[pa].head;
        }
    }

    // Returns a bridge arc from the source tree into the sink tree, or -1
    // once no augmenting path remains.
    int grow() {
        while (!active_.empty()) {
            const int p = active_.front();
            if (tree_[p] == kFree) {
                active_.pop_front();
                continue;
            }
            for (const int a : out_[p]) {
                const int q = arcs_[a].head;
                if (tree_[p] == kSrc) {
                    if (arcs_[a].rcap <= kEps) continue;
                    if (tree_[q] == kFree) {
                        tree_[q] = kSrc;
                        parent_[q] = a;
                        active_.push_back(q);
                    } else if (tree_[q] == kSnk) {
                        return a;
                    }
                } else {
                    if (arcs_[a ^ 1].rcap <= kEps) continue;
                    if (tree_[q] == kFree) {
                        tree_[q] = kSnk;
                        parent_[q] = a ^ 1;
                        active_.push_back(q);
                    } else if (tree_[q] == kSrc) {
                        return a ^ 1;
                    }
                }
            }
            active_.pop_front();
        }
        return -1;
    }

    void augment(int bridge) {
        // Collect both tree paths before touching residuals; the last node
        // of each list is the terminal root.
        std::vector<int> spath, tpath;
        for (int i = tail(bridge);; i = tail(parent_[i])) {
            spath.push_back(i);
            if (parent_[i] == kTerminal) break;
        }
        for (int j = arcs_[bridge].head;; j = arcs_[parent_[j]].head) {
            tpath.push_back(j);
            if (parent_[j] == kTerminal) break;
        }

        double bottleneck = arcs_[bridge].rcap;
        for (std::size_t k = 0; k + 1 < spath.size(); ++k)
            bottleneck = std::min(bottleneck, arcs_[parent_[spath[k]]].rcap);
        bottleneck = std::min(bottleneck, tr_cap_[spath.back()]);
        for (std::size_t k = 0; k + 1 < tpath.size(); ++k)
            bottleneck = std::min(bottleneck, arcs_[parent_[tpath[k]]].rcap);
        bottleneck = std::min(bottleneck, -tr_cap_[tpath.back()]);

        arcs_[bridge].rcap -= bottleneck;
        arcs_[bridge ^ 1].rcap += bottleneck;
        for (std::size_t k = 0; k + 1 < spath.size(); ++k) {
            const int node = spath[k];
            const int pa = parent_[node];
            arcs_[pa].rcap -= bottleneck;
            arcs_[pa ^ 1].rcap += bottleneck;
            if (arcs_[pa].rcap <= kEps) {
                parent_[node] = kNone;
                orphans_.push_back(node);
            }
        }
        tr_cap_[spath.back()] -= bottleneck;
        if (tr_cap_[spath.back()] <= kEps) {
            parent_[spath.back()] = kNone;
            orphans_.push_back(spath.back());
        }
        for (std::size_t k = 0; k + 1 < tpath.size(); ++k) {
            const int node = tpath[k];
            const int pa = parent_[node];
            arcs_[pa].rcap -= bottleneck;
            arcs_[pa ^ 1].rcap += bottleneck;
            if (arcs_[pa].rcap <= kEps) {
                parent_[node] = kNone;
                orphans_.push_back(node);
            }
        }
        tr_cap_[tpath.back()] += bottleneck;
        if (-tr_cap_[tpath.back()] <= kEps) {
            parent_[tpath.back()] = kNone;
            orphans_.push_back(tpath.back());
        }
        flow_ += bottleneck;
    }

    void adopt() {
        while (!orphans_.empty()) {
            const int p = orphans_.front();
            orphans_.pop_front();
            const char t = tree_[p];
            int found = kNone;
            for (const int a : out_[p]) {
                const int q = arcs_[a].head;
                if (tree_[q] != t) continue;
                const double rcap = t == kSrc ? arcs_[a ^ 1].rcap : arcs_[a].rcap;
                if (rcap <= kEps) continue;
                if (!rooted(q)) continue;
                found = t == kSrc ? (a ^ 1) : a;
                break;
            }
            if (found != kNone) {
                parent_[p] = found;
                continue;
            }
            for (const int a : out_[p]) {
                const int q = arcs_[a].head;
                if (tree_[q] != t) continue;
                const double rcap = t == kSrc ? arcs_[a ^ 1].rcap : arcs_[a].rcap;
                if (rcap > kEps) active_.push_back(q);
                if (parent_[q] >= 0) {
                    const int qparent = t == kSrc ? tail(parent_[q]) : arcs_[parent_[q]].head;
                    if (qparent == p) {
                        parent_[q] = kNone;
                        orphans_.push_back(q);
                    }
                }
            }
            // A freed orphan may rejoin from its terminal side later.
            if (t == kSrc && tr_cap_[p] > kEps) {
                parent_[p] = kTerminal;
                active_.push_back(p);
                continue;
            }
            if (t == kSnk && tr_cap_[p] < -kEps) {
                parent_[p] = kTerminal;
                active_.push_back(p);
                continue;
            }
            tree_[p] = kFree;
        }
    }

    int n_;
    double flow_ = 0.0;
    std::vector<double> tr_cap_;
    std::vector<std::vector<int>> out_;
    std::vector<Arc> arcs_;
    std::vector<char> tree_;
    std::vector<int> parent_;
    std::deque<int> active_;
    std::deque<int> orphans_;
};

}  // namespace

CutResult max_flow(const EnergyGraph& graph) {
    BkSolver solver(graph);
    CutResult result = solver.solve();
    result.cut_value = labeling_energy(graph, result.labels);
    return result;
}

BinaryMask graph_mask(const SuperpixelLabeling& labeling, const CutResult& cut) {
    if (static_cast<int>(cut.labels.size()) != labeling.count)
        throw std::invalid_argument("graph_mask: node count mismatch");
    BinaryMask mask(labeling.width, labeling.height, 0);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = cut.labels[static_cast<std::size_t>(labeling.labels[i])];
    return mask;
}

}  // namespace roadprop
