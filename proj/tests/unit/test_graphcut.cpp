#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "roadprop/graphcut.hpp"

using namespace roadprop;

namespace {

std::set<std::pair<int, int>> edge_set(const AdjacencyGraph& g) {
    return {g.edges.begin(), g.edges.end()};
}

// Exhaustive minimum over all 2^K labelings.
double enumerate_min_energy(const EnergyGraph& g, std::vector<std::uint8_t>* best = nullptr) {
    const int k = g.node_count();
    double min_e = std::numeric_limits<double>::max();
    std::vector<std::uint8_t> labels(k);
    for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
        for (int i = 0; i < k; ++i) labels[i] = (bits >> i) & 1;
        const double e = labeling_energy(g, labels);
        if (e < min_e) {
            min_e = e;
            if (best) *best = labels;
        }
    }
    return min_e;
}

EnergyGraph random_energy_graph(std::mt19937& rng, int max_nodes = 12) {
    std::uniform_int_distribution<int> nodes(1, max_nodes);
    std::uniform_real_distribution<double> cap(0.0, 5.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int k = nodes(rng);
    EnergyGraph g;
    g.cost_fg.resize(k);
    g.cost_bg.resize(k);
    for (int i = 0; i < k; ++i) {
        g.cost_fg[i] = cap(rng);
        g.cost_bg[i] = cap(rng);
    }
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (coin(rng) < 0.35) g.edges.push_back({a, b, cap(rng)});
    g.hard_cost = 1e6;
    return g;
}

}  // namespace

TEST_CASE("delaunay of a triangle has three edges") {
    const AdjacencyGraph g = delaunay_adjacency({{0, 0}, {4, 0}, {2, 3}});
    CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("delaunay of the unit square has five edges") {
    const AdjacencyGraph g = delaunay_adjacency({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const auto edges = edge_set(g);
    REQUIRE(edges.size() == 5);
    CHECK(edges.count({0, 1}));
    CHECK(edges.count({1, 2}));
    CHECK(edges.count({2, 3}));
    CHECK(edges.count({0, 3}));
    // Cocircular tie resolves to the lowest-index diagonal.
    CHECK(edges.count({0, 2}));
}

TEST_CASE("delaunay of collinear points is the consecutive chain") {
    const AdjacencyGraph g = delaunay_adjacency({{4, 4}, {0, 0}, {2, 2}, {6, 6}});
    CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 2}, {0, 3}, {1, 2}});
}

TEST_CASE("delaunay handles tiny and duplicate inputs") {
    CHECK(delaunay_adjacency({{1, 1}}).edges.empty());
    CHECK(edge_set(delaunay_adjacency({{0, 0}, {3, 1}})) ==
          std::set<std::pair<int, int>>{{0, 1}});
    // Duplicates collapse onto the first id.
    const AdjacencyGraph g = delaunay_adjacency({{0, 0}, {0, 0}, {3, 0}, {1, 2}});
    const auto edges = edge_set(g);
    CHECK(edges == std::set<std::pair<int, int>>{{0, 2}, {0, 3}, {2, 3}});
    CHECK_THROWS_AS(delaunay_adjacency({}), std::invalid_argument);
}

TEST_CASE("delaunay edges satisfy the empty-circumcircle property") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> coord(0.0, 100.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec2> pts(40);
        for (Vec2& p : pts) p = {coord(rng), coord(rng)};
        const AdjacencyGraph g = delaunay_adjacency(pts);

        auto in_circle = [](Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
            // > 0 iff d strictly inside the circumcircle of ccw abc.
            const double orient =
                (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
            if (orient < 0) std::swap(b, c);
            const double adx = a.x - d.x, ady = a.y - d.y;
            const double bdx = b.x - d.x, bdy = b.y - d.y;
            const double cdx = c.x - d.x, cdy = c.y - d.y;
            const double ad = adx * adx + ady * ady;
            const double bd = bdx * bdx + bdy * bdy;
            const double cd = cdx * cdx + cdy * cdy;
            return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                       ad * (bdx * cdy - bdy * cdx) >
                   1e-7;
        };
        // Every reported edge admits an empty circumcircle through some
        // third point.
        for (const auto& [u, v] : g.edges) {
            bool ok = false;
            for (std::size_t c = 0; c < pts.size() && !ok; ++c) {
                if (static_cast<int>(c) == u || static_cast<int>(c) == v) continue;
                bool empty = true;
                for (std::size_t d = 0; d < pts.size() && empty; ++d) {
                    if (static_cast<int>(d) == u || static_cast<int>(d) == v || d == c) continue;
                    if (in_circle(pts[u], pts[v], pts[c], pts[d])) empty = false;
                }
                ok = empty;
            }
            REQUIRE(ok);
        }
    }
}

TEST_CASE("assign_seeds follows the overlap rules") {
    // 3 vertical strips: 0 carries a scribble pixel, 2 is fully NonRoad,
    // 1 straddles the Unknown band.
    SuperpixelLabeling lab{6, 2, {0, 0, 1, 1, 2, 2, 0, 0, 1, 1, 2, 2}, 3};
    BinaryMask raster(6, 2, 0);
    raster.at(0, 0) = 1;
    TriStateMask buffer(6, 2, TriState::NonRoad);
    buffer.at(0, 0) = TriState::Road;
    buffer.at(1, 0) = TriState::Road;
    buffer.at(2, 0) = TriState::Unknown;  // strip 1 partially unknown

    const SeedAssignment seeds = assign_seeds(lab, raster, buffer);
    CHECK(seeds.classes[0] == SeedClass::ForegroundSeed);
    CHECK(seeds.classes[1] == SeedClass::Free);
    CHECK(seeds.classes[2] == SeedClass::BackgroundSeed);
}

TEST_CASE("assign_seeds raises NoSeeds when a class is missing") {
    SuperpixelLabeling lab{2, 1, {0, 1}, 2};
    BinaryMask raster(2, 1, 0);
    TriStateMask all_nonroad(2, 1, TriState::NonRoad);
    CHECK_THROWS_AS(assign_seeds(lab, raster, all_nonroad), NoSeedsError);  // no foreground

    raster.at(0, 0) = 1;
    TriStateMask all_road(2, 1, TriState::Road);
    CHECK_THROWS_AS(assign_seeds(lab, raster, all_road), NoSeedsError);  // no background
}

TEST_CASE("build_energy unary and pairwise terms") {
    // Three nodes: fg seed, free, bg seed, in a chain.
    std::vector<SuperpixelStats> stats(3);
    for (int i = 0; i < 3; ++i) {
        stats[i].id = i;
        stats[i].pixel_count = 4;
    }
    stats[0].histogram.bins = {0.25, 0.75};
    stats[1].histogram.bins = {0.5, 0.5};
    stats[2].histogram.bins = {0.9, 0.1};
    AdjacencyGraph adj{3, {{0, 1}, {1, 2}}};
    SeedAssignment seeds{{SeedClass::ForegroundSeed, SeedClass::Free, SeedClass::BackgroundSeed}};
    ColorHistogram fg{{0.25, 0.75}};
    ColorHistogram bg{{0.9, 0.1}};

    const EnergyGraph g = build_energy(stats, adj, seeds, fg, bg, 1.0, 1.0);

    CHECK(g.cost_fg[0] == 0.0);
    CHECK(g.cost_bg[0] == g.hard_cost);
    CHECK(g.cost_bg[2] == 0.0);
    CHECK(g.cost_fg[2] == g.hard_cost);

    // Free node pays KL(node || class).
    const double kl_fg = kl_divergence(stats[1].histogram, fg);
    CHECK(g.cost_fg[1] == doctest::Approx(kl_fg).epsilon(1e-12));
    CHECK(kl_fg == doctest::Approx(0.14384).epsilon(1e-3));

    // Pairwise weight is gamma * exp(-KL_sym / sigma).
    const double kl_sym = 0.5 * (kl_divergence(stats[0].histogram, stats[1].histogram) +
                                 kl_divergence(stats[1].histogram, stats[0].histogram));
    CHECK(g.edges[0].weight == doctest::Approx(std::exp(-kl_sym)).epsilon(1e-12));

    // Hard cost exceeds everything finite combined.
    double finite = g.cost_fg[1] + g.cost_bg[1];
    for (const auto& e : g.edges) finite += e.weight;
    CHECK(g.hard_cost == doctest::Approx(1.0 + finite));
}

TEST_CASE("build_energy identical neighbors get the maximum weight") {
    std::vector<SuperpixelStats> stats(2);
    stats[0].histogram.bins = {0.3, 0.7};
    stats[1].histogram.bins = {0.3, 0.7};
    AdjacencyGraph adj{2, {{0, 1}}};
    SeedAssignment seeds{{SeedClass::ForegroundSeed, SeedClass::BackgroundSeed}};
    const EnergyGraph g = build_energy(stats, adj, seeds, stats[0].histogram,
                                       stats[1].histogram, 2.5, 1.0);
    CHECK(g.edges[0].weight == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("pairwise weight strictly decreases with dissimilarity") {
    double prev = std::numeric_limits<double>::max();
    for (double mass : {0.5, 0.4, 0.3, 0.2, 0.1}) {
        std::vector<SuperpixelStats> stats(2);
        stats[0].histogram.bins = {0.5, 0.5};
        stats[1].histogram.bins = {mass, 1.0 - mass};
        AdjacencyGraph adj{2, {{0, 1}}};
        SeedAssignment seeds{{SeedClass::ForegroundSeed, SeedClass::BackgroundSeed}};
        const EnergyGraph g = build_energy(stats, adj, seeds, stats[0].histogram,
                                           stats[1].histogram, 1.0, 1.0);
        REQUIRE(g.edges[0].weight < prev);
        prev = g.edges[0].weight;
    }
}

TEST_CASE("max_flow single free node picks the cheaper label") {
    EnergyGraph g;
    g.cost_fg = {1.0};
    g.cost_bg = {2.0};
    g.hard_cost = 10.0;
    const CutResult cut = max_flow(g);
    CHECK(cut.labels[0] == 1);
    CHECK(cut.cut_value == doctest::Approx(1.0));
    CHECK(cut.flow_value == doctest::Approx(1.0));
}

TEST_CASE("max_flow strong edge pulls a neutral node to its seed") {
    EnergyGraph g;
    g.cost_fg = {0.0, 1.0};
    g.cost_bg = {7.0, 1.0};  // node 0 seeded foreground
    g.edges.push_back({0, 1, 5.0});
    g.hard_cost = 7.0;
    const CutResult cut = max_flow(g);
    CHECK(cut.labels[0] == 1);
    CHECK(cut.labels[1] == 1);
    CHECK(cut.cut_value == doctest::Approx(1.0));
}

TEST_CASE("max_flow equals the exhaustive minimum on random graphs") {
    std::mt19937 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        const EnergyGraph g = random_energy_graph(rng);
        const CutResult cut = max_flow(g);
        const double expect = enumerate_min_energy(g);
        const double got = labeling_energy(g, cut.labels);
        REQUIRE(got == expect);
        REQUIRE(std::fabs(cut.flow_value - got) <= 1e-9 * std::max(1.0, got));
    }
}

TEST_CASE("max_flow stays exact under heavy capacity ties and zeros") {
    // Capacities from a tiny set force exact ties, zero links, and
    // degenerate augmenting paths.
    std::mt19937 rng(37);
    std::uniform_int_distribution<int> nodes(1, 10);
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double values[4] = {0.0, 0.5, 1.0, 2.0};
    for (int trial = 0; trial < 150; ++trial) {
        const int k = nodes(rng);
        EnergyGraph g;
        g.cost_fg.resize(k);
        g.cost_bg.resize(k);
        for (int i = 0; i < k; ++i) {
            g.cost_fg[i] = values[pick(rng)];
            g.cost_bg[i] = values[pick(rng)];
        }
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                if (coin(rng) < 0.5) g.edges.push_back({a, b, values[pick(rng)]});
        g.hard_cost = 100.0;
        const CutResult cut = max_flow(g);
        REQUIRE(labeling_energy(g, cut.labels) == enumerate_min_energy(g));
    }
}

TEST_CASE("max_flow result beats random labelings on larger graphs") {
    std::mt19937 rng(34);
    std::uniform_real_distribution<double> cap(0.0, 5.0);
    std::uniform_int_distribution<int> coin(0, 1);
    EnergyGraph g;
    const int k = 60;
    g.cost_fg.resize(k);
    g.cost_bg.resize(k);
    for (int i = 0; i < k; ++i) {
        g.cost_fg[i] = cap(rng);
        g.cost_bg[i] = cap(rng);
    }
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (cap(rng) < 0.5) g.edges.push_back({a, b, cap(rng)});
    g.hard_cost = 1e6;

    const CutResult cut = max_flow(g);
    const double best = labeling_energy(g, cut.labels);
    std::vector<std::uint8_t> labels(k);
    for (int trial = 0; trial < 1000; ++trial) {
        for (auto& v : labels) v = static_cast<std::uint8_t>(coin(rng));
        REQUIRE(best <= labeling_energy(g, labels) + 1e-9);
    }
}

TEST_CASE("max_flow respects hard seed constraints") {
    std::mt19937 rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<SuperpixelStats> stats(8);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        for (int i = 0; i < 8; ++i) {
            stats[i].id = i;
            stats[i].pixel_count = 5;
            double a = u(rng), b = u(rng);
            stats[i].histogram.bins = {a / (a + b), b / (a + b)};
        }
        AdjacencyGraph adj{8, {}};
        for (int a = 0; a < 8; ++a)
            for (int b = a + 1; b < 8; ++b)
                if (u(rng) < 0.4) adj.edges.push_back({a, b});
        SeedAssignment seeds{{SeedClass::ForegroundSeed, SeedClass::BackgroundSeed,
                              SeedClass::Free, SeedClass::Free, SeedClass::Free, SeedClass::Free,
                              SeedClass::ForegroundSeed, SeedClass::BackgroundSeed}};
        const EnergyGraph g = build_energy(stats, adj, seeds, stats[0].histogram,
                                           stats[1].histogram, 1.0, 1.0);
        const CutResult cut = max_flow(g);
        REQUIRE(cut.labels[0] == 1);
        REQUIRE(cut.labels[6] == 1);
        REQUIRE(cut.labels[1] == 0);
        REQUIRE(cut.labels[7] == 0);
    }
}

namespace {

// Independent max-flow value oracle: plain Edmonds-Karp on the same s-t
// reduction (source link = cost_bg, sink link = cost_fg).
double edmonds_karp_value(const EnergyGraph& g) {
    const int k = g.node_count();
    const int s = k, t = k + 1, n = k + 2;
    std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < k; ++i) {
        cap[s][i] += g.cost_bg[i];
        cap[i][t] += g.cost_fg[i];
    }
    for (const auto& e : g.edges) {
        cap[e.a][e.b] += e.weight;
        cap[e.b][e.a] += e.weight;
    }
    double flow = 0.0;
    for (;;) {
        std::vector<int> parent(n, -1);
        parent[s] = s;
        std::vector<int> queue{s};
        for (std::size_t qi = 0; qi < queue.size() && parent[t] < 0; ++qi) {
            const int u = queue[qi];
            for (int v = 0; v < n; ++v) {
                if (parent[v] >= 0 || cap[u][v] <= 1e-12) continue;
                parent[v] = u;
                queue.push_back(v);
            }
        }
        if (parent[t] < 0) break;
        double aug = std::numeric_limits<double>::max();
        for (int v = t; v != s; v = parent[v]) aug = std::min(aug, cap[parent[v]][v]);
        for (int v = t; v != s; v = parent[v]) {
            cap[parent[v]][v] -= aug;
            cap[v][parent[v]] += aug;
        }
        flow += aug;
    }
    return flow;
}

}  // namespace

TEST_CASE("max_flow value matches an independent Edmonds-Karp oracle") {
    std::mt19937 rng(36);
    std::uniform_real_distribution<double> cap(0.0, 5.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int trial = 0; trial < 15; ++trial) {
        const int k = 30 + trial * 10;
        EnergyGraph g;
        g.cost_fg.resize(k);
        g.cost_bg.resize(k);
        for (int i = 0; i < k; ++i) {
            g.cost_fg[i] = cap(rng);
            g.cost_bg[i] = cap(rng);
        }
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                if (coin(rng) < 0.15) g.edges.push_back({a, b, cap(rng)});
        g.hard_cost = 1e6;

        const CutResult cut = max_flow(g);
        const double oracle = edmonds_karp_value(g);
        REQUIRE(cut.flow_value == doctest::Approx(oracle).epsilon(1e-9));
        // The labeling's energy equals the flow value (max-flow = min-cut).
        REQUIRE(labeling_energy(g, cut.labels) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("delaunay on an exact grid of centroids is sane and deterministic") {
    // Regular grids are maximally degenerate for the incircle test: every
    // unit square of centroids is cocircular.
    std::vector<Vec2> pts;
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) pts.push_back({double(x) * 8, double(y) * 8});
    const AdjacencyGraph a = delaunay_adjacency(pts);
    const AdjacencyGraph b = delaunay_adjacency(pts);
    CHECK(a.edges == b.edges);

    // A triangulation of a 6x6 grid has between the hull-only minimum and
    // the full Delaunay bound on edges; every axis-neighbor pair must be
    // present.
    std::set<std::pair<int, int>> edges = edge_set(a);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            const int id = y * 6 + x;
            if (x + 1 < 6) REQUIRE(edges.count({id, id + 1}));
            if (y + 1 < 6) REQUIRE(edges.count({id, id + 6}));
        }
    // 2n - 2 - h <= triangles; edge count for a triangulated point set is
    // 3n - 3 - h with h = 20 hull points here.
    CHECK(a.edges.size() >= 60u);
    CHECK(a.edges.size() <= 3u * 36 - 3 - 20);
}

TEST_CASE("labeling_energy counts unaries and cut edges") {
    EnergyGraph g;
    g.cost_fg = {0.0, 0.5};
    g.cost_bg = {3.0, 0.25};
    g.edges.push_back({0, 1, 2.0});
    g.hard_cost = 10.0;

    CHECK(labeling_energy(g, {1, 1}) == doctest::Approx(0.5));
    CHECK(labeling_energy(g, {1, 0}) == doctest::Approx(0.0 + 0.25 + 2.0));
    // Flipping node 1 across the edge changes the energy by the edge
    // weight plus the unary delta.
    const double delta = labeling_energy(g, {1, 0}) - labeling_energy(g, {1, 1});
    CHECK(delta == doctest::Approx(2.0 + 0.25 - 0.5));
}

TEST_CASE("graph_mask projects node labels onto pixels") {
    SuperpixelLabeling lab{4, 1, {0, 0, 1, 1}, 2};
    CutResult cut;
    cut.labels = {1, 0};
    const BinaryMask m = graph_mask(lab, cut);
    CHECK(m.at(0, 0) == 1);
    CHECK(m.at(1, 0) == 1);
    CHECK(m.at(2, 0) == 0);
    CHECK(m.at(3, 0) == 0);

    cut.labels = {1, 1};
    for (auto v : graph_mask(lab, cut).data) CHECK(v == 1);
    cut.labels = {0, 0};
    for (auto v : graph_mask(lab, cut).data) CHECK(v == 0);
}
