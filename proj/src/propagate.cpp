#include "roadprop/propagate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "roadprop/graphcut.hpp"
#include "roadprop/io.hpp"
#include "roadprop/raster.hpp"

namespace roadprop {

ProposalMask fuse_masks(const TriStateMask& buffer, const BinaryMask& graph) {
    require_same_size(buffer, graph, "fuse_masks");
    ProposalMask out = buffer;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        if (graph.data[i] && buffer.data[i] == TriState::NonRoad)
            out.data[i] = TriState::Unknown;
    return out;
}

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

ProposalMask propagate_tile(const RasterImage& img, const BinaryMask& foreground_raster,
                            const PropagationConfig& config, TileTrace* trace) {
    require_same_size(img, foreground_raster, "propagate_tile");
    using clock = std::chrono::steady_clock;
    TileTrace local;
    TileTrace& tr = trace ? *trace : local;

    auto t0 = clock::now();
    const TriStateMask buffer = buffer_mask(foreground_raster, config.buffer);
    tr.buffer_ms = ms_since(t0);

    t0 = clock::now();
    const SuperpixelLabeling labeling = slic_segment(img, config.slic);
    tr.slic_ms = ms_since(t0);

    t0 = clock::now();
    const std::vector<SuperpixelStats> stats =
        compute_stats(rgb_to_hsv(img), labeling, config.hist);
    tr.stats_ms = ms_since(t0);

    SeedAssignment seeds;
    try {
        seeds = assign_seeds(labeling, foreground_raster, buffer);
    } catch (const NoSeedsError&) {
        // No usable seed pair: the buffer mask is the proposal.
        tr.graph_stage_ran = false;
        return buffer;
    }
    tr.graph_stage_ran = true;

    t0 = clock::now();
    std::vector<int> fg_members, bg_members;
    for (int k = 0; k < labeling.count; ++k) {
        if (seeds.classes[k] == SeedClass::ForegroundSeed) fg_members.push_back(k);
        if (seeds.classes[k] == SeedClass::BackgroundSeed) bg_members.push_back(k);
    }
    const ColorHistogram fg_hist = cumulative_class_histogram(stats, fg_members);
    const ColorHistogram bg_hist = cumulative_class_histogram(stats, bg_members);

    std::vector<Vec2> centroids(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i)
        centroids[i] = {stats[i].centroid_x, stats[i].centroid_y};
    const AdjacencyGraph adjacency = delaunay_adjacency(centroids);
    const EnergyGraph energy =
        build_energy(stats, adjacency, seeds, fg_hist, bg_hist, config.pairwise_gamma,
                     config.pairwise_sigma, config.kl_eps);
    tr.graph_ms = ms_since(t0);

    t0 = clock::now();
    const CutResult cut = max_flow(energy);
    tr.flow_ms = ms_since(t0);

    return fuse_masks(buffer, graph_mask(labeling, cut));
}

ProposalMask propagate_tile(const RasterImage& img, const ScribbleSet& scribbles,
                            const PropagationConfig& config, TileTrace* trace) {
    return propagate_tile(
        img, rasterize(scribbles, img.width, img.height, ScribbleCategory::Foreground), config,
        trace);
}

RasterImage overlay_proposal(const RasterImage& img, const ProposalMask& proposal) {
    require_same_size(img, proposal, "overlay_proposal");
    RasterImage out = img;
    auto mix = [](std::uint8_t base, double tint, double opacity) {
        return static_cast<std::uint8_t>(
            std::lround(base * (1.0 - opacity) + tint * opacity));
    };
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        Rgb8& p = out.data[i];
        if (proposal.data[i] == TriState::Road) {
            p = {mix(p.r, 255, 0.5), mix(p.g, 0, 0.5), mix(p.b, 0, 0.5)};
        } else if (proposal.data[i] == TriState::Unknown) {
            p = {mix(p.r, 255, 0.3), mix(p.g, 255, 0.3), mix(p.b, 0, 0.3)};
        }
    }
    return out;
}

DatasetSummary propagate_dataset(const std::filesystem::path& image_dir,
                                 const std::filesystem::path& scribble_dir,
                                 const std::filesystem::path& out_dir,
                                 const PropagationConfig& config, int jobs,
                                 const std::optional<std::filesystem::path>& overlay_dir,
                                 const TileLogger& logger) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(image_dir))
        throw IoError("propagate_dataset: not a directory: " + image_dir.string());
    if (!fs::is_directory(scribble_dir))
        throw IoError("propagate_dataset: not a directory: " + scribble_dir.string());
    fs::create_directories(out_dir);
    if (overlay_dir) fs::create_directories(*overlay_dir);

    struct Job {
        std::string stem;
        fs::path image;
        fs::path scribble;  // empty when missing
        bool scribble_is_mask = false;
    };
    std::map<std::string, fs::path> images;
    for (const auto& e : fs::directory_iterator(image_dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            images[e.path().stem().string()] = e.path();

    std::vector<Job> todo;
    DatasetSummary summary;
    for (const auto& [stem, path] : images) {
        Job job{stem, path, {}, false};
        const fs::path txt = scribble_dir / (stem + ".txt");
        const fs::path png = scribble_dir / (stem + ".png");
        if (fs::exists(txt)) {
            job.scribble = txt;
        } else if (fs::exists(png)) {
            job.scribble = png;
            job.scribble_is_mask = true;
        } else {
            summary.skipped.push_back(stem);
            continue;
        }
        todo.push_back(std::move(job));
    }

    summary.tiles.resize(todo.size());
    std::atomic<std::size_t> cursor{0};
    std::mutex shared_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= todo.size()) return;
            try {
                const Job& job = todo[i];
                const RasterImage img = read_image(job.image);
                BinaryMask raster;
                if (job.scribble_is_mask) {
                    raster = read_binary_mask(job.scribble);
                    require_same_size(img, raster, "propagate_dataset");
                } else {
                    raster = rasterize(read_scribbles(job.scribble), img.width, img.height,
                                       ScribbleCategory::Foreground);
                }
                TileTrace trace;
                const ProposalMask proposal = propagate_tile(img, raster, config, &trace);
                write_tristate_mask(out_dir / (job.stem + ".png"), proposal);
                if (overlay_dir)
                    write_image(*overlay_dir / (job.stem + ".png"),
                                overlay_proposal(img, proposal));

                TileSummary& ts = summary.tiles[i];
                ts.stem = job.stem;
                std::size_t road = 0, unknown = 0;
                for (const TriState v : proposal.data) {
                    if (v == TriState::Road) ++road;
                    if (v == TriState::Unknown) ++unknown;
                }
                const double n = static_cast<double>(proposal.data.size());
                ts.road_frac = road / n;
                ts.unknown_frac = unknown / n;
                ts.nonroad_frac = (n - road - unknown) / n;
                if (logger) {
                    std::lock_guard lock(shared_mutex);
                    logger(ts, trace);
                }
            } catch (...) {
                std::lock_guard lock(shared_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1 || todo.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int count = std::min<int>(jobs, static_cast<int>(todo.size()));
        pool.reserve(static_cast<std::size_t>(count));
        for (int t = 0; t < count; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return summary;
}

}  // namespace roadprop
