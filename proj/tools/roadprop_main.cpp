// roadprop: road label propagation, loss kernels, and mask evaluation.
//
// Subcommands: propagate | eval | loss | simulate-scribbles | superpixels |
// skeletonize | graphcut-debug. Exit status: 0 success, 1 invalid
// arguments or fatal error, 2 partial failure (some inputs skipped).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "roadprop/config.hpp"
#include "roadprop/graphcut.hpp"
#include "roadprop/io.hpp"
#include "roadprop/losses.hpp"
#include "roadprop/metrics.hpp"
#include "roadprop/propagate.hpp"
#include "roadprop/raster.hpp"

namespace fs = std::filesystem;
using namespace roadprop;

namespace {

Config load_config(const std::string& path) {
    if (path.empty()) {
        Config cfg;
        cfg.validate();
        return cfg;
    }
    return parse_config(path);
}

// Probability maps load from F32M or 8-bit grayscale PNG (values / 255).
ProbMap load_prob_map(const fs::path& path) {
    if (path.extension() == ".png") {
        const RasterImage img = read_image(path);
        ProbMap out(img.width, img.height);
        for (std::size_t i = 0; i < img.data.size(); ++i)
            out.data[i] = static_cast<float>(img.data[i].r) / 255.0f;
        return out;
    }
    FloatField f = read_f32(path);
    for (float v : f.data)
        if (!(v >= 0.0f && v <= 1.0f))
            throw IoError(path.string() + ": probability map value outside [0,1]");
    return f;
}

BinaryMask load_scribble_raster(const fs::path& path, int width, int height) {
    if (path.extension() == ".png") return read_binary_mask(path);
    return rasterize(read_scribbles(path), width, height, ScribbleCategory::Foreground);
}

int run_propagate(const std::string& images, const std::string& scribbles,
                  const std::string& out, const std::string& config_path, int jobs,
                  const std::string& overlay) {
    const Config cfg = load_config(config_path);
    std::optional<fs::path> overlay_dir;
    if (!overlay.empty()) overlay_dir = overlay;

    const auto logger = [](const TileSummary& s, const TileTrace& t) {
        std::fprintf(stderr,
                     "%s: buffer %.1fms slic %.1fms stats %.1fms graph %.1fms flow %.1fms | "
                     "road %.4f unknown %.4f nonroad %.4f%s\n",
                     s.stem.c_str(), t.buffer_ms, t.slic_ms, t.stats_ms, t.graph_ms, t.flow_ms,
                     s.road_frac, s.unknown_frac, s.nonroad_frac,
                     t.graph_stage_ran ? "" : " (no seeds; buffer mask only)");
    };
    const DatasetSummary summary =
        propagate_dataset(images, scribbles, out, cfg.propagation(), jobs, overlay_dir, logger);

    std::printf("stem,road_frac,unknown_frac,nonroad_frac\n");
    for (const TileSummary& s : summary.tiles)
        std::printf("%s,%.6f,%.6f,%.6f\n", s.stem.c_str(), s.road_frac, s.unknown_frac,
                    s.nonroad_frac);
    for (const std::string& stem : summary.skipped)
        std::fprintf(stderr, "warning: no scribbles for '%s', skipped\n", stem.c_str());
    return summary.skipped.empty() ? 0 : 2;
}

int run_eval(const std::string& pred, const std::string& gt, const std::string& report) {
    const DatasetEvaluation eval = evaluate_dataset(pred, gt);
    const std::string csv = evaluation_csv(eval);
    if (!report.empty())
        write_evaluation_csv(report, eval);
    std::fputs(csv.c_str(), stdout);
    for (const std::string& stem : eval.unmatched)
        std::fprintf(stderr, "warning: unmatched stem '%s'\n", stem.c_str());
    return eval.unmatched.empty() ? 0 : 2;
}

int run_loss(const std::string& seg_path, const std::string& proposal_path,
             const std::string& image_path, const std::string& boundary_path,
             const std::string& edges_path, double alpha, double beta, double sigma_rgb,
             double sigma_xy, const std::string& grad_path, const std::string& backend_name,
             const std::string& grad_form_name) {
    const ProbMap seg = load_prob_map(seg_path);
    const TriStateMask proposal = read_tristate_mask(proposal_path);
    const RasterImage img = read_image(image_path);
    const ProbMap edges = edges_path.empty() ? sobel_edges(img) : load_prob_map(edges_path);
    const ProbMap boundary =
        boundary_path.empty() ? ProbMap(img.width, img.height, 0.0f) : load_prob_map(boundary_path);

    const FilterBackend backend =
        backend_name == "brute" ? FilterBackend::Brute : FilterBackend::Fast;
    const KernelParams params{sigma_rgb, sigma_xy};
    const LossWeights weights{alpha, beta};

    const LossReport report = joint_loss(seg, proposal, img, edges, boundary, weights, params,
                                         backend);
    std::printf("pbce=%.9g reg=%.9g bound=%.9g seg=%.9g total=%.9g\n", report.pbce, report.reg,
                report.bound, report.seg, report.total);

    if (!grad_path.empty()) {
        const RegGradForm form =
            grad_form_name == "two-ws" ? RegGradForm::TwoWsOnly : RegGradForm::Full;
        write_f32(grad_path, regularized_loss_grad(seg, img, params, backend, form));
    }
    return 0;
}

int run_simulate(const std::string& gt_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    int count = 0;
    std::vector<fs::path> inputs;
    for (const auto& e : fs::directory_iterator(gt_dir))
        if (e.is_regular_file() && e.path().extension() == ".png") inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
    for (const fs::path& p : inputs) {
        const BinaryMask gt = read_binary_mask(p);
        const ScribbleSet set = simulate_scribbles(gt);
        write_scribbles(fs::path(out_dir) / (p.stem().string() + ".txt"), set);
        std::fprintf(stderr, "%s: %zu polylines\n", p.stem().string().c_str(),
                     set.scribbles.size());
        ++count;
    }
    std::printf("simulated scribbles for %d masks\n", count);
    return 0;
}

int run_superpixels(const std::string& image_path, const std::string& out_path, int target,
                    double compactness, const std::string& dump_path) {
    const RasterImage img = read_image(image_path);
    SlicParams params;
    params.target_count = target;
    params.compactness = compactness;
    const SuperpixelLabeling labeling = slic_segment(img, params);

    Grid<std::uint16_t> label_png(labeling.width, labeling.height);
    for (std::size_t i = 0; i < label_png.data.size(); ++i) {
        if (labeling.labels[i] > 0xffff) throw IoError("superpixels: label exceeds 16 bits");
        label_png.data[i] = static_cast<std::uint16_t>(labeling.labels[i]);
    }
    write_label_map(out_path, label_png);
    std::printf("superpixels=%d\n", labeling.count);

    if (!dump_path.empty()) {
        const std::vector<SuperpixelStats> stats =
            compute_stats(rgb_to_hsv(img), labeling, HistogramSpec{});
        std::vector<Vec2> centroids(stats.size());
        for (std::size_t i = 0; i < stats.size(); ++i)
            centroids[i] = {stats[i].centroid_x, stats[i].centroid_y};
        const AdjacencyGraph adj = delaunay_adjacency(centroids);
        std::ofstream os(dump_path);
        if (!os) throw IoError("cannot open " + dump_path + " for writing");
        os << "# nodes " << labeling.count << "\n";
        for (const auto& [a, b] : adj.edges) os << "edge " << a << ' ' << b << "\n";
    }
    return 0;
}

int run_skeletonize(const std::string& mask_path, const std::string& out_path) {
    write_binary_mask(out_path, skeletonize(read_binary_mask(mask_path)));
    return 0;
}

int run_graphcut_debug(const std::string& image_path, const std::string& scribble_path,
                       const std::string& config_path, const std::string& dump_path,
                       const std::string& mask_path) {
    const Config cfg = load_config(config_path);
    const PropagationConfig pc = cfg.propagation();
    const RasterImage img = read_image(image_path);
    const BinaryMask raster = load_scribble_raster(scribble_path, img.width, img.height);

    const TriStateMask buffer = buffer_mask(raster, pc.buffer);
    const SuperpixelLabeling labeling = slic_segment(img, pc.slic);
    const std::vector<SuperpixelStats> stats = compute_stats(rgb_to_hsv(img), labeling, pc.hist);
    const SeedAssignment seeds = assign_seeds(labeling, raster, buffer);

    std::vector<int> fg_members, bg_members;
    for (int k = 0; k < labeling.count; ++k) {
        if (seeds.classes[k] == SeedClass::ForegroundSeed) fg_members.push_back(k);
        if (seeds.classes[k] == SeedClass::BackgroundSeed) bg_members.push_back(k);
    }
    std::vector<Vec2> centroids(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i)
        centroids[i] = {stats[i].centroid_x, stats[i].centroid_y};
    const EnergyGraph energy = build_energy(
        stats, delaunay_adjacency(centroids), seeds, cumulative_class_histogram(stats, fg_members),
        cumulative_class_histogram(stats, bg_members), pc.pairwise_gamma, pc.pairwise_sigma,
        pc.kl_eps);
    const CutResult cut = max_flow(energy);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!dump_path.empty()) {
        file.open(dump_path);
        if (!file) throw IoError("cannot open " + dump_path + " for writing");
        os = &file;
    }
    // Terminal capacities per the s-t reduction: the foreground-terminal
    // link is cut when the node takes the background label and vice versa.
    (*os).precision(9);
    *os << "# nodes " << energy.node_count() << "\n";
    *os << "# hard " << energy.hard_cost << "\n";
    for (int i = 0; i < energy.node_count(); ++i)
        *os << "node " << i << ' ' << energy.cost_bg[i] << ' ' << energy.cost_fg[i] << "\n";
    for (const auto& e : energy.edges)
        *os << "edge " << e.a << ' ' << e.b << ' ' << e.weight << "\n";
    *os << "# cut " << cut.cut_value << "\n";

    if (!mask_path.empty()) write_binary_mask(mask_path, graph_mask(labeling, cut));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scribble-to-mask road label propagation toolkit"};
    app.require_subcommand(1);

    // propagate
    auto* prop = app.add_subcommand("propagate", "Propagate scribbles into proposal masks");
    std::string prop_images, prop_scribbles, prop_out, prop_config, prop_overlay;
    int prop_jobs = 1;
    prop->add_option("--images", prop_images, "Directory of RGB PNG tiles")->required();
    prop->add_option("--scribbles", prop_scribbles, "Directory of .txt / .png scribbles")
        ->required();
    prop->add_option("--out", prop_out, "Output directory for proposal masks")->required();
    prop->add_option("--config", prop_config, "key=value config file");
    prop->add_option("--jobs", prop_jobs, "Worker threads")->check(CLI::PositiveNumber);
    prop->add_option("--overlay", prop_overlay, "Optional overlay image directory");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate binary masks against ground truth");
    std::string eval_pred, eval_gt, eval_report;
    ev->add_option("--pred", eval_pred, "Directory of predicted masks")->required();
    ev->add_option("--gt", eval_gt, "Directory of ground-truth masks")->required();
    ev->add_option("--report", eval_report, "CSV report path");

    // loss
    auto* ls = app.add_subcommand("loss", "Evaluate the weakly supervised loss kernels");
    std::string loss_seg, loss_proposal, loss_image, loss_boundary, loss_edges, loss_grad;
    std::string loss_backend = "fast", loss_grad_form = "full";
    double loss_alpha = 0.5, loss_beta = 0.7, loss_sigma_rgb = 15.0, loss_sigma_xy = 100.0;
    ls->add_option("--seg", loss_seg, "Segmentation probability map (F32M or PNG)")->required();
    ls->add_option("--proposal", loss_proposal, "Tri-state proposal mask PNG")->required();
    ls->add_option("--image", loss_image, "RGB image PNG")->required();
    ls->add_option("--boundary", loss_boundary, "Predicted boundary map (F32M or PNG)");
    ls->add_option("--edges", loss_edges,
                   "Target edge map (F32M or PNG); Sobel edges of the image when omitted");
    ls->add_option("--alpha", loss_alpha, "Regularizer weight");
    ls->add_option("--beta", loss_beta, "Boundary weight");
    ls->add_option("--sigma-rgb", loss_sigma_rgb, "Color bandwidth");
    ls->add_option("--sigma-xy", loss_sigma_xy, "Spatial bandwidth");
    ls->add_option("--grad", loss_grad, "Write the regularizer gradient to this F32M path");
    ls->add_option("--backend", loss_backend, "Filter backend")
        ->check(CLI::IsMember({"brute", "fast"}));
    ls->add_option("--grad-form", loss_grad_form, "Gradient form")
        ->check(CLI::IsMember({"full", "two-ws"}));

    // simulate-scribbles
    auto* sim = app.add_subcommand("simulate-scribbles",
                                   "Derive centerline scribbles from surface masks");
    std::string sim_gt, sim_out;
    sim->add_option("--gt", sim_gt, "Directory of road-surface masks")->required();
    sim->add_option("--out", sim_out, "Output directory for .txt scribbles")->required();

    // superpixels
    auto* sp = app.add_subcommand("superpixels", "SLIC superpixel labeling");
    std::string sp_image, sp_out, sp_dump;
    int sp_target = 400;
    double sp_compactness = 20.0;
    sp->add_option("--image", sp_image, "RGB image PNG")->required();
    sp->add_option("--out", sp_out, "16-bit label map PNG")->required();
    sp->add_option("--target", sp_target, "Approximate superpixel count");
    sp->add_option("--compactness", sp_compactness, "SLIC compactness");
    sp->add_option("--dump", sp_dump, "Dump Delaunay adjacency as text");

    // skeletonize
    auto* sk = app.add_subcommand("skeletonize", "Thin a binary mask to its centerline");
    std::string sk_mask, sk_out;
    sk->add_option("--mask", sk_mask, "Binary mask PNG")->required();
    sk->add_option("--out", sk_out, "Output PNG")->required();

    // graphcut-debug
    auto* gd = app.add_subcommand("graphcut-debug", "Dump the superpixel energy graph and cut");
    std::string gd_image, gd_scribbles, gd_config, gd_dump, gd_mask;
    gd->add_option("--image", gd_image, "RGB image PNG")->required();
    gd->add_option("--scribbles", gd_scribbles, "Scribble .txt or mask .png")->required();
    gd->add_option("--config", gd_config, "key=value config file");
    gd->add_option("--dump", gd_dump, "Write graph text here instead of stdout");
    gd->add_option("--mask", gd_mask, "Write the graph mask PNG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << std::flush;
        return 1;
    }

    try {
        if (prop->parsed())
            return run_propagate(prop_images, prop_scribbles, prop_out, prop_config, prop_jobs,
                                 prop_overlay);
        if (ev->parsed()) return run_eval(eval_pred, eval_gt, eval_report);
        if (ls->parsed())
            return run_loss(loss_seg, loss_proposal, loss_image, loss_boundary, loss_edges,
                            loss_alpha, loss_beta, loss_sigma_rgb, loss_sigma_xy, loss_grad,
                            loss_backend, loss_grad_form);
        if (sim->parsed()) return run_simulate(sim_gt, sim_out);
        if (sp->parsed())
            return run_superpixels(sp_image, sp_out, sp_target, sp_compactness, sp_dump);
        if (sk->parsed()) return run_skeletonize(sk_mask, sk_out);
        if (gd->parsed())
            return run_graphcut_debug(gd_image, gd_scribbles, gd_config, gd_dump, gd_mask);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
