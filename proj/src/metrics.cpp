#include "roadprop/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "roadprop/io.hpp"

namespace roadprop {

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_size(pred, gt, "confusion");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool g = gt.data[i] != 0;
        if (p && g)
            ++c.tp;
        else if (p && !g)
            ++c.fp;
        else if (!p && g)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

MetricReport metrics(const ConfusionCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
        throw std::invalid_argument("metrics: negative count");
    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    MetricReport r;
    const double tp = static_cast<double>(c.tp);
    r.precision = ratio(tp, tp + static_cast<double>(c.fp));
    r.recall = ratio(tp, tp + static_cast<double>(c.fn));
    r.f1 = ratio(2.0 * tp, 2.0 * tp + static_cast<double>(c.fp) + static_cast<double>(c.fn));
    r.iou = ratio(tp, tp + static_cast<double>(c.fp) + static_cast<double>(c.fn));
    return r;
}

DatasetEvaluation evaluate_dataset(const std::filesystem::path& pred_dir,
                                   const std::filesystem::path& gt_dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(pred_dir))
        throw IoError("evaluate_dataset: not a directory: " + pred_dir.string());
    if (!fs::is_directory(gt_dir))
        throw IoError("evaluate_dataset: not a directory: " + gt_dir.string());

    std::map<std::string, fs::path> preds, gts;
    for (const auto& e : fs::directory_iterator(pred_dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            preds[e.path().stem().string()] = e.path();
    for (const auto& e : fs::directory_iterator(gt_dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            gts[e.path().stem().string()] = e.path();

    DatasetEvaluation eval;
    for (const auto& [stem, path] : preds) {
        const auto it = gts.find(stem);
        if (it == gts.end()) {
            eval.unmatched.push_back(stem);
            continue;
        }
        TileEvaluation tile;
        tile.stem = stem;
        tile.counts = confusion(read_binary_mask(path), read_binary_mask(it->second));
        tile.report = metrics(tile.counts);
        eval.total_counts += tile.counts;
        eval.tiles.push_back(std::move(tile));
    }
    for (const auto& [stem, path] : gts)
        if (!preds.contains(stem)) eval.unmatched.push_back(stem);
    std::sort(eval.unmatched.begin(), eval.unmatched.end());
    eval.total = metrics(eval.total_counts);
    return eval;
}

std::string evaluation_csv(const DatasetEvaluation& eval) {
    std::ostringstream os;
    os << "stem,tp,fp,fn,tn,precision,recall,f1,iou\n";
    os.setf(std::ios::fixed);
    os.precision(4);
    auto row = [&os](const std::string& stem, const ConfusionCounts& c, const MetricReport& r) {
        os << stem << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ','
           << r.precision << ',' << r.recall << ',' << r.f1 << ',' << r.iou << '\n';
    };
    for (const TileEvaluation& t : eval.tiles) row(t.stem, t.counts, t.report);
    row("TOTAL", eval.total_counts, eval.total);
    return os.str();
}

void write_evaluation_csv(const std::filesystem::path& path, const DatasetEvaluation& eval) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << evaluation_csv(eval);
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace roadprop
