#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roadprop/grid.hpp"

namespace roadprop {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
};

struct MetricReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double iou = 0.0;
};

// Per-pixel tally with road (set) as the positive class.
ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& gt);

// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 = 2tp/(2tp+fp+fn),
// iou = tp/(tp+fp+fn). Any 0/0 yields 0.
MetricReport metrics(const ConfusionCounts& c);

struct TileEvaluation {
    std::string stem;
    ConfusionCounts counts;
    MetricReport report;
};

struct DatasetEvaluation {
    std::vector<TileEvaluation> tiles;   // sorted by stem
    ConfusionCounts total_counts;        // summed before applying the formulas
    MetricReport total;                  // micro-average
    std::vector<std::string> unmatched;  // stems present on only one side
};

// Pairs prediction and ground-truth masks by file stem and micro-averages
// the counts. Unmatched stems are reported, not fatal.
DatasetEvaluation evaluate_dataset(const std::filesystem::path& pred_dir,
                                   const std::filesystem::path& gt_dir);

// CSV: stem, tp, fp, fn, tn, precision, recall, f1, iou per tile plus a
// TOTAL row, metric columns at 4 decimal places.
void write_evaluation_csv(const std::filesystem::path& path, const DatasetEvaluation& eval);
std::string evaluation_csv(const DatasetEvaluation& eval);

}  // namespace roadprop
