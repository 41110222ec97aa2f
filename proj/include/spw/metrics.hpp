#pragma once

#include <cstdint>
#include <vector>

#include "spw/grid.hpp"

namespace spw {

// Pixel co-occurrence counts between two labelings of the same grid. Rows
// index the distinct ids of the first labeling in ascending order, columns
// those of the second.
struct ContingencyTable {
    std::vector<int> row_ids;
    std::vector<int> col_ids;
    std::vector<std::int64_t> row_sums;  // a_i
    std::vector<std::int64_t> col_sums;  // b_j
    // Non-zero cells only, sorted by (row, col).
    struct Cell {
        int row;
        int col;
        std::int64_t count;
    };
    std::vector<Cell> cells;
    std::int64_t total = 0;
};

// Optional per-pixel mask: only pixels where include[i] is true are counted.
[[nodiscard]] ContingencyTable contingency(const LabelGrid& a, const LabelGrid& b,
                                           const std::vector<bool>* include = nullptr);

// Labels 4-connected regions of equal value. Ids are 0, 1, 2, ... in raster
// order of each region's first pixel.
[[nodiscard]] LabelGrid connected_components(const LabelGrid& mask);

// Mean over classes present in either labeling of |A ∩ B| / |A ∪ B|.
[[nodiscard]] double miou(const LabelGrid& gt, const LabelGrid& pred, int classes);
// Mean over classes present in either labeling of 2|A ∩ B| / (|A| + |B|).
[[nodiscard]] double mdice(const LabelGrid& gt, const LabelGrid& pred, int classes);

// Per-class IoU / Dice, NaN for classes absent from both labelings.
[[nodiscard]] std::vector<double> class_iou(const LabelGrid& gt, const LabelGrid& pred, int classes);
[[nodiscard]] std::vector<double> class_dice(const LabelGrid& gt, const LabelGrid& pred, int classes);

// H(A|B) + H(B|A) in nats.
[[nodiscard]] double variation_of_information(const ContingencyTable& t);
[[nodiscard]] double variation_of_information(const LabelGrid& a, const LabelGrid& b);

// Hubert-Arabie adjusted Rand index. Returns 1 when the chance-corrected
// denominator vanishes (both labelings are the same trivial partition).
// Throws DomainError for fewer than 2 pixels.
[[nodiscard]] double adjusted_rand_index(const ContingencyTable& t);
[[nodiscard]] double adjusted_rand_index(const LabelGrid& a, const LabelGrid& b);

struct MetricsOptions {
    // Drop pixels whose ground-truth class is 0 from the VI/ARI clustering comparison.
    bool exclude_background = false;
};

struct SegmentationMetrics {
    double miou = 0.0;
    double mdice = 0.0;
    double vi = 0.0;
    double ari = 0.0;
};

// mIoU/mDice on the class masks; VI/ARI on their connected-component labelings.
[[nodiscard]] SegmentationMetrics evaluate_all(const LabelGrid& gt, const LabelGrid& pred,
                                               int classes, const MetricsOptions& options = {});

}  // namespace spw
