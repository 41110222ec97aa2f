#include "spw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spw {

namespace {

void require_labels(const LabelGrid& gt, const LabelGrid& pred, int classes) {
    require_same_size(gt.size(), pred.size(), "labelings");
    if (classes < 1) throw DomainError("class count must be >= 1");
    for (const LabelGrid* g : {&gt, &pred})
        for (int id : g->values())
            if (id < 0 || id >= classes)
                throw DomainError("class id " + std::to_string(id) + " outside [0, " +
                                  std::to_string(classes) + ")");
}

struct Overlap {
    std::vector<std::int64_t> inter, gt, pred;
};

Overlap overlap(const LabelGrid& gt, const LabelGrid& pred, int classes) {
    require_labels(gt, pred, classes);
    Overlap o{std::vector<std::int64_t>(classes), std::vector<std::int64_t>(classes),
              std::vector<std::int64_t>(classes)};
    for (std::size_t i = 0; i < gt.area(); ++i) {
        ++o.gt[gt[i]];
        ++o.pred[pred[i]];
        if (gt[i] == pred[i]) ++o.inter[gt[i]];
    }
    return o;
}

double mean_present(const std::vector<double>& per_class) {
    double sum = 0.0;
    int present = 0;
    for (double x : per_class)
        if (!std::isnan(x)) {
            sum += x;
            ++present;
        }
    return present == 0 ? 1.0 : sum / present;
}

double pairs(std::int64_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

ContingencyTable contingency(const LabelGrid& a, const LabelGrid& b, const std::vector<bool>* include) {
    require_same_size(a.size(), b.size(), "labelings");
    if (include != nullptr && include->size() != a.area())
        throw ShapeError("inclusion mask does not match the labeling size");

    std::vector<std::pair<int, int>> keys;
    keys.reserve(a.area());
    for (std::size_t i = 0; i < a.area(); ++i)
        if (include == nullptr || (*include)[i]) keys.emplace_back(a[i], b[i]);
    std::sort(keys.begin(), keys.end());

    ContingencyTable t;
    t.total = static_cast<std::int64_t>(keys.size());
    for (const auto& [x, y] : keys) {
        if (t.row_ids.empty() || t.row_ids.back() != x) t.row_ids.push_back(x);
        t.col_ids.push_back(y);
    }
    std::sort(t.col_ids.begin(), t.col_ids.end());
    t.col_ids.erase(std::unique(t.col_ids.begin(), t.col_ids.end()), t.col_ids.end());
    t.row_sums.assign(t.row_ids.size(), 0);
    t.col_sums.assign(t.col_ids.size(), 0);

    int row = -1;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i == 0 || keys[i].first != keys[i - 1].first) ++row;
        const int col = static_cast<int>(
            std::lower_bound(t.col_ids.begin(), t.col_ids.end(), keys[i].second) - t.col_ids.begin());
        if (i > 0 && keys[i] == keys[i - 1])
            ++t.cells.back().count;
        else
            t.cells.push_back({row, col, 1});
        ++t.row_sums[row];
        ++t.col_sums[col];
    }
    return t;
}

LabelGrid connected_components(const LabelGrid& mask) {
    const int h = mask.height();
    const int w = mask.width();
    LabelGrid ids(mask.size(), -1);
    std::vector<std::pair<int, int>> stack;
    int next = 0;
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            if (ids(u, v) >= 0) continue;
            const int value = mask(u, v);
            ids(u, v) = next;
            stack.emplace_back(u, v);
            while (!stack.empty()) {
                const auto [cu, cv] = stack.back();
                stack.pop_back();
                constexpr int du[] = {-1, 1, 0, 0};
                constexpr int dv[] = {0, 0, -1, 1};
                for (int n = 0; n < 4; ++n) {
                    const int nu = cu + du[n];
                    const int nv = cv + dv[n];
                    if (nu < 0 || nu >= h || nv < 0 || nv >= w) continue;
                    if (ids(nu, nv) >= 0 || mask(nu, nv) != value) continue;
                    ids(nu, nv) = next;
                    stack.emplace_back(nu, nv);
                }
            }
            ++next;
        }
    }
    return ids;
}

std::vector<double> class_iou(const LabelGrid& gt, const LabelGrid& pred, int classes) {
    const Overlap o = overlap(gt, pred, classes);
    std::vector<double> out(classes, std::numeric_limits<double>::quiet_NaN());
    for (int c = 0; c < classes; ++c) {
        const std::int64_t uni = o.gt[c] + o.pred[c] - o.inter[c];
        if (uni > 0) out[c] = static_cast<double>(o.inter[c]) / static_cast<double>(uni);
    }
    return out;
}

std::vector<double> class_dice(const LabelGrid& gt, const LabelGrid& pred, int classes) {
    const Overlap o = overlap(gt, pred, classes);
    std::vector<double> out(classes, std::numeric_limits<double>::quiet_NaN());
    for (int c = 0; c < classes; ++c) {
        const std::int64_t sizes = o.gt[c] + o.pred[c];
        if (sizes > 0) out[c] = 2.0 * static_cast<double>(o.inter[c]) / static_cast<double>(sizes);
    }
    return out;
}

double miou(const LabelGrid& gt, const LabelGrid& pred, int classes) {
    return mean_present(class_iou(gt, pred, classes));
}

double mdice(const LabelGrid& gt, const LabelGrid& pred, int classes) {
    return mean_present(class_dice(gt, pred, classes));
}

double variation_of_information(const ContingencyTable& t) {
    if (t.total == 0) return 0.0;
    const double n = static_cast<double>(t.total);
    double vi = 0.0;
    for (const auto& cell : t.cells) {
        const double nij = static_cast<double>(cell.count);
        const double ai = static_cast<double>(t.row_sums[cell.row]);
        const double bj = static_cast<double>(t.col_sums[cell.col]);
        vi -= nij / n * (std::log(nij / ai) + std::log(nij / bj));
    }
    return std::max(vi, 0.0);
}

double variation_of_information(const LabelGrid& a, const LabelGrid& b) {
    return variation_of_information(contingency(a, b));
}

double adjusted_rand_index(const ContingencyTable& t) {
    if (t.total < 2) throw DomainError("adjusted Rand index needs at least 2 pixels");
    double index = 0.0;
    for (const auto& cell : t.cells) index += pairs(cell.count);
    double sum_a = 0.0;
    for (std::int64_t a : t.row_sums) sum_a += pairs(a);
    double sum_b = 0.0;
    for (std::int64_t b : t.col_sums) sum_b += pairs(b);

    const double expected = sum_a * sum_b / pairs(t.total);
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) return 1.0;
    return (index - expected) / denom;
}

double adjusted_rand_index(const LabelGrid& a, const LabelGrid& b) {
    return adjusted_rand_index(contingency(a, b));
}

SegmentationMetrics evaluate_all(const LabelGrid& gt, const LabelGrid& pred, int classes,
                                 const MetricsOptions& options) {
    SegmentationMetrics m;
    m.miou = miou(gt, pred, classes);
    m.mdice = mdice(gt, pred, classes);

    const LabelGrid gt_components = connected_components(gt);
    const LabelGrid pred_components = connected_components(pred);
    std::vector<bool> include;
    if (options.exclude_background) {
        include.resize(gt.area());
        for (std::size_t i = 0; i < gt.area(); ++i) include[i] = gt[i] != 0;
    }
    const ContingencyTable t =
        contingency(gt_components, pred_components, options.exclude_background ? &include : nullptr);
    m.vi = variation_of_information(t);
    m.ari = t.total >= 2 ? adjusted_rand_index(t) : 1.0;
    return m;
}

}  // namespace spw
