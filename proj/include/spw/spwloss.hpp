#pragma once

#include <span>
#include <vector>

#include "spw/filters.hpp"
#include "spw/grid.hpp"

namespace spw {

enum class ClassWeightMode { uniform, inverse_frequency };
enum class Reduction { sum, mean };

struct SpwConfig {
    double lambda = 10.0;  // weight of the pyramid term in w(x)
    double beta = 0.9;     // per-level decay, level i contributes beta^(i-1)
    int levels = 4;
    int orientations = 4;
    ClassWeightMode class_weights = ClassWeightMode::uniform;
    Reduction reduction = Reduction::mean;
    // false drops the prediction-derived term (label-only ablation).
    bool use_prediction_map = true;

    [[nodiscard]] FilterBankSpec filter_spec() const { return {orientations, levels}; }
};

void validate(const SpwConfig& cfg);

// One-hot ground truth, one indicator grid per class.
class LabelField {
public:
    // Throws DomainError unless there are >= 2 channels of equal size whose
    // values are 0/1 and sum to exactly 1 at every pixel.
    explicit LabelField(std::vector<RealGrid> channels);

    // Class ids in [0, classes). Throws DomainError on ids outside that range.
    [[nodiscard]] static LabelField from_class_ids(const LabelGrid& ids, int classes);

    // Binary task given as a 0/1 foreground grid; expands to (background, foreground).
    [[nodiscard]] static LabelField from_foreground(const RealGrid& foreground);

    [[nodiscard]] int classes() const { return static_cast<int>(channels_.size()); }
    [[nodiscard]] Size size() const { return channels_.front().size(); }
    [[nodiscard]] std::span<const RealGrid> channels() const { return channels_; }
    [[nodiscard]] const RealGrid& channel(int c) const { return channels_[c]; }
    [[nodiscard]] LabelGrid class_ids() const;

private:
    std::vector<RealGrid> channels_;
};

// Per-class probabilities summing to 1 at every pixel.
class ProbabilityField {
public:
    static constexpr double kSumTolerance = 1e-6;

    // Throws DomainError unless there are >= 2 equal-size channels with values
    // in [0, 1] summing to 1 within kSumTolerance.
    explicit ProbabilityField(std::vector<RealGrid> channels);

    // Binary task given as foreground probabilities; expands to (1 - p, p).
    [[nodiscard]] static ProbabilityField from_foreground(const RealGrid& foreground);

    [[nodiscard]] int classes() const { return static_cast<int>(channels_.size()); }
    [[nodiscard]] Size size() const { return channels_.front().size(); }
    [[nodiscard]] std::span<const RealGrid> channels() const { return channels_; }
    [[nodiscard]] const RealGrid& channel(int c) const { return channels_[c]; }
    // Most probable class per pixel (lowest index on ties).
    [[nodiscard]] LabelGrid argmax() const;

private:
    std::vector<RealGrid> channels_;
};

struct WeightMap {
    RealGrid grid;
};

// Numerically stable per-pixel softmax over class logits.
[[nodiscard]] ProbabilityField softmax(std::span<const RealGrid> logits);

// Multi-scale envelope map of a stack of channels: each channel is mirror
// padded to a pyramid-compatible size, decomposed, and the envelopes of all
// subbands are weighted by beta^(i-1), upsampled to full size and summed; the
// per-channel maps are summed and cropped back to the input size.
[[nodiscard]] RealGrid spw_map(std::span<const RealGrid> channels, const SpwConfig& cfg);

// spw_map(label) + spw_map(pred). A plain value: nothing downstream
// differentiates through it.
[[nodiscard]] RealGrid combined_spw_weight(const LabelField& label, const ProbabilityField& pred,
                                           const SpwConfig& cfg);

// Per-class weights w_c. Uniform mode gives all ones. Inverse-frequency mode
// gives 1 / (present_classes * freq_c), so the pixel-average weight is 1;
// classes absent from the label get the largest weight assigned to a present class.
[[nodiscard]] std::vector<double> class_weights(const LabelField& label, ClassWeightMode mode);

// w(x) = w_c(x) + lambda * spw term. The label-only overload (and the
// three-argument one when cfg.use_prediction_map is false) uses spw_map(label)
// as the spw term.
[[nodiscard]] WeightMap pixel_weights(const LabelField& label, const ProbabilityField& pred,
                                      const SpwConfig& cfg);
[[nodiscard]] WeightMap pixel_weights(const LabelField& label, const SpwConfig& cfg);

// Probabilities are clamped to at least this before taking logarithms.
inline constexpr double kProbabilityFloor = 1e-12;

// -sum_x w(x) sum_c Y_c(x) log P_c(x), divided by the pixel count under mean reduction.
[[nodiscard]] double weighted_ce_loss(const LabelField& label, const ProbabilityField& pred,
                                      const WeightMap& weights, Reduction reduction);

// Unweighted cross-entropy, same conventions as weighted_ce_loss.
[[nodiscard]] double cross_entropy_loss(const LabelField& label, const ProbabilityField& pred,
                                        Reduction reduction);

// Gradient of weighted_ce_loss(label, softmax(logits), weights) with respect
// to the logits, holding the weights fixed: w(x) (P_c(x) - Y_c(x)), divided
// by the pixel count under mean reduction.
[[nodiscard]] std::vector<RealGrid> weighted_ce_gradient(const LabelField& label,
                                                         std::span<const RealGrid> logits,
                                                         const WeightMap& weights,
                                                         Reduction reduction);

}  // namespace spw
