#include "spw/spwloss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fft_kernels.hpp"
#include "spw/filters.hpp"
#include "spw/parallel.hpp"

namespace spw {

void validate(const SpwConfig& cfg) {
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
        throw DomainError("lambda must be a finite value >= 0");
    if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta))
        throw DomainError("beta must be a finite value > 0");
    validate(cfg.filter_spec());
}

namespace {

void require_channels(std::span<const RealGrid> channels, const char* what) {
    if (channels.size() < 2)
        throw DomainError(std::string(what) + " needs at least 2 classes, got " +
                          std::to_string(channels.size()));
    for (const RealGrid& c : channels) {
        require_same_size(c.size(), channels.front().size(), std::string(what) + " channels");
        require_finite(c, what);
    }
}

}  // namespace

LabelField::LabelField(std::vector<RealGrid> channels) : channels_(std::move(channels)) {
    require_channels(channels_, "label field");
    for (std::size_t i = 0; i < size().area(); ++i) {
        double total = 0.0;
        for (const RealGrid& c : channels_) {
            if (c[i] != 0.0 && c[i] != 1.0) throw DomainError("label field must be one-hot 0/1");
            total += c[i];
        }
        if (total != 1.0) throw DomainError("label field must have exactly one class per pixel");
    }
}

LabelField LabelField::from_class_ids(const LabelGrid& ids, int classes) {
    if (classes < 2) throw DomainError("label needs at least 2 classes");
    std::vector<RealGrid> channels(classes, RealGrid(ids.size()));
    for (std::size_t i = 0; i < ids.area(); ++i) {
        const int c = ids[i];
        if (c < 0 || c >= classes)
            throw DomainError("class id " + std::to_string(c) + " outside [0, " +
                              std::to_string(classes) + ")");
        channels[c][i] = 1.0;
    }
    return LabelField(std::move(channels));
}

LabelField LabelField::from_foreground(const RealGrid& foreground) {
    RealGrid background(foreground.size());
    for (std::size_t i = 0; i < foreground.area(); ++i) background[i] = 1.0 - foreground[i];
    return LabelField({std::move(background), foreground});
}

LabelGrid LabelField::class_ids() const {
    LabelGrid ids(size());
    for (std::size_t i = 0; i < ids.area(); ++i)
        for (int c = 0; c < classes(); ++c)
            if (channels_[c][i] == 1.0) ids[i] = c;
    return ids;
}

ProbabilityField::ProbabilityField(std::vector<RealGrid> channels) : channels_(std::move(channels)) {
    require_channels(channels_, "probability field");
    for (std::size_t i = 0; i < size().area(); ++i) {
        double total = 0.0;
        for (const RealGrid& c : channels_) {
            if (c[i] < 0.0 || c[i] > 1.0) throw DomainError("probabilities must lie in [0, 1]");
            total += c[i];
        }
        if (std::abs(total - 1.0) > kSumTolerance)
            throw DomainError("class probabilities must sum to 1 at every pixel");
    }
}

ProbabilityField ProbabilityField::from_foreground(const RealGrid& foreground) {
    RealGrid background(foreground.size());
    for (std::size_t i = 0; i < foreground.area(); ++i) background[i] = 1.0 - foreground[i];
    return ProbabilityField({std::move(background), foreground});
}

LabelGrid ProbabilityField::argmax() const {
    LabelGrid ids(size());
    for (std::size_t i = 0; i < ids.area(); ++i) {
        int best = 0;
        for (int c = 1; c < classes(); ++c)
            if (channels_[c][i] > channels_[best][i]) best = c;
        ids[i] = best;
    }
    return ids;
}

ProbabilityField softmax(std::span<const RealGrid> logits) {
    require_channels(logits, "logits");
    const Size size = logits.front().size();
    std::vector<RealGrid> probs(logits.size(), RealGrid(size));
    for (std::size_t i = 0; i < size.area(); ++i) {
        double peak = -std::numeric_limits<double>::infinity();
        for (const RealGrid& l : logits) peak = std::max(peak, l[i]);
        double total = 0.0;
        for (std::size_t c = 0; c < logits.size(); ++c) {
            probs[c][i] = std::exp(logits[c][i] - peak);
            total += probs[c][i];
        }
        for (auto& p : probs) p[i] /= total;
    }
    return ProbabilityField(std::move(probs));
}

namespace {

// Weight map of one real channel at its own (unpadded) size.
//
// Same result as padding, decompose(), amplitude() on every band,
// scale_weight() and upsample_zero_pad() per level, summed and cropped, but
// fused: the residuals are never formed, band moduli go straight into the
// level sum, upsampling uses half-spectrum real transforms and the scratch
// buffers live for the whole thread.
struct Workspace {
    std::vector<Complex> running, next, band, out, half;
    std::vector<double> level_sum, real;

    static void fit(std::vector<Complex>& v, std::size_t n) {
        if (v.size() < n) v.resize(n);
    }
    static void fit(std::vector<double>& v, std::size_t n) {
        if (v.size() < n) v.resize(n);
    }
};

// Full spectrum of a real grid from its half spectrum.
void expand_half(const Complex* half, Complex* full, Size size) {
    const int hw = size.width / 2 + 1;
    for (int u = 0; u < size.height; ++u) {
        const int mu = (size.height - u) % size.height;
        Complex* row = full + static_cast<std::size_t>(u) * size.width;
        const Complex* src = half + static_cast<std::size_t>(u) * hw;
        const Complex* mirror = half + static_cast<std::size_t>(mu) * hw;
        std::copy(src, src + hw, row);
        for (int v = hw; v < size.width; ++v) row[v] = std::conj(mirror[size.width - v]);
    }
}

void keep_half(const Complex* full, Complex* half, Size size) {
    const int hw = size.width / 2 + 1;
    for (int u = 0; u < size.height; ++u)
        std::copy_n(full + static_cast<std::size_t>(u) * size.width, hw,
                    half + static_cast<std::size_t>(u) * hw);
}

RealGrid channel_map(const RealGrid& channel, const SpwConfig& cfg) {
    const FilterBankSpec spec = cfg.filter_spec();
    const PaddedGrid padded = pad_to_multiple(channel, size_multiple(spec));
    const Size full = padded.grid.size();
    const auto bank = cached_filter_bank(spec, full);

    thread_local Workspace ws;
    const std::size_t n = full.area();
    const std::size_t n_half = static_cast<std::size_t>(full.height) * (full.width / 2 + 1);
    Workspace::fit(ws.running, n);
    Workspace::fit(ws.next, n);
    Workspace::fit(ws.band, n);
    Workspace::fit(ws.out, n);
    Workspace::fit(ws.half, n_half);
    Workspace::fit(ws.level_sum, n);
    Workspace::fit(ws.real, n);

    detail::r2c(padded.grid.data(), ws.half.data(), full);
    expand_half(ws.half.data(), ws.running.data(), full);
    for (std::size_t j = 0; j < n; ++j) ws.running[j] *= bank->lowpass0[j];

    RealGrid total(full);
    for (int i = 0; i < spec.levels; ++i) {
        const LevelFilters& level = bank->levels[i];
        const Size size = level.size;
        const std::size_t m = size.area();
        const double inv_m = 1.0 / static_cast<double>(m);

        std::fill_n(ws.level_sum.begin(), m, 0.0);
        for (const RealGrid& mask : level.analytic) {
            for (std::size_t j = 0; j < m; ++j) ws.band[j] = ws.running[j] * mask[j];
            detail::c2c(ws.band.data(), ws.out.data(), size, true);
            for (std::size_t j = 0; j < m; ++j) ws.level_sum[j] += std::sqrt(std::norm(ws.out[j])) * inv_m;
        }
        const double gain = std::pow(cfg.beta, i);

        if (size == full) {
            for (std::size_t j = 0; j < n; ++j) total[j] += gain * ws.level_sum[j];
        } else {
            for (std::size_t j = 0; j < m; ++j) ws.level_sum[j] *= gain;
            detail::r2c(ws.level_sum.data(), ws.half.data(), size);
            expand_half(ws.half.data(), ws.band.data(), size);
            detail::resample_into(ws.band.data(), size, ws.out.data(), full);
            keep_half(ws.out.data(), ws.half.data(), full);
            detail::c2r(ws.half.data(), ws.real.data(), full);
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) total[j] += std::max(ws.real[j] * inv_n, 0.0);
        }

        if (i + 1 < spec.levels) {
            for (std::size_t j = 0; j < m; ++j) ws.band[j] = ws.running[j] * level.lowpass[j];
            const Size coarse{size.height / 2, size.width / 2};
            detail::resample_into(ws.band.data(), size, ws.next.data(), coarse);
            std::swap(ws.running, ws.next);
        }
    }
    return crop_to(total, padded.original);
}

}  // namespace

RealGrid spw_map(std::span<const RealGrid> channels, const SpwConfig& cfg) {
    validate(cfg);
    if (channels.empty()) throw DomainError("spw_map needs at least one channel");
    for (const RealGrid& c : channels) {
        require_same_size(c.size(), channels.front().size(), "spw_map channels");
        require_finite(c, "spw_map channel");
    }

    std::vector<RealGrid> maps(channels.size());
    parallel_for(channels.size(), [&](std::size_t c) { maps[c] = channel_map(channels[c], cfg); });

    RealGrid total(channels.front().size());
    for (const RealGrid& m : maps)
        for (std::size_t j = 0; j < total.area(); ++j) total[j] += m[j];
    return total;
}

namespace {

void require_compatible(const LabelField& label, const ProbabilityField& pred) {
    require_same_size(label.size(), pred.size(), "label and prediction");
    if (label.classes() != pred.classes())
        throw ShapeError("label has " + std::to_string(label.classes()) +
                         " classes, prediction has " + std::to_string(pred.classes()));
}

}  // namespace

RealGrid combined_spw_weight(const LabelField& label, const ProbabilityField& pred,
                             const SpwConfig& cfg) {
    require_compatible(label, pred);
    RealGrid total = spw_map(label.channels(), cfg);
    const RealGrid from_pred = spw_map(pred.channels(), cfg);
    for (std::size_t j = 0; j < total.area(); ++j) total[j] += from_pred[j];
    return total;
}

std::vector<double> class_weights(const LabelField& label, ClassWeightMode mode) {
    const int classes = label.classes();
    std::vector<double> weights(classes, 1.0);
    if (mode == ClassWeightMode::uniform) return weights;

    const double pixels = static_cast<double>(label.size().area());
    std::vector<double> freq(classes, 0.0);
    int present = 0;
    for (int c = 0; c < classes; ++c) {
        double count = 0.0;
        for (double y : label.channel(c).values()) count += y;
        freq[c] = count / pixels;
        if (count > 0.0) ++present;
    }
    double largest = 0.0;
    for (int c = 0; c < classes; ++c) {
        if (freq[c] > 0.0) {
            weights[c] = 1.0 / (present * freq[c]);
            largest = std::max(largest, weights[c]);
        }
    }
    for (int c = 0; c < classes; ++c)
        if (freq[c] == 0.0) weights[c] = largest;
    return weights;
}

namespace {

WeightMap assemble(const LabelField& label, const RealGrid& spw, const SpwConfig& cfg) {
    const std::vector<double> wc = class_weights(label, cfg.class_weights);
    const LabelGrid ids = label.class_ids();
    RealGrid w(label.size());
    for (std::size_t i = 0; i < w.area(); ++i) w[i] = wc[ids[i]] + cfg.lambda * spw[i];
    return {std::move(w)};
}

}  // namespace

WeightMap pixel_weights(const LabelField& label, const ProbabilityField& pred, const SpwConfig& cfg) {
    require_compatible(label, pred);
    if (!cfg.use_prediction_map || cfg.lambda == 0.0) return pixel_weights(label, cfg);
    return assemble(label, combined_spw_weight(label, pred, cfg), cfg);
}

WeightMap pixel_weights(const LabelField& label, const SpwConfig& cfg) {
    // The pyramid term is finite, so lambda == 0 contributes exact zeros.
    if (cfg.lambda == 0.0) {
        validate(cfg);
        return assemble(label, RealGrid(label.size()), cfg);
    }
    return assemble(label, spw_map(label.channels(), cfg), cfg);
}

double weighted_ce_loss(const LabelField& label, const ProbabilityField& pred,
                        const WeightMap& weights, Reduction reduction) {
    require_compatible(label, pred);
    require_same_size(weights.grid.size(), label.size(), "weight map and label");
    double total = 0.0;
    for (std::size_t i = 0; i < label.size().area(); ++i) {
        double pixel = 0.0;
        for (int c = 0; c < label.classes(); ++c) {
            const double y = label.channel(c)[i];
            if (y != 0.0) pixel += y * std::log(std::max(pred.channel(c)[i], kProbabilityFloor));
        }
        total -= weights.grid[i] * pixel;
    }
    if (reduction == Reduction::mean) total /= static_cast<double>(label.size().area());
    return total;
}

double cross_entropy_loss(const LabelField& label, const ProbabilityField& pred, Reduction reduction) {
    require_compatible(label, pred);
    double total = 0.0;
    for (std::size_t i = 0; i < label.size().area(); ++i) {
        double pixel = 0.0;
        for (int c = 0; c < label.classes(); ++c) {
            const double y = label.channel(c)[i];
            if (y != 0.0) pixel += y * std::log(std::max(pred.channel(c)[i], kProbabilityFloor));
        }
        total -= pixel;
    }
    if (reduction == Reduction::mean) total /= static_cast<double>(label.size().area());
    return total;
}

std::vector<RealGrid> weighted_ce_gradient(const LabelField& label, std::span<const RealGrid> logits,
                                           const WeightMap& weights, Reduction reduction) {
    const ProbabilityField probs = softmax(logits);
    require_compatible(label, probs);
    require_same_size(weights.grid.size(), label.size(), "weight map and label");

    const double scale =
        reduction == Reduction::mean ? 1.0 / static_cast<double>(label.size().area()) : 1.0;
    std::vector<RealGrid> grad(label.classes(), RealGrid(label.size()));
    for (int c = 0; c < label.classes(); ++c)
        for (std::size_t i = 0; i < label.size().area(); ++i)
            grad[c][i] = scale * weights.grid[i] * (probs.channel(c)[i] - label.channel(c)[i]);
    return grad;
}

}  // namespace spw
