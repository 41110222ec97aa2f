#pragma once

#include <memory>
#include <vector>

#include "spw/grid.hpp"

namespace spw {

struct FilterBankSpec {
    int orientations = 4;  // K
    int levels = 4;        // N

    friend bool operator==(const FilterBankSpec&, const FilterBankSpec&) = default;
};

void validate(const FilterBankSpec& spec);

// Grid sides must be divisible by this for `spec.levels` levels.
[[nodiscard]] int size_multiple(const FilterBankSpec& spec);

// Raised-cosine radial high-pass: 0 up to pi/4, 1 from pi/2, and
// cos(pi/2 * log2(2r/pi)) in between.
[[nodiscard]] double radial_highpass(double r);

// sqrt(1 - radial_highpass(r)^2).
[[nodiscard]] double radial_lowpass(double r);

// Normalizer 2^(K-1) (K-1)! / sqrt(K (2(K-1))!) shared by all K orientations;
// with it the squared angular gains sum to 1 at every angle.
[[nodiscard]] double angular_normalizer(int orientations);

// alpha * |cos(theta - pi k / K)|^(K-1), k in [1, K].
[[nodiscard]] double angular_gain(double theta, int k, int orientations);

// Direction (in [0, pi)) of the half-plane kept by the analytic mask of band k.
[[nodiscard]] double analytic_direction(int k, int orientations);

// Pointwise analytic band response: 2 H(r) G_k(theta) on the open half-plane
// facing analytic_direction(k), H G_k on its dividing line, 0 beyond.
[[nodiscard]] double analytic_gain(double r, double theta, int k, int orientations);

// Frequency responses of one pyramid level, sampled on that level's grid.
struct LevelFilters {
    Size size;
    RealGrid lowpass;                  // radial_lowpass on this grid
    std::vector<RealGrid> bands;       // H(r) G_k(theta), real form, k = 1..K
    std::vector<RealGrid> analytic;    // half-plane masks: 2 H G_k, H G_k on the dividing line, 0 beyond
};

// Sampled filter bank for one full-resolution grid size.
//
// The residual filters run one octave above the band filters: highpass0(r) =
// radial_highpass(r/2) and lowpass0(r) = radial_lowpass(r/2) on the full
// grid. Level i (0-based) is sampled on the full size divided by 2^i.
struct FilterBank {
    FilterBankSpec spec;
    Size size;
    double alpha = 1.0;
    RealGrid highpass0;
    RealGrid lowpass0;
    std::vector<LevelFilters> levels;
};

// Samples every mask for a (height, width) grid. Throws ShapeError if a side
// is not divisible by size_multiple(spec).
[[nodiscard]] FilterBank build_filter_bank(const FilterBankSpec& spec, int height, int width);

// Cached build_filter_bank. Each (spec, size) is built at most once per
// process; safe to call from concurrent threads.
[[nodiscard]] std::shared_ptr<const FilterBank> cached_filter_bank(const FilterBankSpec& spec,
                                                                   Size size);

}  // namespace spw
