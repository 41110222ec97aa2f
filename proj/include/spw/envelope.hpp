#pragma once

#include <span>

#include "spw/grid.hpp"

namespace spw {

// Non-negative amplitude envelope of one analytic subband.
struct EnvelopeMap {
    RealGrid grid;
    int level = 1;     // 1-based pyramid level the envelope came from
    Size source_size;  // subband size before any upsampling
};

// Per-pixel modulus of an analytic subband.
[[nodiscard]] EnvelopeMap amplitude(const ComplexGrid& subband, int level = 1);

// Periodic-sinc (Fourier zero-padding) interpolation of an envelope onto a
// larger grid. Amplitudes are preserved; negative ringing is clamped to 0.
// Throws ShapeError if the target is smaller than the source on either axis.
[[nodiscard]] EnvelopeMap upsample_zero_pad(const EnvelopeMap& e, Size target);

// beta^(level-1) * sum of the envelopes, at their native resolution.
// Throws ShapeError if the envelopes differ in size, DomainError on an empty
// list, level < 1 or beta <= 0.
[[nodiscard]] RealGrid scale_weight(std::span<const EnvelopeMap> envelopes, double beta, int level);

}  // namespace spw
