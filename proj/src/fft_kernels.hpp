#pragma once

// Buffer-level transforms behind the grid API. All transforms are
// unnormalized and out-of-place; buffers may be unaligned.

#include "spw/grid.hpp"

namespace spw::detail {

void c2c(const Complex* in, Complex* out, Size size, bool inverse);

// Real input to the non-redundant half spectrum, height x (width/2 + 1).
void r2c(const double* in, Complex* half_out, Size size);

// Half spectrum (height x (width/2 + 1)) of a Hermitian spectrum to real
// samples. `half_in` is clobbered.
void c2r(Complex* half_in, double* out, Size size);

// Fourier resize of a full spectrum, see spw::resample_spectrum. `dst` must
// hold target.area() values and must not alias `src`.
void resample_into(const Complex* src, Size source, Complex* dst, Size target);

}  // namespace spw::detail
