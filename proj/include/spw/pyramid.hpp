#pragma once

#include <vector>

#include "spw/filters.hpp"
#include "spw/grid.hpp"

namespace spw {

// Steerable pyramid coefficients of one image.
//
//   high_pass        full resolution, real
//   subbands[i][k]   level i (0-based) at full size / 2^i, orientation k (0-based);
//                    analytic, so the real part is the classical real subband
//   low_pass         residual at the size of the last level
struct PyramidDecomposition {
    FilterBankSpec spec;
    Size size;  // full resolution the pyramid was built on
    RealGrid high_pass;
    std::vector<std::vector<ComplexGrid>> subbands;
    RealGrid low_pass;

    [[nodiscard]] Size level_size(int level) const {
        return {size.height >> level, size.width >> level};
    }
};

// Frequency-domain decomposition with circular boundaries. Each level filters
// the running low-pass spectrum with the K analytic band masks, then applies
// the level low-pass and crops the spectrum to its central half (amplitudes
// preserved) for the next level. Linear in `image`.
//
// Throws ShapeError unless both sides are divisible by 2^(levels-1).
[[nodiscard]] PyramidDecomposition decompose(const RealGrid& image, const FilterBankSpec& spec);

// Adjoint synthesis; inverts decompose up to rounding for real inputs.
// Throws ShapeError if the coefficient sizes do not follow the level ladder.
[[nodiscard]] RealGrid reconstruct(const PyramidDecomposition& p);

}  // namespace spw
