#include "spw/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace spw {

EnvelopeMap amplitude(const ComplexGrid& subband, int level) {
    return {modulus(subband), level, subband.size()};
}

EnvelopeMap upsample_zero_pad(const EnvelopeMap& e, Size target) {
    const Size source = e.grid.size();
    if (target.height < source.height || target.width < source.width)
        throw ShapeError("upsample target " + to_string(target) + " is smaller than source " +
                         to_string(source));
    if (target == source) return e;

    RealGrid out = real_part(inverse_fft(resample_spectrum(forward_fft(e.grid), target)));
    for (double& x : out.values()) x = std::max(x, 0.0);
    return {std::move(out), e.level, e.source_size};
}

RealGrid scale_weight(std::span<const EnvelopeMap> envelopes, double beta, int level) {
    if (envelopes.empty()) throw DomainError("scale_weight needs at least one envelope");
    if (level < 1) throw DomainError("level must be >= 1, got " + std::to_string(level));
    if (!(beta > 0.0)) throw DomainError("beta must be > 0");

    const Size size = envelopes.front().grid.size();
    RealGrid sum(size);
    for (const EnvelopeMap& e : envelopes) {
        require_same_size(e.grid.size(), size, "envelopes of one level");
        for (std::size_t i = 0; i < sum.area(); ++i) sum[i] += e.grid[i];
    }
    const double gain = std::pow(beta, level - 1);
    for (double& x : sum.values()) x *= gain;
    return sum;
}

}  // namespace spw
