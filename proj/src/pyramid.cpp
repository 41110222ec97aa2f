#include "spw/pyramid.hpp"

namespace spw {

namespace {

ComplexGrid multiply(const ComplexGrid& spectrum, const RealGrid& mask) {
    ComplexGrid out(spectrum.size());
    for (std::size_t i = 0; i < out.area(); ++i) out[i] = spectrum[i] * mask[i];
    return out;
}

void accumulate(ComplexGrid& acc, const ComplexGrid& spectrum, const RealGrid& mask) {
    for (std::size_t i = 0; i < acc.area(); ++i) acc[i] += spectrum[i] * mask[i];
}

Size half(Size s) { return {s.height / 2, s.width / 2}; }

}  // namespace

PyramidDecomposition decompose(const RealGrid& image, const FilterBankSpec& spec) {
    const auto bank = cached_filter_bank(spec, image.size());

    PyramidDecomposition p;
    p.spec = spec;
    p.size = image.size();

    const ComplexGrid spectrum = forward_fft(image);
    p.high_pass = real_part(inverse_fft(multiply(spectrum, bank->highpass0)));

    ComplexGrid running = multiply(spectrum, bank->lowpass0);
    p.subbands.resize(spec.levels);
    for (int i = 0; i < spec.levels; ++i) {
        const LevelFilters& level = bank->levels[i];
        auto& bands = p.subbands[i];
        bands.reserve(spec.orientations);
        for (const RealGrid& mask : level.analytic) bands.push_back(inverse_fft(multiply(running, mask)));

        ComplexGrid low = multiply(running, level.lowpass);
        if (i + 1 < spec.levels)
            running = resample_spectrum(low, half(level.size));
        else
            p.low_pass = real_part(inverse_fft(low));
    }
    return p;
}

RealGrid reconstruct(const PyramidDecomposition& p) {
    validate(p.spec);
    const auto bank = cached_filter_bank(p.spec, p.size);
    const int levels = p.spec.levels;

    require_same_size(p.high_pass.size(), p.size, "high-pass residual");
    if (static_cast<int>(p.subbands.size()) != levels)
        throw ShapeError("decomposition has " + std::to_string(p.subbands.size()) +
                         " levels, spec says " + std::to_string(levels));
    for (int i = 0; i < levels; ++i) {
        if (static_cast<int>(p.subbands[i].size()) != p.spec.orientations)
            throw ShapeError("level " + std::to_string(i) + " has the wrong orientation count");
        for (const ComplexGrid& band : p.subbands[i])
            require_same_size(band.size(), p.level_size(i), "subband at level " + std::to_string(i));
    }
    require_same_size(p.low_pass.size(), p.level_size(levels - 1), "low-pass residual");

    // Coarse to fine: fold in the real part of each band through its real
    // filter, carry the low-pass path up by Fourier zero-padding.
    ComplexGrid running = multiply(forward_fft(p.low_pass), bank->levels[levels - 1].lowpass);
    for (int i = levels - 1; i >= 0; --i) {
        const LevelFilters& level = bank->levels[i];
        if (i < levels - 1) {
            const ComplexGrid up = resample_spectrum(running, level.size);
            running = multiply(up, level.lowpass);
        }
        for (int k = 0; k < p.spec.orientations; ++k)
            accumulate(running, forward_fft(real_part(p.subbands[i][k])), level.bands[k]);
    }

    ComplexGrid full = multiply(running, bank->lowpass0);
    accumulate(full, forward_fft(p.high_pass), bank->highpass0);
    return real_part(inverse_fft(full));
}

}  // namespace spw
