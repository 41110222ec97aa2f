#include "spw/grid.hpp"

#include <cmath>
#include <numbers>

namespace spw {

std::string to_string(Size s) {
    return std::to_string(s.height) + "x" + std::to_string(s.width);
}

void require_finite(const RealGrid& g, const std::string& what) {
    for (double x : g.values())
        if (!std::isfinite(x)) throw DomainError(what + " contains a non-finite value");
}

void require_finite(const ComplexGrid& g, const std::string& what) {
    for (const Complex& z : g.values())
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw DomainError(what + " contains a non-finite value");
}

void require_same_size(Size a, Size b, const std::string& what) {
    if (a != b) throw ShapeError(what + ": " + to_string(a) + " vs " + to_string(b));
}

PolarFrequency polar_frequency(Size size, int u, int v) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double wy = two_pi * wrap_index(u, size.height) / size.height;
    const double wx = two_pi * wrap_index(v, size.width) / size.width;
    return {std::hypot(wx, wy), std::atan2(wy, wx)};
}

RealGrid real_part(const ComplexGrid& g) {
    RealGrid out(g.size());
    for (std::size_t i = 0; i < g.area(); ++i) out[i] = g[i].real();
    return out;
}

RealGrid modulus(const ComplexGrid& g) {
    RealGrid out(g.size());
    for (std::size_t i = 0; i < g.area(); ++i) out[i] = std::abs(g[i]);
    return out;
}

ComplexGrid to_complex(const RealGrid& g) {
    ComplexGrid out(g.size());
    for (std::size_t i = 0; i < g.area(); ++i) out[i] = g[i];
    return out;
}

int mirror_index(int u, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    int m = u % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

PaddedGrid pad_to_multiple(const RealGrid& g, int factor) {
    if (factor < 1) throw DomainError("padding factor must be >= 1, got " + std::to_string(factor));
    const int h = (g.height() + factor - 1) / factor * factor;
    const int w = (g.width() + factor - 1) / factor * factor;
    RealGrid out(Size{h, w});
    for (int u = 0; u < h; ++u) {
        const int su = mirror_index(u, g.height());
        for (int v = 0; v < w; ++v) out(u, v) = g(su, mirror_index(v, g.width()));
    }
    return {std::move(out), g.size()};
}

}  // namespace spw
