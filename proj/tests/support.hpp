#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the code under test except for the grid container itself.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include "spw/grid.hpp"

namespace spw::test {

inline constexpr double kPi = std::numbers::pi;

inline RealGrid random_grid(Size size, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    RealGrid g(size);
    for (double& x : g.values()) x = d(rng);
    return g;
}

inline LabelGrid random_labels(Size size, int classes, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, classes - 1);
    LabelGrid g(size);
    for (int& x : g.values()) x = d(rng);
    return g;
}

inline double l2(const RealGrid& g) {
    double s = 0.0;
    for (double x : g.values()) s += x * x;
    return std::sqrt(s);
}

inline double relative_l2(const RealGrid& got, const RealGrid& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < want.area(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num / den);
}

inline double max_abs_diff(const RealGrid& a, const RealGrid& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.area(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Textbook O(N^2) DFT, unnormalized, same sign convention as FFTW forward.
inline ComplexGrid naive_dft(const ComplexGrid& g) {
    const int h = g.height(), w = g.width();
    ComplexGrid out(g.size());
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v) {
            Complex acc{};
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const double phase = -2.0 * kPi * (static_cast<double>(u) * y / h + static_cast<double>(v) * x / w);
                    acc += g(y, x) * Complex(std::cos(phase), std::sin(phase));
                }
            out(u, v) = acc;
        }
    return out;
}

// cos(omega * (x cos phi + y sin phi)) with x along columns, y along rows.
inline RealGrid oriented_sinusoid(Size size, double omega, double phi, double amplitude = 1.0) {
    RealGrid g(size);
    for (int y = 0; y < size.height; ++y)
        for (int x = 0; x < size.width; ++x)
            g(y, x) = amplitude * std::cos(omega * (x * std::cos(phi) + y * std::sin(phi)));
    return g;
}

// Periodic sinc (Dirichlet) kernel of n-point zero-padding interpolation from
// an n-sample axis to m samples: value at fine position t (in fine samples)
// of a unit impulse at coarse sample 0. Closed form of
// (1/n) sum over the kept frequencies of exp(2 pi i f t / m), with the Nyquist
// bin of even n split evenly.
inline double dirichlet(int n, int m, double t) {
    const double x = t / m;  // position in coarse periods
    double acc = 0.0;
    const int half = n / 2;
    for (int f = -half; f <= half; ++f) {
        double gain = 1.0;
        if (n % 2 == 0 && std::abs(f) == half) gain = 0.5;
        acc += gain * std::cos(2.0 * kPi * f * x);
    }
    return acc / n;
}

// Euclidean distance from every pixel to the nearest label boundary pixel (a
// pixel with a 4-neighbour of different value), by exhaustive search.
inline RealGrid boundary_distance(const LabelGrid& labels) {
    const int h = labels.height(), w = labels.width();
    std::vector<std::pair<int, int>> boundary;
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v) {
            const int c = labels(u, v);
            const bool edge = (u > 0 && labels(u - 1, v) != c) || (u + 1 < h && labels(u + 1, v) != c) ||
                              (v > 0 && labels(u, v - 1) != c) || (v + 1 < w && labels(u, v + 1) != c);
            if (edge) boundary.emplace_back(u, v);
        }
    RealGrid d(labels.size(), 1e300);
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v)
            for (const auto& [bu, bv] : boundary)
                d(u, v) = std::min(d(u, v), std::hypot(double(u - bu), double(v - bv)));
    return d;
}

inline LabelGrid disk(Size size, double cy, double cx, double radius) {
    LabelGrid g(size);
    for (int u = 0; u < size.height; ++u)
        for (int v = 0; v < size.width; ++v) g(u, v) = std::hypot(u - cy, v - cx) <= radius ? 1 : 0;
    return g;
}

// Variation of information straight from the definition: joint and marginal
// distributions accumulated pixel by pixel into maps, then
// H(A) + H(B) - 2 I(A; B).
inline double brute_vi(const LabelGrid& a, const LabelGrid& b) {
    const double n = static_cast<double>(a.area());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> pa, pb;
    for (std::size_t i = 0; i < a.area(); ++i) {
        joint[{a[i], b[i]}] += 1.0 / n;
        pa[a[i]] += 1.0 / n;
        pb[b[i]] += 1.0 / n;
    }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (const auto& [k, p] : pa) ha -= p * std::log(p);
    for (const auto& [k, p] : pb) hb -= p * std::log(p);
    for (const auto& [k, p] : joint) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
    return ha + hb - 2.0 * mi;
}

// Adjusted Rand index by enumerating every unordered pixel pair.
inline double brute_ari(const LabelGrid& a, const LabelGrid& b) {
    const std::size_t n = a.area();
    double both = 0.0, in_a = 0.0, in_b = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            both += sa && sb;
            in_a += sa;
            in_b += sb;
        }
    const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
    const double expected = in_a * in_b / pairs;
    const double max_index = 0.5 * (in_a + in_b);
    if (max_index == expected) return 1.0;
    return (both - expected) / (max_index - expected);
}

}  // namespace spw::test
