#include "doctest.h"
#include "support.hpp"

#include "spw/pyramid.hpp"

using namespace spw;
using namespace spw::test;

namespace {

double coefficient_energy(const PyramidDecomposition& p) {
    double e = 0.0;
    for (double x : p.high_pass.values()) e += x * x;
    for (const auto& level : p.subbands)
        for (const ComplexGrid& b : level)
            for (const Complex& z : b.values()) e += std::norm(z);
    for (double x : p.low_pass.values()) e += x * x;
    return e;
}

double band_energy(const ComplexGrid& b) {
    double e = 0.0;
    for (const Complex& z : b.values()) e += std::norm(z);
    return e;
}

}  // namespace

TEST_SUITE("pyramid") {

TEST_CASE("512 input yields the 1 + 16 + 1 ladder") {
    std::mt19937_64 rng(1);
    const PyramidDecomposition p = decompose(random_grid(Size{512, 512}, rng), FilterBankSpec{4, 4});
    CHECK(p.high_pass.size() == Size{512, 512});
    REQUIRE(p.subbands.size() == 4);
    const int sides[] = {512, 256, 128, 64};
    for (int i = 0; i < 4; ++i) {
        REQUIRE(p.subbands[i].size() == 4);
        for (const ComplexGrid& b : p.subbands[i]) CHECK(b.size() == Size{sides[i], sides[i]});
        CHECK(p.level_size(i) == Size{sides[i], sides[i]});
    }
    CHECK(p.low_pass.size() == Size{64, 64});
}

TEST_CASE("constant image goes entirely to the low-pass residual") {
    const double c = 3.25;
    const PyramidDecomposition p = decompose(RealGrid(Size{64, 64}, c), FilterBankSpec{4, 4});
    const double bound = 1e-12 * c * 64 * 64;
    for (double x : p.high_pass.values()) CHECK(std::abs(x) <= bound);
    for (const auto& level : p.subbands)
        for (const ComplexGrid& b : level)
            for (const Complex& z : b.values()) CHECK(std::abs(z) <= bound);
    for (double x : p.low_pass.values()) CHECK(x == doctest::Approx(c).epsilon(1e-12));
    const RealGrid back = reconstruct(p);
    for (double x : back.values()) CHECK(std::abs(x - c) <= 1e-10);
}

TEST_CASE("divisibility is enforced") {
    CHECK_THROWS_AS((void)decompose(RealGrid(Size{60, 64}), FilterBankSpec{4, 4}), ShapeError);
}

TEST_CASE("perfect reconstruction on random images") {
    std::mt19937_64 rng(2);
    for (Size s : {Size{64, 64}, Size{128, 128}, Size{40, 96}, Size{256, 256}}) {
        const RealGrid g = random_grid(s, rng);
        CHECK(relative_l2(reconstruct(decompose(g, FilterBankSpec{4, 4})), g) <= 1e-6);
    }
    for (FilterBankSpec spec : {FilterBankSpec{1, 1}, FilterBankSpec{2, 3}, FilterBankSpec{6, 2}}) {
        const RealGrid g = random_grid(Size{32, 32}, rng);
        CHECK(relative_l2(reconstruct(decompose(g, spec)), g) <= 1e-10);
    }
}

TEST_CASE("all-zero decomposition reconstructs to zero") {
    const PyramidDecomposition p = decompose(RealGrid(Size{32, 32}), FilterBankSpec{4, 4});
    for (const auto tmp = reconstruct(p); double x : tmp.values()) CHECK(x == 0.0);
}

TEST_CASE("reconstruct rejects a broken ladder") {
    std::mt19937_64 rng(3);
    PyramidDecomposition p = decompose(random_grid(Size{32, 32}, rng), FilterBankSpec{4, 4});
    PyramidDecomposition missing_level = p;
    missing_level.subbands.pop_back();
    CHECK_THROWS_AS((void)reconstruct(missing_level), ShapeError);
    p.subbands[1][2] = ComplexGrid(Size{8, 8});
    CHECK_THROWS_AS((void)reconstruct(p), ShapeError);
}

TEST_CASE("decompose is linear") {
    std::mt19937_64 rng(4);
    const RealGrid a = random_grid(Size{64, 32}, rng), b = random_grid(Size{64, 32}, rng);
    const double ca = 0.7, cb = -2.1;
    RealGrid mix(a.size());
    for (std::size_t i = 0; i < a.area(); ++i) mix[i] = ca * a[i] + cb * b[i];
    const FilterBankSpec spec{4, 4};
    const PyramidDecomposition pa = decompose(a, spec), pb = decompose(b, spec), pm = decompose(mix, spec);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.area(); ++i) {
        num += std::pow(pm.high_pass[i] - (ca * pa.high_pass[i] + cb * pb.high_pass[i]), 2);
        den += std::pow(pm.high_pass[i], 2);
    }
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k)
            for (std::size_t i = 0; i < pm.subbands[l][k].area(); ++i) {
                num += std::norm(pm.subbands[l][k][i] - (ca * pa.subbands[l][k][i] + cb * pb.subbands[l][k][i]));
                den += std::norm(pm.subbands[l][k][i]);
            }
    for (std::size_t i = 0; i < pm.low_pass.area(); ++i) {
        num += std::pow(pm.low_pass[i] - (ca * pa.low_pass[i] + cb * pb.low_pass[i]), 2);
        den += std::pow(pm.low_pass[i], 2);
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
}

TEST_CASE("level-1 band magnitudes follow circular shifts") {
    std::mt19937_64 rng(5);
    const Size s{32, 48};
    const RealGrid g = random_grid(s, rng);
    const int dy = 5, dx = -7;
    RealGrid shifted(s);
    for (int u = 0; u < s.height; ++u)
        for (int v = 0; v < s.width; ++v)
            shifted((u + dy + s.height) % s.height, (v + dx + s.width) % s.width) = g(u, v);
    const PyramidDecomposition p = decompose(g, FilterBankSpec{4, 2});
    const PyramidDecomposition q = decompose(shifted, FilterBankSpec{4, 2});
    for (int k = 0; k < 4; ++k)
        for (int u = 0; u < s.height; ++u)
            for (int v = 0; v < s.width; ++v) {
                const double want = std::abs(p.subbands[0][k](u, v));
                const double got = std::abs(q.subbands[0][k]((u + dy + s.height) % s.height, (v + dx + s.width) % s.width));
                CHECK(std::abs(got - want) <= 1e-10);
            }
}

TEST_CASE("real part of a band equals the real-filter subband") {
    std::mt19937_64 rng(6);
    const RealGrid g = random_grid(Size{32, 32}, rng);
    const PyramidDecomposition p = decompose(g, FilterBankSpec{4, 1});
    const auto bank = cached_filter_bank(FilterBankSpec{4, 1}, Size{32, 32});
    const ComplexGrid spectrum = forward_fft(g);
    for (int k = 0; k < 4; ++k) {
        ComplexGrid filtered(spectrum.size());
        for (std::size_t i = 0; i < spectrum.area(); ++i)
            filtered[i] = spectrum[i] * bank->lowpass0[i] * bank->levels[0].bands[k][i];
        const RealGrid want = real_part(inverse_fft(filtered));
        CHECK(max_abs_diff(real_part(p.subbands[0][k]), want) <= 1e-12);
    }
}

TEST_CASE("coefficient energy of broadband input lies within [1, 4] times the input") {
    std::mt19937_64 rng(7);
    for (Size s : {Size{64, 64}, Size{128, 128}}) {
        const RealGrid g = random_grid(s, rng);
        const double input = std::pow(l2(g), 2);
        const double coeffs = coefficient_energy(decompose(g, FilterBankSpec{4, 4}));
        CHECK(coeffs >= input);
        CHECK(coeffs <= 4 * input);
    }
}

TEST_CASE("oriented sinusoid lands in the matching level-1 band") {
    // omega = 3 pi / 8 sits in the level-1 transition band; on a 64-point
    // grid the sinusoid's axis-aligned directions fall on exact bins.
    const Size s{64, 64};
    for (int k_star : {2, 4}) {
        const double phi = kPi * k_star / 4;
        const PyramidDecomposition p = decompose(oriented_sinusoid(s, 3 * kPi / 8, phi), FilterBankSpec{4, 4});
        double total = 0.0;
        for (const auto& level : p.subbands)
            for (const ComplexGrid& b : level) total += band_energy(b);
        const double dominant = band_energy(p.subbands[0][k_star - 1]);
        for (int k = 1; k <= 4; ++k)
            if (k != k_star) CHECK(band_energy(p.subbands[0][k - 1]) < dominant);
        // Closed form: level 1 keeps H^2 of the energy, the rest moves to
        // level 2 at 3 pi / 4 (pure pass band) on a grid with a quarter of the
        // pixels. Within a level the K = 4 angular shares are cos^6 based,
        // 0.8 / 0.1 / 0 / 0.1.
        const double h = std::cos(kPi / 2 * std::log2(0.75));
        const double want = 0.8 * h * h / (h * h + (1 - h * h) / 4);
        CHECK(dominant / total == doctest::Approx(want).epsilon(1e-9));
    }
}

}
