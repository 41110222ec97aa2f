#include "spw/filters.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace spw {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kLineTolerance = 1e-12;
}  // namespace

void validate(const FilterBankSpec& spec) {
    if (spec.orientations < 1)
        throw DomainError("orientation count must be >= 1, got " + std::to_string(spec.orientations));
    if (spec.levels < 1)
        throw DomainError("level count must be >= 1, got " + std::to_string(spec.levels));
    if (spec.levels > 30) throw DomainError("level count too large");
}

int size_multiple(const FilterBankSpec& spec) { return 1 << (spec.levels - 1); }

double radial_highpass(double r) {
    if (r <= kPi / 4.0) return 0.0;
    if (r >= kPi / 2.0) return 1.0;
    return std::cos(kPi / 2.0 * std::log2(2.0 * r / kPi));
}

double radial_lowpass(double r) {
    if (r <= kPi / 4.0) return 1.0;
    if (r >= kPi / 2.0) return 0.0;
    const double h = radial_highpass(r);
    return std::sqrt(std::max(0.0, 1.0 - h * h));
}

double angular_normalizer(int orientations) {
    const double k = orientations;
    const double log_alpha = (k - 1.0) * std::numbers::ln2 + std::lgamma(k) -
                             0.5 * (std::log(k) + std::lgamma(2.0 * k - 1.0));
    return std::exp(log_alpha);
}

double angular_gain(double theta, int k, int orientations) {
    const double c = std::abs(std::cos(theta - kPi * k / orientations));
    return angular_normalizer(orientations) * std::pow(c, orientations - 1);
}

double analytic_direction(int k, int orientations) {
    return std::fmod(kPi * k / orientations, kPi);
}

double analytic_gain(double r, double theta, int k, int orientations) {
    const double base = radial_highpass(r) * angular_gain(theta, k, orientations);
    if (r == 0.0) return base;
    const double side = std::cos(theta - analytic_direction(k, orientations));
    if (std::abs(side) <= kLineTolerance) return base;
    return side > 0.0 ? 2.0 * base : 0.0;
}

namespace {

LevelFilters sample_level(Size size, int orientations, double alpha) {
    LevelFilters level{size, RealGrid(size), {}, {}};
    level.bands.assign(orientations, RealGrid(size));
    level.analytic.assign(orientations, RealGrid(size));
    std::vector<double> directions(orientations);
    for (int k = 1; k <= orientations; ++k) directions[k - 1] = analytic_direction(k, orientations);

    for (int u = 0; u < size.height; ++u) {
        for (int v = 0; v < size.width; ++v) {
            const auto [r, theta] = polar_frequency(size, u, v);
            const double h = radial_highpass(r);
            level.lowpass(u, v) = radial_lowpass(r);
            for (int k = 1; k <= orientations; ++k) {
                const double c = std::abs(std::cos(theta - kPi * k / orientations));
                const double real = h * alpha * std::pow(c, orientations - 1);
                level.bands[k - 1](u, v) = real;
                double gain = 2.0;
                if (r == 0.0) {
                    gain = 1.0;
                } else {
                    const double side = std::cos(theta - directions[k - 1]);
                    if (std::abs(side) <= kLineTolerance)
                        gain = 1.0;
                    else if (side < 0.0)
                        gain = 0.0;
                }
                level.analytic[k - 1](u, v) = gain * real;
            }
        }
    }
    return level;
}

}  // namespace

FilterBank build_filter_bank(const FilterBankSpec& spec, int height, int width) {
    validate(spec);
    const int multiple = size_multiple(spec);
    if (height < 1 || width < 1 || height % multiple != 0 || width % multiple != 0)
        throw ShapeError("grid " + to_string({height, width}) + " is not divisible by " +
                         std::to_string(multiple) + " as required for " +
                         std::to_string(spec.levels) + " pyramid levels");

    FilterBank bank;
    bank.spec = spec;
    bank.size = {height, width};
    bank.alpha = angular_normalizer(spec.orientations);
    bank.highpass0 = RealGrid(bank.size);
    bank.lowpass0 = RealGrid(bank.size);
    for (int u = 0; u < height; ++u) {
        for (int v = 0; v < width; ++v) {
            const double r = polar_frequency(bank.size, u, v).radius;
            bank.highpass0(u, v) = radial_highpass(r / 2.0);
            bank.lowpass0(u, v) = radial_lowpass(r / 2.0);
        }
    }
    Size level_size = bank.size;
    for (int i = 0; i < spec.levels; ++i) {
        bank.levels.push_back(sample_level(level_size, spec.orientations, bank.alpha));
        level_size = {level_size.height / 2, level_size.width / 2};
    }
    return bank;
}

std::shared_ptr<const FilterBank> cached_filter_bank(const FilterBankSpec& spec, Size size) {
    using Key = std::tuple<int, int, int, int>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const FilterBank>> cache;

    const Key key{spec.orientations, spec.levels, size.height, size.width};
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    auto bank = std::make_shared<const FilterBank>(build_filter_bank(spec, size.height, size.width));
    cache.emplace(key, bank);
    return bank;
}

}  // namespace spw
