#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spw/errors.hpp"

namespace spw {

using Complex = std::complex<double>;

struct Size {
    int height = 0;
    int width = 0;

    [[nodiscard]] std::size_t area() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    friend bool operator==(const Size&, const Size&) = default;
};

std::string to_string(Size s);

// Dense row-major 2-D grid. Value type; copies are deep.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;

    explicit Grid(Size size, T fill = T{}) : size_(checked(size)), data_(size_.area(), fill) {}

    Grid(Size size, std::vector<T> data) : size_(checked(size)), data_(std::move(data)) {
        if (data_.size() != size_.area())
            throw ShapeError("grid data length " + std::to_string(data_.size()) +
                             " does not match " + to_string(size_));
    }

    [[nodiscard]] Size size() const { return size_; }
    [[nodiscard]] int height() const { return size_.height; }
    [[nodiscard]] int width() const { return size_.width; }
    [[nodiscard]] std::size_t area() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    T& operator()(int u, int v) { return data_[index(u, v)]; }
    const T& operator()(int u, int v) const { return data_[index(u, v)]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] std::span<T> values() { return data_; }
    [[nodiscard]] std::span<const T> values() const { return data_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

private:
    static Size checked(Size s) {
        if (s.height < 1 || s.width < 1)
            throw ShapeError("grid dimensions must be positive, got " + to_string(s));
        return s;
    }
    [[nodiscard]] std::size_t index(int u, int v) const {
        return static_cast<std::size_t>(u) * static_cast<std::size_t>(size_.width) +
               static_cast<std::size_t>(v);
    }

    Size size_{};
    std::vector<T> data_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<Complex>;
// Integer class or cluster ids per pixel.
using LabelGrid = Grid<int>;

// Throws spw::DomainError naming `what` if any value is NaN or infinite.
void require_finite(const RealGrid& g, const std::string& what);
void require_finite(const ComplexGrid& g, const std::string& what);

void require_same_size(Size a, Size b, const std::string& what);

// ---------------------------------------------------------------------------
// Frequency coordinates.
//
// Bin u of an n-point axis carries the signed frequency index wrap(u) in
// (-n/2, n/2]; the Nyquist bin of an even axis is assigned to the positive
// side. The angular frequency is 2*pi*wrap(u)/n.

[[nodiscard]] constexpr int wrap_index(int u, int n) { return 2 * u <= n ? u : u - n; }

struct PolarFrequency {
    double radius;  // radians/sample, in [0, pi*sqrt(2)]
    double angle;   // radians, atan2(wy, wx), in (-pi, pi]
};

[[nodiscard]] PolarFrequency polar_frequency(Size size, int u, int v);

// ---------------------------------------------------------------------------
// Fourier transforms. Forward is unnormalized; inverse carries 1/(HW).

// Plans are made once per size and kind. `measure` spends planning time
// (seconds for large grids) for faster repeated transforms; it only affects
// plans created after the switch.
enum class FftPlanning { estimate, measure };
void set_fft_planning(FftPlanning mode);
[[nodiscard]] FftPlanning fft_planning();

[[nodiscard]] ComplexGrid forward_fft(const RealGrid& g);
[[nodiscard]] ComplexGrid forward_fft(const ComplexGrid& g);
[[nodiscard]] ComplexGrid inverse_fft(const ComplexGrid& s);

// Fourier-domain resize of an unnormalized spectrum to `target`, axis by axis.
// Growing embeds the spectrum around DC and zero-fills (the Nyquist bin of an
// even source axis is split evenly between +n/2 and -n/2); shrinking keeps
// the central bins and folds -n/2 onto +n/2 for an even target axis. The
// result is scaled by target area / source area so spatial amplitudes are
// preserved. Shrinking undoes growing for every input, up to rounding.
[[nodiscard]] ComplexGrid resample_spectrum(const ComplexGrid& spectrum, Size target);

// ---------------------------------------------------------------------------
// Elementwise helpers.

[[nodiscard]] RealGrid real_part(const ComplexGrid& g);
[[nodiscard]] RealGrid modulus(const ComplexGrid& g);
[[nodiscard]] ComplexGrid to_complex(const RealGrid& g);

// ---------------------------------------------------------------------------
// Padding and cropping.

struct PaddedGrid {
    RealGrid grid;
    Size original;
};

// Pads right and bottom so each dimension becomes the smallest multiple of
// `factor` not below the original. Padded samples reflect about the last
// row/column without repeating it (row h maps to h-2, h+1 to h-3, ...); the
// reflection is periodic when the pad exceeds the grid, and a single-row
// (or single-column) grid is replicated.
[[nodiscard]] PaddedGrid pad_to_multiple(const RealGrid& g, int factor);

// Index of the source sample that padded position `u` reads on an n-sample axis.
[[nodiscard]] int mirror_index(int u, int n);

template <typename T>
[[nodiscard]] Grid<T> crop_to(const Grid<T>& g, Size size) {
    if (size.height < 1 || size.width < 1 || size.height > g.height() || size.width > g.width())
        throw ShapeError("cannot crop " + to_string(g.size()) + " to " + to_string(size));
    Grid<T> out(size);
    for (int u = 0; u < size.height; ++u)
        for (int v = 0; v < size.width; ++v) out(u, v) = g(u, v);
    return out;
}

}  // namespace spw
