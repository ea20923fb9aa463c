#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "finitype/geometry.hpp"

namespace finitype {

// Samples on a uniform box grid. Point i along axis a sits at
// lo[a] + i * (hi[a] - lo[a]) / shape[a]; the far face is excluded, so a
// periodic grid tiles its box exactly. Values are row-major with the last
// axis fastest.
struct GridFunction {
    std::vector<int> shape;
    Box box;
    bool periodic = false;
    bool complex_valued = false;
    std::vector<std::complex<double>> values;

    GridFunction() = default;
    GridFunction(std::vector<int> shape, Box box, bool periodic);

    int dims() const { return static_cast<int>(shape.size()); }
    std::size_t size() const { return values.size(); }
    double spacing(int axis) const { return (box.hi[axis] - box.lo[axis]) / shape[axis]; }
    double cell_volume() const;
    Vec point(std::size_t flat) const;
    std::vector<int> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::vector<int>& idx) const;

    // Fills values from f(x); marks the grid real-valued.
    template <class F>
    void fill(F f) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(point(i));
        complex_valued = false;
    }

    // (sum |v|^p * cell volume)^(1/p); p = infinity gives the max modulus.
    double lp_norm(double p) const;
};

// Periodic grid of side N^dims covering [-L/2, L/2)^dims.
GridFunction periodic_grid(int dims, int n, double side);

// Binary layout, little-endian: char[8] "FTGRID01", int64 dims, int64 shape[dims],
// float64 lo[dims], float64 hi[dims], uint8 periodic, uint8 complex, then the
// samples as float64 (re only, or re/im pairs) in row-major order.
std::vector<std::uint8_t> grid_to_binary(const GridFunction& g);
GridFunction grid_from_binary(const std::vector<std::uint8_t>& bytes);
// Columns x0..x{d-1}, re, im.
std::string grid_to_csv(const GridFunction& g);

// Unnormalized forward transform (sign -1) and inverse transform scaled by
// 1/N, in place, over the grid's shape. Plans are FFTW_ESTIMATE and cached;
// execution is safe from several threads.
void fft_forward(std::vector<std::complex<double>>& data, const std::vector<int>& shape);
void fft_inverse(std::vector<std::complex<double>>& data, const std::vector<int>& shape);

// Angular frequency of DFT bin `flat` for a grid: 2 pi m / L with m the
// unaliased representative in [-N/2, N/2).
Vec lattice_frequency(const GridFunction& g, std::size_t flat);
// Smallest per-axis Nyquist frequency pi N / L.
double nyquist(const GridFunction& g);

// 1-D interpolation weights on nodes floor + first .. floor + first + count - 1
// for fractional position `frac`: order 1 is linear, order 3 cubic Lagrange.
struct InterpStencil {
    int first = 0;
    int count = 0;
    double w[4] = {0.0, 0.0, 0.0, 0.0};
};
InterpStencil interp_stencil(double frac, int order);

// Tensor-product interpolant of f at x. Periodic grids wrap; otherwise nodes
// outside the grid read as zero and *zero_extended is set.
std::complex<double> interpolate(const GridFunction& f, const Vec& x, int order, bool* zero_extended = nullptr);

}  // namespace finitype
