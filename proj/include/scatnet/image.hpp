#pragma once

#include <cstddef>
#include <vector>

#include "scatnet/errors.hpp"

namespace scatnet {

// Dense row-major 2-D raster of doubles. rows/cols are ints on purpose:
// every image in this pipeline is small and signed arithmetic keeps the
// boundary-reflection index math readable.
struct ImagePlane {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    ImagePlane() = default;
    ImagePlane(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
        if (r < 0 || c < 0) throw ShapeError("ImagePlane: negative dimensions");
    }

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
    std::size_t size() const { return v.size(); }
    bool same_shape(const ImagePlane& o) const { return rows == o.rows && cols == o.cols; }
};

struct ImageRgb {
    ImagePlane r, g, b;

    ImageRgb() = default;
    ImageRgb(int rows, int cols) : r(rows, cols), g(rows, cols), b(rows, cols) {}

    int rows() const { return r.rows; }
    int cols() const { return r.cols; }
    const ImagePlane& channel(int i) const { return i == 0 ? r : (i == 1 ? g : b); }
    ImagePlane& channel(int i) { return i == 0 ? r : (i == 1 ? g : b); }
};

// Half-sample symmetric reflection of an arbitrary integer index into [0, n).
// The extension has period 2n: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ... x0 |
inline int reflect_index(int i, int n) {
    int p = 2 * n;
    int m = i % p;
    if (m < 0) m += p;
    return m < n ? m : p - 1 - m;
}

} // namespace scatnet
