#pragma once

#include <array>
#include <cmath>

namespace kwcdf {

using Vec3 = std::array<double, 3>;

/// Axis-aligned spatial domain. Only the first `dim` axes are active.
struct Box {
    Vec3 lo{0.0, 0.0, 0.0};
    Vec3 hi{0.0, 0.0, 0.0};
    int dim = 1;

    double extent(int axis) const { return hi[axis] - lo[axis]; }

    bool contains(const Vec3& x, double rel_tol = 1e-12) const {
        for (int i = 0; i < dim; ++i) {
            const double tol = rel_tol * extent(i);
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        }
        return true;
    }
};

inline Vec3 vec1(double x) { return {x, 0.0, 0.0}; }

}  // namespace kwcdf
