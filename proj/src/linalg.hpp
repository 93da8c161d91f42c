#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "errors.hpp"

namespace precess {

// Solves M x = b for small n (<= 6) in place, partial pivoting.
template <size_t N>
inline std::array<double, N> solve_small(std::array<std::array<double, N>, N> m,
                                         std::array<double, N> b) {
    for (size_t col = 0; col < N; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < N; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        if (m[piv][col] == 0.0) throw error(errc::domain, "singular linear system");
        if (piv != col) {
            std::swap(m[piv], m[col]);
            std::swap(b[piv], b[col]);
        }
        for (size_t r = col + 1; r < N; ++r) {
            double f = m[r][col] / m[col][col];
            for (size_t c = col; c < N; ++c) m[r][c] -= f * m[col][c];
            b[r] -= f * b[col];
        }
    }
    std::array<double, N> x{};
    for (size_t i = N; i-- > 0;) {
        double s = b[i];
        for (size_t c = i + 1; c < N; ++c) s -= m[i][c] * x[c];
        x[i] = s / m[i][i];
    }
    return x;
}

// Determinant of an n x n matrix (n <= 4) by LU with partial pivoting.
inline double det_small(double m[4][4], int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        if (m[piv][col] == 0.0) return 0.0;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(m[piv][c], m[col][c]);
            det = -det;
        }
        det *= m[col][col];
        for (int r = col + 1; r < n; ++r) {
            double f = m[r][col] / m[col][col];
            for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return det;
}

// Eigen-decomposition of a symmetric 2x2 [[a,b],[b,c]]: values ascending,
// columns of (v1,v2) are unit eigenvectors.
inline void eig_sym2(double a, double b, double c, double& d1, double& d2,
                     double v1[2], double v2[2]) {
    double tr = a + c;
    double diff = a - c;
    double disc = std::sqrt(diff * diff + 4.0 * b * b);
    d1 = 0.5 * (tr - disc);
    d2 = 0.5 * (tr + disc);
    if (std::fabs(b) < 1e-300) {
        if (a <= c) {
            v1[0] = 1.0; v1[1] = 0.0;
            v2[0] = 0.0; v2[1] = 1.0;
        } else {
            v1[0] = 0.0; v1[1] = 1.0;
            v2[0] = 1.0; v2[1] = 0.0;
        }
        return;
    }
    // (a - d) x + b y = 0
    double x1 = -b, y1 = a - d1;
    double n1 = std::hypot(x1, y1);
    v1[0] = x1 / n1; v1[1] = y1 / n1;
    v2[0] = -v1[1]; v2[1] = v1[0];
}

inline double dot3(const double a[3], const double b[3]) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline void cross3(const double a[3], const double b[3], double out[3]) {
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
}

inline double norm3(const double a[3]) { return std::sqrt(dot3(a, a)); }

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return dot3(a.data(), b.data());
}

inline std::array<double, 3> cross3(const std::array<double, 3>& a,
                                    const std::array<double, 3>& b) {
    std::array<double, 3> out;
    cross3(a.data(), b.data(), out.data());
    return out;
}

inline double norm3(const std::array<double, 3>& a) { return norm3(a.data()); }

} // namespace precess
