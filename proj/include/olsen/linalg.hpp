#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace olsen {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Vec4 = Vec<4>;
using Mat2 = Mat<2>;
using Mat3 = Mat<3>;
using Mat4 = Mat<4>;

/// In-place LU factorization with partial pivoting for the small dense
/// systems that appear in the implicit integrator and in Jacobian tests.
template <std::size_t N>
struct Lu {
    Mat<N> a{};
    std::array<int, N> piv{};
    bool singular = false;
};

template <std::size_t N>
Lu<N> lu_factor(Mat<N> m) {
    Lu<N> f;
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t p = col;
        double big = std::fabs(m[col][col]);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double v = std::fabs(m[r][col]);
            if (v > big) {
                big = v;
                p = r;
            }
        }
        f.piv[col] = static_cast<int>(p);
        if (p != col) std::swap(m[p], m[col]);
        if (m[col][col] == 0.0) {
            f.singular = true;
            f.a = m;
            return f;
        }
        const double inv = 1.0 / m[col][col];
        for (std::size_t r = col + 1; r < N; ++r) {
            const double factor = m[r][col] * inv;
            m[r][col] = factor;
            for (std::size_t c = col + 1; c < N; ++c) m[r][c] -= factor * m[col][c];
        }
    }
    f.a = m;
    return f;
}

template <std::size_t N>
Vec<N> lu_solve(const Lu<N>& f, Vec<N> b) {
    if (f.singular) throw std::runtime_error("lu_solve: singular matrix");
    for (std::size_t i = 0; i < N; ++i) {
        const auto p = static_cast<std::size_t>(f.piv[i]);
        if (p != i) std::swap(b[p], b[i]);
        for (std::size_t j = 0; j < i; ++j) b[i] -= f.a[i][j] * b[j];
    }
    for (std::size_t i = N; i-- > 0;) {
        for (std::size_t j = i + 1; j < N; ++j) b[i] -= f.a[i][j] * b[j];
        b[i] /= f.a[i][i];
    }
    return b;
}

/// Eigenvalues of a real 2x2 matrix via the characteristic quadratic.
inline std::array<std::complex<double>, 2> eig2(const Mat2& m) {
    const double tr = m[0][0] + m[1][1];
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return {std::complex<double>(tr / 2.0 + s, 0.0), std::complex<double>(tr / 2.0 - s, 0.0)};
    }
    const double s = std::sqrt(-disc);
    return {std::complex<double>(tr / 2.0, s), std::complex<double>(tr / 2.0, -s)};
}

/// Roots of x^3 + b x^2 + c x + d = 0.
inline std::array<std::complex<double>, 3> cubic_roots(double b, double c, double d) {
    // depressed cubic t^3 + p t + q with x = t - b/3
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const double shift = -b / 3.0;
    const double half_q = q / 2.0;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;

    std::array<std::complex<double>, 3> out;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-half_q + s);
        const double v = std::cbrt(-half_q - s);
        out[0] = {u + v + shift, 0.0};
        const double re = -(u + v) / 2.0 + shift;
        const double im = (u - v) * std::sqrt(3.0) / 2.0;
        out[1] = {re, im};
        out[2] = {re, -im};
    } else if (p == 0.0) {
        // triple root
        const double r = std::cbrt(-q) + shift;
        out[0] = out[1] = out[2] = {r, 0.0};
    } else {
        // three real roots
        const double m = 2.0 * std::sqrt(-third_p);
        double arg = 3.0 * q / (p * m);
        arg = std::fmin(1.0, std::fmax(-1.0, arg));
        const double theta = std::acos(arg) / 3.0;
        constexpr double two_pi_3 = 2.0943951023931953;
        for (int k = 0; k < 3; ++k)
            out[static_cast<std::size_t>(k)] = {m * std::cos(theta - two_pi_3 * k) + shift, 0.0};
    }
    return out;
}

/// Eigenvalues of a real 3x3 matrix via its characteristic polynomial.
inline std::array<std::complex<double>, 3> eig3(const Mat3& m) {
    const double tr = m[0][0] + m[1][1] + m[2][2];
    const double m00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double m11 = m[0][0] * m[2][2] - m[0][2] * m[2][0];
    const double m22 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // lambda^3 - tr lambda^2 + (sum principal minors) lambda - det
    return cubic_roots(-tr, m00 + m11 + m22, -det);
}

/// Central-difference Jacobian of a vector field, for classification tests.
template <std::size_t N, class F>
Mat<N> numeric_jacobian(const F& f, const Vec<N>& y, double h = 1e-6) {
    Mat<N> j{};
    for (std::size_t c = 0; c < N; ++c) {
        Vec<N> yp = y, ym = y;
        const double step = h * std::fmax(1.0, std::fabs(y[c]));
        yp[c] += step;
        ym[c] -= step;
        Vec<N> fp{}, fm{};
        f(yp, fp);
        f(ym, fm);
        for (std::size_t r = 0; r < N; ++r) j[r][c] = (fp[r] - fm[r]) / (2.0 * step);
    }
    return j;
}

}  // namespace olsen
