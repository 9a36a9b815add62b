#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace olsen {

struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Brent's bracketing root finder. Requires fa*fb <= 0.
template <class F>
double brent(const F& f, double a, double b, double fa, double fb,
             double xtol = 1e-13, double ftol = 0.0, int maxit = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw BracketError("brent: root not bracketed");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < maxit; ++it) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * 2.220446049250313e-16 * std::fabs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= ftol) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            // inverse quadratic / secant
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::fmin(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : std::copysign(tol1, xm);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    return b;
}

template <class F>
double brent(const F& f, double a, double b, double xtol = 1e-13, int maxit = 200) {
    return brent(f, a, b, f(a), f(b), xtol, 0.0, maxit);
}

}  // namespace olsen
