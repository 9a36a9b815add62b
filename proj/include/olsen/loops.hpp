#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "olsen/linalg.hpp"
#include "olsen/model.hpp"
#include "olsen/rootfind.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Explicit solution of the slow flow on the outer critical surface,
//   a' = -a b y,  b' = -eps_b a b y,  y' = kappa (2ab - 1) y,
// which conserves b - eps_b a and reduces to a scalar profile y(a).
// ---------------------------------------------------------------------------

/// Launch data of a large loop: (a, b, y) = (alpha1, beta1, 0).
struct LoopSpec {
    double alpha1 = 0.0;
    double beta1 = 0.0;
    double eps_b = 0.062;
    double kappa = 3.93;

    double K1() const { return beta1 - eps_b * alpha1; }

    void validate() const {
        if (!(alpha1 > 0.0) || !(beta1 > 0.0))
            throw std::domain_error("LoopSpec: launch point must be positive");
        if (!(K1() > 0.0)) throw std::domain_error("LoopSpec: requires beta1 - eps_b*alpha1 > 0");
        if (!(eps_b > 0.0) || !(kappa > 0.0))
            throw std::domain_error("LoopSpec: eps_b, kappa must be > 0");
    }
};

/// Loop profile
/// y(a) = kappa/K1 * [ 2(a-alpha1)(alpha1 eps_b - beta1)
///                     + ln( beta1 a / (alpha1 (beta1 + eps_b (a-alpha1))) ) ].
inline double loop_y(double a, const LoopSpec& sp) {
    sp.validate();
    if (!(a > 0.0)) throw std::domain_error("loop_y: requires a > 0");
    const double lin = sp.beta1 + sp.eps_b * (a - sp.alpha1);  // = b(a)
    const double arg = sp.beta1 * a / (sp.alpha1 * lin);
    if (!(arg > 0.0)) throw std::domain_error("loop_y: log argument not positive");
    return sp.kappa / sp.K1() *
           (2.0 * (a - sp.alpha1) * (sp.alpha1 * sp.eps_b - sp.beta1) + std::log(arg));
}

inline double loop_dyda(double a, const LoopSpec& sp) {
    const double b = sp.beta1 + sp.eps_b * (a - sp.alpha1);
    return sp.kappa * (1.0 - 2.0 * a * b) / (a * b);
}

/// Local extrema of the profile; both lie on {2ab = 1}. a_plus > 0 is the
/// global maximum, a_minus < 0 is outside the domain.
struct LoopExtrema {
    double a_plus;
    double a_minus;
};

inline LoopExtrema loop_extrema(const LoopSpec& sp) {
    sp.validate();
    const double k1 = sp.K1();
    const double s = std::sqrt(8.0 * sp.eps_b + 4.0 * k1 * k1);
    return {(-2.0 * k1 + s) / (4.0 * sp.eps_b), (-2.0 * k1 - s) / (4.0 * sp.eps_b)};
}

/// Second zero of the profile: the landing value alpha2 in (0, a_plus).
/// Requires 2*alpha1*beta1 > 1 so that y(a_plus) > 0 and the profile dips
/// to -inf as a -> 0+.
inline double landing_point(const LoopSpec& sp) {
    sp.validate();
    if (!(2.0 * sp.alpha1 * sp.beta1 > 1.0))
        throw std::domain_error("landing_point: requires 2*alpha1*beta1 > 1");
    const double ap = loop_extrema(sp).a_plus;
    const double fa_hi = loop_y(ap, sp);
    if (fa_hi == 0.0) return ap;  // tangency
    double lo = ap * 1e-6;
    double f_lo = loop_y(lo, sp);
    // widen toward 0 if the profile has not dipped below zero yet
    while (f_lo > 0.0 && lo > 1e-300) {
        lo *= 1e-3;
        f_lo = loop_y(lo, sp);
    }
    const double root =
        brent([&](double a) { return loop_y(a, sp); }, lo, ap, f_lo, fa_hi, 1e-15);
    return root;
}

/// Conserved carrier line b = eps_b a + beta1 - eps_b alpha1.
inline double invariant_line(const LoopSpec& sp, double a) { return sp.eps_b * a + sp.K1(); }

inline bool on_line(double a, double b, const LoopSpec& sp, double tol = 1e-8) {
    return std::fabs(b - invariant_line(sp, a)) <= tol;
}

/// (a, b, y) samples along the loop, geometrically spaced in a on
/// [alpha2, alpha1].
inline std::vector<Vec3> loop_polyline(const LoopSpec& sp, std::size_t n = 2000) {
    sp.validate();
    const double a2 = landing_point(sp);
    std::vector<Vec3> pts;
    pts.reserve(n);
    const double r = std::log(sp.alpha1 / a2);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n - 1);
        const double a = a2 * std::exp(r * f);
        double y = loop_y(a, sp);
        if (y < 0.0) y = 0.0;  // endpoint rounding
        pts.push_back({a, invariant_line(sp, a), y});
    }
    return pts;
}

/// The slow flow itself, (a, b, y) on the fast time scale; used by the
/// independent integration oracles.
struct LoopRhs {
    double eps_b, kappa;

    void operator()(const Vec3& v, Vec3& dv) const {
        const double aby = v[0] * v[1] * v[2];
        dv[0] = -aby;
        dv[1] = -eps_b * aby;
        dv[2] = kappa * (2.0 * v[0] * v[1] - 1.0) * v[2];
    }

    void jacobian(const Vec3& v, Mat3& j) const {
        const double a = v[0], b = v[1], y = v[2];
        j[0] = {-b * y, -a * y, -a * b};
        j[1] = {-eps_b * b * y, -eps_b * a * y, -eps_b * a * b};
        j[2] = {2.0 * kappa * b * y, 2.0 * kappa * a * y, kappa * (2.0 * a * b - 1.0)};
    }
};

}  // namespace olsen
