#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "olsen/model.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Outer critical surface y = x^2/(3ab) and the fold set {x = 0 = y}
// ---------------------------------------------------------------------------

/// Height of the attracting critical surface of the fast scaling at eps = 0.
inline double c0_y(double a, double b, double x, const DomainSpec& dom = {}) {
    if (!(a > dom.a_floor) || !(b > dom.b_floor))
        throw std::domain_error("c0_y: (a,b) below the domain floors");
    return x * x / (3.0 * a * b);
}

/// Derivative data of the fastest-layer field at (x,y) = (0,0), eps = 0:
/// F = 0, dF/dx = 0, d2F/dx2 = -2, dF/dy = 3ab. The nonvanishing y-derivative
/// is what makes the fold set non-degenerate.
struct FoldData {
    double F;
    double Fx;
    double Fxx;
    double Fy;
};

inline FoldData fold_data_L0(double a, double b) {
    return {0.0, 0.0, -2.0, 3.0 * a * b};
}

// ---------------------------------------------------------------------------
// Second-chart critical manifold
//
// The fast equations of the rescaled system vanish on a two-parameter
// family: given (b2, x2) the manifold point is
//   a2 = (x2^2 + x2(xi-b2) - delta) / (b2 (2x2^2 + x2(b2-xi) + delta))
//   y2 = (2x2^2 + x2(b2-xi) + delta) / 3
// Solving instead for x2 at fixed (a2, b2) gives the quadratic
//   (1-2a2b2) x2^2 + (1+a2b2)(xi-b2) x2 - (1+a2b2) delta = 0.
// ---------------------------------------------------------------------------

enum class CriticalBranch { S2aMinus, S2rMinus, S2aPlus, S2rPlus, FoldCurve, Degenerate };

inline const char* branch_name(CriticalBranch b) {
    switch (b) {
        case CriticalBranch::S2aMinus: return "S2a-";
        case CriticalBranch::S2rMinus: return "S2r-";
        case CriticalBranch::S2aPlus: return "S2a+";
        case CriticalBranch::S2rPlus: return "S2r+";
        case CriticalBranch::FoldCurve: return "fold";
        case CriticalBranch::Degenerate: return "degenerate";
    }
    return "?";
}

/// Ball around the doubly-degenerate point (a2,b2) = (1/(2xi), xi) excluded
/// from all branch classification.
struct ExclusionBall {
    double xi = 0.98;
    double radius = 0.05;

    bool contains(double a2, double b2) const {
        const double da = a2 - 1.0 / (2.0 * xi);
        const double db = b2 - xi;
        return da * da + db * db <= radius * radius;
    }
};

struct C20Point {
    double a2;
    double y2;
};

inline C20Point c20_point(double b2, double x2, const ScaledParams& sp) {
    const double q = 2.0 * x2 * x2 + x2 * (b2 - sp.xi) + sp.delta;
    const double den = b2 * q;
    if (std::fabs(den) < 1e-300)
        throw std::domain_error("c20_point: parametrization singular (denominator ~ 0)");
    return {(x2 * x2 + x2 * (sp.xi - b2) - sp.delta) / den, q / 3.0};
}

/// Coefficients of the x2-quadratic at fixed (a2, b2):
/// A x2^2 + B x2 - C with A = 1-2a2b2, B = (1+a2b2)(xi-b2), C = (1+a2b2)delta.
struct C20Quadratic {
    double A, B, C;
};

inline C20Quadratic c20_quadratic(double a2, double b2, const ScaledParams& sp) {
    const double ab = a2 * b2;
    return {1.0 - 2.0 * ab, (1.0 + ab) * (sp.xi - b2), (1.0 + ab) * sp.delta};
}

/// Both x2-roots at fixed (a2, b2), computed with the numerically stable
/// quadratic formula. `near` is the root continuous with x2 = 0 as
/// delta -> 0, `far` the other one (may be negative or absent).
struct C20Roots {
    double near = 0.0;
    double far = 0.0;
    bool far_valid = false;
};

inline C20Roots c20_roots(double a2, double b2, const ScaledParams& sp) {
    const auto [A, B, C] = c20_quadratic(a2, b2, sp);
    C20Roots r;
    if (std::fabs(A) < 1e-14) {
        if (B == 0.0) throw std::domain_error("c20_roots: degenerate quadratic");
        r.near = C / B;
        r.far_valid = false;
        return r;
    }
    const double disc = B * B + 4.0 * A * C;
    if (disc < 0.0) {
        r.far_valid = false;
        r.near = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const double s = std::sqrt(disc);
    const double q = -0.5 * (B + std::copysign(s, B));
    // q = -(B + sgn(B) s)/2; roots are q/A and -C/q
    r.near = (q != 0.0) ? -C / q : 0.0;
    r.far = q / A;
    r.far_valid = true;
    return r;
}

/// Fold curve of the second-chart manifold: x2 where the fast Jacobian has a
/// zero eigenvalue, x2 = (1+a2b2)(xi-b2) / (4a2b2-2).
inline double l2_fold(double a2, double b2, double xi) {
    const double den = 4.0 * a2 * b2 - 2.0;
    if (std::fabs(den) < 1e-12)
        throw std::domain_error("l2_fold: degenerate at 2*a2*b2 = 1");
    return (1.0 + a2 * b2) * (xi - b2) / den;
}

/// Leading delta-expansions of the two branches over b2 < xi:
///   attracting: x2 = delta/(xi-b2) + (1-2a2b2)/((1+a2b2)(b2-xi)^3) delta^2
///   repelling : x2 = (1+a2b2)(xi-b2)/(2a2b2-1) + delta/(b2-xi)
///                    + (2a2b2-1)/((1+a2b2)(b2-xi)^3) delta^2
/// y2 follows from the manifold formula; the attracting branch has
/// y2 = delta^2/((1+a2b2)(b2-xi)^2) + O(delta^3).
struct BranchExpansion {
    double att_x2;
    double att_y2;
    double rep_x2;
    double rep_y2;
    bool rep_valid;
};

inline BranchExpansion branch_expansions(double a2, double b2, double delta,
                                         const ScaledParams& sp) {
    if (!(b2 < sp.xi)) throw std::domain_error("branch_expansions: requires b2 < xi");
    const double ab = a2 * b2;
    const double d = sp.xi - b2;          // > 0
    const double one_ab = 1.0 + ab;
    BranchExpansion e{};

    const double c1 = 1.0 / d;
    const double c2 = -(1.0 - 2.0 * ab) / (one_ab * d * d * d);  // == (1-2ab)/((1+ab)(b2-xi)^3)
    e.att_x2 = delta * std::fma(delta, c2, c1);
    e.att_y2 = delta * delta / (one_ab * d * d);

    if (std::fabs(2.0 * ab - 1.0) > 1e-12) {
        const double r0 = one_ab * d / (2.0 * ab - 1.0);
        const double r1 = -1.0 / d;  // delta/(b2-xi)
        const double r2 = -(2.0 * ab - 1.0) / (one_ab * d * d * d);
        e.rep_x2 = r0 + delta * std::fma(delta, r2, r1);
        const double q = 2.0 * e.rep_x2 * e.rep_x2 + e.rep_x2 * (b2 - sp.xi) + delta;
        e.rep_y2 = q / 3.0;
        e.rep_valid = true;
    }
    return e;
}

/// 2x2 Jacobian of the fast (x2, y2) subsystem (the 1/eps^2 prefactor is
/// dropped; it does not affect eigenvalue signs).
inline Mat2 fast_jacobian(double a2, double b2, double x2, const ScaledParams& sp) {
    return {{{-2.0 * x2 + (b2 - sp.xi), 3.0 * a2 * b2},
             {2.0 * sp.kappa * x2, -sp.kappa * (1.0 + a2 * b2)}}};
}

inline std::array<std::complex<double>, 2> fast_jacobian_eigs(double a2, double b2, double x2,
                                                              const ScaledParams& sp) {
    return eig2(fast_jacobian(a2, b2, x2, sp));
}

/// Branch tag of a point (a2, b2, x2) that lies on the second-chart critical
/// manifold (within `on_tol` of the defining quadratic, measured after
/// normalization). Points inside the exclusion ball are Degenerate.
inline CriticalBranch classify_point(double a2, double b2, double x2, const ScaledParams& sp,
                                     const ExclusionBall& ball = {}, double on_tol = 1e-8) {
    ExclusionBall bl = ball;
    bl.xi = sp.xi;
    if (bl.contains(a2, b2)) return CriticalBranch::Degenerate;

    const auto [A, B, C] = c20_quadratic(a2, b2, sp);
    const double res = A * x2 * x2 + B * x2 - C;
    const double scale = std::fabs(A) * x2 * x2 + std::fabs(B) * x2 + std::fabs(C) + 1e-30;
    if (std::fabs(res) / scale > on_tol && std::fabs(res) > on_tol)
        throw std::domain_error("classify_point: point is not on the critical manifold");

    const double l2 = l2_fold(a2, b2, sp.xi);
    if (std::fabs(x2 - l2) <= on_tol) return CriticalBranch::FoldCurve;
    if (b2 < sp.xi) return x2 > l2 ? CriticalBranch::S2rMinus : CriticalBranch::S2aMinus;
    return x2 > l2 ? CriticalBranch::S2aPlus : CriticalBranch::S2rPlus;
}

}  // namespace olsen
