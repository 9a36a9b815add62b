#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "olsen/linalg.hpp"
#include "olsen/manifolds.hpp"
#include "olsen/model.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Blow-up of the fold set {x = 0 = y, eps = 0}: a sphere is inserted via
//   x = r*xb, y = r^2*yb, eps = r*eb,  (xb, yb, eb) on the upper half-sphere.
// Chart 1 fixes xb = 1 (entry/exit), chart 2 fixes eb = 1 (classical chart,
// which is just the rescaled system).
// ---------------------------------------------------------------------------

struct Chart1State {
    double a1, b1, r1, y1, eps1;
};

/// Chart-1 coordinates of a fast-scaling state with x > 0:
/// r1 = x, y1 = y/x^2, eps1 = eps/x.
inline Chart1State to_chart1(const Vec4& f, double eps) {
    const double x = f[2];
    if (!(x > 0.0)) throw std::domain_error("to_chart1: requires x > 0");
    return {f[0], f[1], x, f[3] / (x * x), eps / x};
}

/// Blow-down of a chart-1 point: x = r1, y = r1^2*y1, eps = r1*eps1.
inline std::pair<Vec4, double> from_chart1(const Chart1State& c) {
    if (c.r1 < 0.0) throw std::domain_error("from_chart1: requires r1 >= 0");
    return {{c.a1, c.b1, c.r1, c.r1 * c.r1 * c.y1}, c.r1 * c.eps1};
}

/// Transition map chart 1 -> chart 2 (valid for eps1 > 0):
/// x2 = 1/eps1, y2 = y1/eps1^2, r2 = r1*eps1.
struct Chart2Point {
    Vec4 state;  // (a2, b2, x2, y2)
    double r2;   // = eps
};

inline Chart2Point chart12(const Chart1State& c) {
    if (!(c.eps1 > 0.0))
        throw std::domain_error("chart12: charts do not overlap at eps1 = 0 (equator)");
    const double ie = 1.0 / c.eps1;
    return {{c.a1, c.b1, ie, c.y1 * ie * ie}, c.r1 * c.eps1};
}

inline Chart1State chart21(const Vec4& s, double r2) {
    const double x2 = s[2];
    if (!(x2 > 0.0)) throw std::domain_error("chart21: requires x2 > 0");
    return {s[0], s[1], r2 * x2, s[3] / (x2 * x2), 1.0 / x2};
}

// ---------------------------------------------------------------------------
// Chart-1 vector field. State ordering: (a1, b1, r1, y1, eps1).
// The common factor G = -1 + eps1*(b1-xi) + 3*a1*b1*y1 + eps1^2*delta drives
// r1' = r1*G and eps1' = -eps1*G, so r1*eps1 (= eps) is conserved.
// ---------------------------------------------------------------------------

inline double chart1_common_factor(const Vec<5>& c, const ScaledParams& sp) {
    const double b1 = c[1], y1 = c[3], e1 = c[4];
    return -1.0 + e1 * (b1 - sp.xi) + 3.0 * c[0] * b1 * y1 + e1 * e1 * sp.delta;
}

/// Desingularized chart-1 field (the overall r1 factor divided out).
struct Chart1Rhs {
    ScaledParams sp;

    void operator()(const Vec<5>& c, Vec<5>& dc) const {
        const double a1 = c[0], b1 = c[1], r1 = c[2], y1 = c[3], e1 = c[4];
        const double G = chart1_common_factor(c, sp);
        dc[0] = e1 * r1 * r1 * (e1 * e1 * (sp.mu - sp.alpha * a1) - a1 * b1 * y1);
        dc[1] = e1 * r1 * r1 * sp.eps_b * (e1 * e1 - e1 * b1 - a1 * b1 * y1);
        dc[2] = r1 * G;
        dc[3] = sp.kappa * e1 * (1.0 - y1 * (1.0 + a1 * b1)) - 2.0 * y1 * G;
        dc[4] = -e1 * G;
    }
};

/// Chart-1 field before desingularization (an extra factor r1 everywhere);
/// used only by the blow-down conjugacy checks.
struct Chart1RawRhs {
    ScaledParams sp;

    void operator()(const Vec<5>& c, Vec<5>& dc) const {
        Chart1Rhs{sp}(c, dc);
        for (auto& v : dc) v *= c[2];
    }
};

/// Flow in an invariant leaf {eps1 = 0, a1, b1 fixed}: planar (r1, y1) system
/// r1' = r1*(3ab*y1 - 1), y1' = -2*y1*(3ab*y1 - 1).
struct Chart1LeafRY {
    double a1, b1;

    void operator()(const Vec2& v, Vec2& dv) const {
        const double w = 3.0 * a1 * b1 * v[1] - 1.0;
        dv[0] = v[0] * w;
        dv[1] = -2.0 * v[1] * w;
    }
};

/// Flow in an invariant leaf {r1 = 0, a1, b1 fixed} (requires delta(0) = 0):
/// planar (y1, eps1) system.
struct Chart1LeafYE {
    double a1, b1;
    ScaledParams sp;  // delta is ignored (leaf requires delta -> 0)

    void operator()(const Vec2& v, Vec2& dv) const {
        const double y1 = v[0], e1 = v[1];
        const double G = -1.0 + e1 * (b1 - sp.xi) + 3.0 * a1 * b1 * y1;
        dv[0] = sp.kappa * e1 * (1.0 - y1 * (1.0 + a1 * b1)) - 2.0 * y1 * G;
        dv[1] = -e1 * G;
    }
};

// ---------------------------------------------------------------------------
// Equilibria of the (y1, eps1) leaf flow and their classification
// ---------------------------------------------------------------------------

enum class EquilibriumKind { UnstableNode, CenterStable, Saddle, Sink, Absent };

inline const char* equilibrium_kind_name(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::UnstableNode: return "unstable-node";
        case EquilibriumKind::CenterStable: return "center-stable";
        case EquilibriumKind::Saddle: return "saddle";
        case EquilibriumKind::Sink: return "sink";
        case EquilibriumKind::Absent: return "absent";
    }
    return "?";
}

struct Equilibrium {
    double y1 = 0.0;
    double eps1 = 0.0;
    EquilibriumKind kind = EquilibriumKind::Absent;
    std::array<std::complex<double>, 2> eigs{};
};

/// The up-to-three equilibria of the leaf flow at (a1, b1):
///   p1 = (0, 0)                unstable node, eigenvalues {1, 2}
///   p2 = (1/(3ab), 0)          center-stable, eigenvalues {-2, 0}
///   p3 = (1/(1+ab), (1-2ab)/((1+ab)(b1-xi)))   saddle (b1 < xi) or sink
///        (b1 > xi); absent from the half-sphere when (xi-b1)(2ab-1) <= 0
///        or b1 = xi.
/// Kinds are assigned from a numeric Jacobian (sign tolerance 1e-9).
inline std::array<Equilibrium, 3> equilibria_chart1(double a1, double b1,
                                                    const ScaledParams& sp) {
    const double ab = a1 * b1;
    if (std::fabs(2.0 * ab - 1.0) < 1e-12 && std::fabs(b1 - sp.xi) < 1e-12)
        throw std::domain_error("equilibria_chart1: doubly degenerate point (2ab=1 and b1=xi)");

    const Chart1LeafYE leaf{a1, b1, sp};
    auto eig_at = [&](double y1, double e1) {
        const Mat2 j = numeric_jacobian<2>(
            [&](const Vec2& v, Vec2& dv) { leaf(v, dv); }, Vec2{y1, e1}, 1e-7);
        return eig2(j);
    };
    constexpr double sgn_tol = 1e-9;
    auto kind_of = [&](const std::array<std::complex<double>, 2>& ev) {
        const double r0 = ev[0].real(), r1 = ev[1].real();
        const bool z0 = std::fabs(r0) < sgn_tol, z1 = std::fabs(r1) < sgn_tol;
        if (z0 || z1) return EquilibriumKind::CenterStable;
        if (r0 > 0.0 && r1 > 0.0) return EquilibriumKind::UnstableNode;
        if (r0 < 0.0 && r1 < 0.0) return EquilibriumKind::Sink;
        return EquilibriumKind::Saddle;
    };

    std::array<Equilibrium, 3> out;
    out[0] = {0.0, 0.0, EquilibriumKind::Absent, eig_at(0.0, 0.0)};
    out[0].kind = kind_of(out[0].eigs);

    out[1] = {1.0 / (3.0 * ab), 0.0, EquilibriumKind::Absent, {}};
    out[1].eigs = eig_at(out[1].y1, 0.0);
    out[1].kind = kind_of(out[1].eigs);

    if ((sp.xi - b1) * (2.0 * ab - 1.0) > 0.0 && std::fabs(b1 - sp.xi) > 1e-12) {
        Equilibrium p3;
        p3.y1 = 1.0 / (1.0 + ab);
        p3.eps1 = (1.0 - 2.0 * ab) / ((1.0 + ab) * (b1 - sp.xi));
        p3.eigs = eig_at(p3.y1, p3.eps1);
        p3.kind = kind_of(p3.eigs);
        out[2] = p3;
    } else {
        out[2] = {};
        out[2].kind = EquilibriumKind::Absent;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Center manifold at p2 and the flow on it
// ---------------------------------------------------------------------------

/// Quadratic coefficient of the center-manifold graph at p2.
inline double m1_c22(double a1, double b1, const ScaledParams& sp) {
    const double ab = a1 * b1;
    return sp.kappa * (1.0 + 4.0 * ab) / (24.0 * ab) *
           (2.0 * (b1 - sp.xi) + sp.kappa * (1.0 - 2.0 * ab));
}

/// Graph of the center manifold through second order in eps1. Along the
/// stated orders the graph carries no r1-dependence, so r1 only labels the
/// base point.
inline double m1_graph(double /*r1*/, double eps1, double a1, double b1,
                       const ScaledParams& sp) {
    const double ab = a1 * b1;
    const double c1 = (2.0 * (sp.xi - b1) + sp.kappa * (2.0 * ab - 1.0)) / (6.0 * ab);
    return 1.0 / (3.0 * ab) + eps1 * c1 + m1_c22(a1, b1, sp) * eps1 * eps1;
}

/// Truncated center flow: r1' = r1*w, eps1' = -eps1*w with
/// w = kappa*(2ab-1)/2 * eps1 + 3ab*c22*eps1^2.
inline Vec2 m1_flow(double r1, double eps1, double a1, double b1, const ScaledParams& sp) {
    const double ab = a1 * b1;
    const double w = 0.5 * sp.kappa * (2.0 * ab - 1.0) * eps1 +
                     3.0 * ab * m1_c22(a1, b1, sp) * eps1 * eps1;
    return {r1 * w, -eps1 * w};
}

// ---------------------------------------------------------------------------
// Approach/departure cases for the sphere passage
// ---------------------------------------------------------------------------

enum class ApproachCase { C1, C2, C3, C4, Degenerate };

inline const char* approach_case_name(ApproachCase c) {
    switch (c) {
        case ApproachCase::C1: return "C1";
        case ApproachCase::C2: return "C2";
        case ApproachCase::C3: return "C3";
        case ApproachCase::C4: return "C4";
        case ApproachCase::Degenerate: return "degenerate";
    }
    return "?";
}

/// Case classification by the signs of (2ab - 1) and (b - xi):
///   C1: 2ab < 1, b < xi   (flow climbs the sphere: entry to the slow drift)
///   C2: 2ab < 1, b > xi
///   C3: 2ab > 1, b < xi
///   C4: 2ab > 1, b > xi   (flow leaves the sphere: exit to the outer flow),
///       extended to b = xi when 2a*xi > 1.
/// Points inside the exclusion ball, or with 2ab = 1 (away from b = xi),
/// are Degenerate.
inline ApproachCase classify_approach(double a, double b, const ScaledParams& sp,
                                      const ExclusionBall& ball = {}, double tol = 1e-12) {
    ExclusionBall bl = ball;
    bl.xi = sp.xi;
    if (bl.contains(a, b)) return ApproachCase::Degenerate;
    const double s_ab = 2.0 * a * b - 1.0;
    const double s_b = b - sp.xi;
    if (std::fabs(s_b) <= tol) return s_ab > tol ? ApproachCase::C4 : ApproachCase::Degenerate;
    if (std::fabs(s_ab) <= tol) return ApproachCase::Degenerate;
    if (s_ab < 0.0) return s_b < 0.0 ? ApproachCase::C1 : ApproachCase::C2;
    return s_b < 0.0 ? ApproachCase::C3 : ApproachCase::C4;
}

}  // namespace olsen
