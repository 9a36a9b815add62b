#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "olsen/integrate.hpp"
#include "olsen/model.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Local analysis near the transcritical line {b2 = xi, x2 = 0 = y2}.
// ---------------------------------------------------------------------------

/// Coefficients of the reduced fast equation on the local center manifold,
///   eps^2 x2' = c2 x2^2 + c1(b2) x2 + c0 + h.o.t.
struct TcCoefficients {
    double a0 = 0.0;
    double c2 = 0.0;
    double c0 = 0.0;
    double c1_offset = 0.0;  // c1(b2) = b2 - xi + c1_offset
    double xi = 0.0;

    double c1(double b2) const { return b2 - xi + c1_offset; }
};

inline TcCoefficients tc_coefficients(double a0, const ScaledParams& sp) {
    const double ax = a0 * sp.xi;
    if (std::fabs(2.0 * ax - 1.0) < 1e-12)
        throw std::domain_error("tc_coefficients: degenerate at a0 = 1/(2*xi)");
    TcCoefficients c;
    c.a0 = a0;
    c.xi = sp.xi;
    const double one_ax = 1.0 + ax;
    c.c2 = (2.0 * ax - 1.0) / one_ax;
    c.c1_offset = -sp.delta / (sp.kappa * one_ax * one_ax);
    c.c0 = sp.delta + sp.delta * sp.delta / (sp.kappa * sp.kappa * one_ax * one_ax * one_ax);
    return c;
}

/// Quadratic center-manifold graph y2 = h(x2; delta) at base point a0,
/// coefficients fixed by the invariance equation of the frozen fast
/// subsystem:
///   h = x2^2/(1+a0 xi) - 2 delta x2/(kappa (1+a0 xi)^2)
///       + 2 delta^2/(kappa^2 (1+a0 xi)^3).
inline double m2_graph(double x2, double delta, double a0, const ScaledParams& sp) {
    const double w = 1.0 + a0 * sp.xi;
    return x2 * x2 / w - 2.0 * delta * x2 / (sp.kappa * w * w) +
           2.0 * delta * delta / (sp.kappa * sp.kappa * w * w * w);
}

/// Reduced fast scalar field f(x2, b_tilde; eps_hat) in the stretched slow
/// variable b_tilde = b2/eps_b, with delta expressed through
/// delta_hat = delta/eps^2 and eps_hat = eps^2.
inline double tc_fast_field(double x2, double b_tilde, double a0, const ScaledParams& sp,
                            double eps_hat, double delta_hat) {
    const double w = 1.0 + a0 * sp.xi;
    const double c2 = (2.0 * a0 * sp.xi - 1.0) / w;
    const double delta = eps_hat * delta_hat;
    const double c1 = -delta / (sp.kappa * w * w) + sp.eps_b * b_tilde - sp.xi;
    const double c0 = delta + delta * delta / (sp.kappa * sp.kappa * w * w * w);
    return c2 * x2 * x2 + c1 * x2 + c0;
}

/// Transversality/genericity data of the reduced field at the transcritical
/// point p_tc = (x2, b_tilde) = (0, xi/eps_b), evaluated by finite
/// differences at eps_hat = 0.
struct TcGenericity {
    double f = 0.0;
    double fx = 0.0;
    double fb = 0.0;
    double fxx = 0.0;
    double fxb = 0.0;
    double fbb = 0.0;
    double det_hessian = 0.0;
    bool f_zero = false;
    bool fx_zero = false;
    bool fb_zero = false;
    bool hessian_negative = false;
    bool fxx_nonzero = false;

    bool all_hold() const { return f_zero && fx_zero && fb_zero && hessian_negative && fxx_nonzero; }
};

inline TcGenericity check_tc_genericity(double a0, const ScaledParams& sp) {
    if (!(a0 > 1.0 / (2.0 * sp.xi)))
        throw std::domain_error("check_tc_genericity: requires a0 > 1/(2*xi)");
    const double xb = sp.xi / sp.eps_b;
    auto f = [&](double x, double b) { return tc_fast_field(x, b, a0, sp, 0.0, 0.0); };
    const double hx = 1e-5, hb = 1e-5;

    TcGenericity g;
    g.f = f(0.0, xb);
    g.fx = (f(hx, xb) - f(-hx, xb)) / (2.0 * hx);
    g.fb = (f(0.0, xb + hb) - f(0.0, xb - hb)) / (2.0 * hb);
    g.fxx = (f(hx, xb) - 2.0 * g.f + f(-hx, xb)) / (hx * hx);
    g.fbb = (f(0.0, xb + hb) - 2.0 * g.f + f(0.0, xb - hb)) / (hb * hb);
    g.fxb = (f(hx, xb + hb) - f(hx, xb - hb) - f(-hx, xb + hb) + f(-hx, xb - hb)) /
            (4.0 * hx * hb);
    g.det_hessian = g.fxx * g.fbb - g.fxb * g.fxb;
    g.f_zero = std::fabs(g.f) < 1e-12;
    g.fx_zero = std::fabs(g.fx) < 1e-9;
    g.fb_zero = std::fabs(g.fb) < 1e-9;
    g.hessian_negative = g.det_hessian < -1e-12;
    g.fxx_nonzero = std::fabs(g.fxx) > 1e-9;
    return g;
}

// ---------------------------------------------------------------------------
// Passage classification
// ---------------------------------------------------------------------------

/// Discriminating constant of the transcritical passage:
/// lambda = 1 + delta_hat/(2 eps_b) * (2 a0 xi - 1)/(1 + a0 xi)  (>= 1).
inline double lambda_tc(double a0, const ScaledParams& sp, double delta_hat) {
    if (delta_hat < 0.0) throw std::domain_error("lambda_tc: delta_hat must be >= 0");
    if (!(a0 > 1.0 / (2.0 * sp.xi)))
        throw std::domain_error("lambda_tc: requires a0 > 1/(2*xi)");
    return 1.0 + delta_hat / (2.0 * sp.eps_b) * (2.0 * a0 * sp.xi - 1.0) / (1.0 + a0 * sp.xi);
}

enum class TcCase { Canard, Jump };

struct TcClassification {
    TcCase kind = TcCase::Canard;
    double lambda = 1.0;
    double delta_hat = 0.0;
};

/// Classify the passage for the declared scaling of delta against eps^2.
/// delta_hat = delta/eps^2 must stay O(1); values above 10 are outside the
/// regime this analysis covers. "Exponentially small" is operationalized as
/// delta < eps^2 * exp(-1/(2 eps^2)).
inline TcClassification classify_passage(double a0, const ScaledParams& sp) {
    const double e2 = sp.eps2();
    const double dh = sp.delta / e2;
    if (dh > 10.0)
        throw std::domain_error("classify_passage: delta >> eps^2 is out of the covered regime");
    TcClassification c;
    c.delta_hat = dh;
    c.lambda = lambda_tc(a0, sp, dh);
    c.kind = (sp.delta < e2 * std::exp(-1.0 / (2.0 * e2))) ? TcCase::Canard : TcCase::Jump;
    return c;
}

// ---------------------------------------------------------------------------
// Linearization of the fast subsystem around the invariant plane
// ---------------------------------------------------------------------------

/// Eigen-structure of A_fs = [[b2-xi, 3 a2 b2], [0, -(1+a2 b2)]]:
/// lambda1 = b2 - xi (critical), lambda2 = -(1 + a2 b2).
struct FastLinearization {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Vec2 v1{1.0, 0.0};
    Vec2 v2{0.0, 1.0};
    bool e1_holds = false;  // 0 >= lambda1 > lambda2
    bool e2_holds = false;  // 0 < lambda1 < |lambda2|
};

inline FastLinearization fast_linearization(double a2, double b2, const ScaledParams& sp) {
    FastLinearization r;
    r.lambda1 = b2 - sp.xi;
    r.lambda2 = -(1.0 + a2 * b2);
    const double den = 1.0 + b2 + a2 * b2 - sp.xi;
    if (std::fabs(den) < 1e-12)
        throw std::domain_error("fast_linearization: eigenvector formula singular");
    r.v1 = {1.0, 0.0};
    r.v2 = {-3.0 * a2 * b2 / den, 1.0};
    r.e1_holds = (b2 <= sp.xi) && (den > 0.0);
    r.e2_holds = (b2 > sp.xi) && (b2 - 1.0 - a2 * b2 < sp.xi);
    return r;
}

// ---------------------------------------------------------------------------
// Way-in/way-out function and the delayed exit
// ---------------------------------------------------------------------------

/// Accumulated critical eigenvalue along the slow drift started at
/// (*, beta0): Pi(s) = eps_b (s-s0)^2/2 + (beta0 - xi)(s-s0).
inline double pi_wiwo(double s, double s0, double beta0, const ScaledParams& sp) {
    const double d = s - s0;
    return 0.5 * sp.eps_b * d * d + (beta0 - sp.xi) * d;
}

/// Positive root of Pi: s1 = s0 + 2 (xi - beta0)/eps_b.
inline double pi_root(double s0, double beta0, const ScaledParams& sp) {
    if (!(beta0 < sp.xi)) throw std::domain_error("pi_root: requires beta0 < xi (no delay)");
    return s0 + 2.0 * (sp.xi - beta0) / sp.eps_b;
}

struct DelayResult {
    double entry_a = 0.0, entry_b = 0.0;
    double exit_a = 0.0, exit_b = 0.0, exit_y = 0.0;
    double s1 = 0.0;  // exit time relative to entry
    TcCase kind = TcCase::Canard;
};

namespace detail {
inline void check_entry(double alpha0, double beta0, const ScaledParams& sp) {
    if (!(beta0 < sp.xi) || !(2.0 * alpha0 * beta0 < 1.0))
        throw std::domain_error("delayed exit: entry must satisfy 2*a*b < 1 and b < xi");
}
}  // namespace detail

/// Exit point under maximal delay: the drift runs from beta0 to 2*xi - beta0
/// while a relaxes toward mu/alpha with the doubled exponent.
inline DelayResult canard_exit(double alpha0, double beta0, const ScaledParams& sp) {
    detail::check_entry(alpha0, beta0, sp);
    DelayResult r;
    r.kind = TcCase::Canard;
    r.entry_a = alpha0;
    r.entry_b = beta0;
    r.s1 = 2.0 * (sp.xi - beta0) / sp.eps_b;
    const double A = sp.mu / sp.alpha;
    r.exit_a = A + std::exp(-sp.alpha * r.s1) * (alpha0 - A);
    r.exit_b = 2.0 * sp.xi - beta0;
    r.exit_y = 0.0;
    return r;
}

/// Exit point without delay: the drift stops at b2 = xi.
inline DelayResult jump_exit(double alpha0, double beta0, const ScaledParams& sp) {
    detail::check_entry(alpha0, beta0, sp);
    DelayResult r;
    r.kind = TcCase::Jump;
    r.entry_a = alpha0;
    r.entry_b = beta0;
    r.s1 = (sp.xi - beta0) / sp.eps_b;
    const double A = sp.mu / sp.alpha;
    r.exit_a = A + std::exp(-sp.alpha * r.s1) * (alpha0 - A);
    r.exit_b = sp.xi;
    r.exit_y = 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Full-system delay experiment
// ---------------------------------------------------------------------------

/// Integrate the full stiff system from a point close to the attracting
/// plane and report the b2-value at which the trajectory leaves the tube
/// {x2 < rho}. Used to verify convergence of the exit point to the
/// predicted delayed (or jump) exit as eps decreases.
inline double tube_exit_b(const ScaledParams& sp, double alpha0, double beta0, double x2_init,
                          double rho = 1e-2, IntegratorConfig cfg = {}) {
    cfg.method = Method::StiffImplicit;
    cfg.clamp_tiny_negative = true;
    const ScaledRhs rhs{sp};
    Vec4 y0{alpha0, beta0, x2_init, 0.0};
    SectionSpec<4> tube;
    tube.g = [rho](const Vec4& y) { return y[2] - rho; };
    tube.direction = +1;
    const double horizon = (2.2 * (sp.xi - beta0) + 0.5) / sp.eps_b + 10.0;
    const auto hit = integrate_to_section(rhs, y0, 0.0, tube, cfg, horizon);
    return hit.state[1];
}

}  // namespace olsen
