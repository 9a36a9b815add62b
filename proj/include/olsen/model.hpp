#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "olsen/linalg.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Reaction-rate constants of the four-species peroxidase-oxidase model,
/// in the original (dimensional) formulation.
struct OlsenParams {
    double k1 = 0.41;
    double k2 = 250.0;
    double k3 = 0.035;
    double k4 = 20.0;
    double k5 = 5.35;
    double k6 = 1e-5;
    double k7 = 0.8;
    double k_minus7 = 0.1;
    double k8 = 0.825;

    void validate() const {
        const double v[] = {k1, k2, k3, k4, k5, k6, k7, k_minus7, k8};
        for (double x : v)
            if (!(x > 0.0)) throw std::domain_error("OlsenParams: all rate constants must be > 0");
    }
};

/// Dimensionless parameters of the rescaled system. `eps` is stored (not its
/// square) so repeated square roots are avoided; use eps2() where the
/// equations want the squared value.
struct ScaledParams {
    double mu = 1.3;
    double alpha = 0.37;
    double eps_b = 0.062;
    double eps = 0.05;
    double xi = 0.98;
    double delta = 0.0;  // delta = 0 is admissible (exact invariant plane)
    double kappa = 3.93;

    double eps2() const { return eps * eps; }

    void validate() const {
        const double v[] = {mu, alpha, eps_b, eps, xi, kappa};
        for (double x : v)
            if (!(x > 0.0)) throw std::domain_error("ScaledParams: parameters must be > 0");
        if (delta < 0.0) throw std::domain_error("ScaledParams: delta must be >= 0");
        if (!(eps < 1.0)) throw std::domain_error("ScaledParams: eps must be < 1");
    }
};

/// Region floors: phase-space sets are always intersected with
/// {a > a_floor, b > b_floor, x >= 0, y >= 0}.
struct DomainSpec {
    double a_floor = 0.01;
    double b_floor = 0.1;
};

// ---------------------------------------------------------------------------
// Parameter transformation and regime
// ---------------------------------------------------------------------------

/// Scale factors linking the dimensional and dimensionless coordinates:
/// A = cA*a2, B = cB*b2, X = cX*x2, Y = cY*y2, T = cT*s. These are the
/// factors under which the dimensional model maps exactly onto the rescaled
/// one (with the conjugate kappa below); note cX carries a square root.
struct MilikScales {
    double cA, cB, cX, cY, cT;
};

inline MilikScales milik_scales(const OlsenParams& p) {
    const double root = std::sqrt(2.0 * p.k2 * p.k8);
    MilikScales s{};
    s.cA = p.k1 * p.k5 / (p.k3 * root);
    s.cB = root / p.k1;
    s.cX = std::sqrt(p.k8 / (2.0 * p.k2));
    s.cY = p.k8 / p.k5;
    s.cT = p.k1 * p.k5 / (p.k3 * p.k8 * root);
    return s;
}

/// The kappa value under which milik_scales conjugates the dimensional model
/// to the rescaled equations: kappa = k5/sqrt(2 k2 k8). The closed-form
/// parameter table uses the reciprocal; transform_params follows that table
/// (it is the published contract), so exact transport checks must use this
/// value instead.
inline double conjugate_kappa(const OlsenParams& p) {
    return p.k5 / std::sqrt(2.0 * p.k2 * p.k8);
}

/// Closed-form map from rate constants to the dimensionless parameter set.
inline ScaledParams transform_params(const OlsenParams& p) {
    p.validate();
    const double root = std::sqrt(2.0 * p.k2 * p.k8);
    ScaledParams sp{};
    sp.mu = p.k7 / p.k8;
    sp.alpha = p.k1 * p.k5 * p.k_minus7 / (p.k3 * p.k8 * root);
    sp.eps_b = p.k1 * p.k1 * p.k5 / (2.0 * p.k2 * p.k3 * p.k8);
    sp.kappa = root / p.k5;
    sp.eps = std::sqrt(p.k3 * p.k8 / (p.k1 * p.k5));
    sp.xi = p.k4 / root;
    sp.delta = p.k6 / p.k8;
    return sp;
}

enum class Regime { EpsBMuchSmaller, Comparable, EpsBMuchLarger };

struct RegimeInfo {
    Regime tag;
    double ratio;  // eps_b / eps^2
};

inline RegimeInfo classify_regime(const ScaledParams& sp, double threshold = 3.0) {
    if (!(threshold > 1.0)) throw std::domain_error("classify_regime: threshold must be > 1");
    RegimeInfo r{};
    r.ratio = sp.eps_b / sp.eps2();
    if (r.ratio > threshold)
        r.tag = Regime::EpsBMuchLarger;
    else if (r.ratio < 1.0 / threshold)
        r.tag = Regime::EpsBMuchSmaller;
    else
        r.tag = Regime::Comparable;
    return r;
}

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::EpsBMuchSmaller: return "eps_b << eps^2";
        case Regime::Comparable: return "eps_b ~ eps^2";
        case Regime::EpsBMuchLarger: return "eps_b >> eps^2";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// State conventions
//
// All three systems use 4-component states:
//   original : (A, B, X, Y)     time T
//   scaled   : (a2, b2, x2, y2) time s
//   fast     : (a, b, x, y)     time tau = s / eps^2
// ---------------------------------------------------------------------------

/// x = eps*x2, y = eps^2*y2; a and b are unchanged.
inline Vec4 scale_state(const Vec4& s, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("scale_state: eps must be > 0");
    return {s[0], s[1], eps * s[2], eps * eps * s[3]};
}

inline Vec4 unscale_state(const Vec4& f, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("unscale_state: eps must be > 0");
    return {f[0], f[1], f[2] / eps, f[3] / (eps * eps)};
}

inline Vec4 state_to_original(const Vec4& s, const MilikScales& sc) {
    return {sc.cA * s[0], sc.cB * s[1], sc.cX * s[2], sc.cY * s[3]};
}

inline Vec4 state_from_original(const Vec4& o, const MilikScales& sc) {
    return {o[0] / sc.cA, o[1] / sc.cB, o[2] / sc.cX, o[3] / sc.cY};
}

// ---------------------------------------------------------------------------
// Vector fields (with hand-coded Jacobians for the implicit integrator)
// ---------------------------------------------------------------------------

/// Original four-species model, time scale T.
struct OriginalRhs {
    OlsenParams p;

    void operator()(const Vec4& y, Vec4& dy) const {
        const double A = y[0], B = y[1], X = y[2], Y = y[3];
        const double abY = p.k3 * A * B * Y;
        dy[0] = -abY + p.k7 - p.k_minus7 * A;
        dy[1] = -abY - p.k1 * B * X + p.k8;
        dy[2] = p.k1 * B * X - 2.0 * p.k2 * X * X + 3.0 * abY - p.k4 * X + p.k6;
        dy[3] = -abY + 2.0 * p.k2 * X * X - p.k5 * Y;
    }

    void jacobian(const Vec4& y, Mat4& j) const {
        const double A = y[0], B = y[1], X = y[2], Y = y[3];
        j[0] = {-p.k3 * B * Y - p.k_minus7, -p.k3 * A * Y, 0.0, -p.k3 * A * B};
        j[1] = {-p.k3 * B * Y, -p.k3 * A * Y - p.k1 * X, -p.k1 * B, -p.k3 * A * B};
        j[2] = {3.0 * p.k3 * B * Y, p.k1 * X + 3.0 * p.k3 * A * Y,
                p.k1 * B - 4.0 * p.k2 * X - p.k4, 3.0 * p.k3 * A * B};
        j[3] = {-p.k3 * B * Y, -p.k3 * A * Y, 4.0 * p.k2 * X, -p.k3 * A * B - p.k5};
    }
};

/// Rescaled system, time scale s. The x2/y2 equations carry the stiff
/// 1/eps^2 factor.
struct ScaledRhs {
    ScaledParams sp;

    void operator()(const Vec4& y, Vec4& dy) const {
        const double a2 = y[0], b2 = y[1], x2 = y[2], y2 = y[3];
        const double aby = a2 * b2 * y2;
        const double ie2 = 1.0 / sp.eps2();
        dy[0] = sp.mu - sp.alpha * a2 - aby;
        dy[1] = sp.eps_b * (1.0 - b2 * x2 - aby);
        dy[2] = ie2 * (b2 * x2 - x2 * x2 + 3.0 * aby - sp.xi * x2 + sp.delta);
        dy[3] = ie2 * sp.kappa * (x2 * x2 - y2 - aby);
    }

    void jacobian(const Vec4& y, Mat4& j) const {
        const double a2 = y[0], b2 = y[1], x2 = y[2], y2 = y[3];
        const double ie2 = 1.0 / sp.eps2();
        j[0] = {-sp.alpha - b2 * y2, -a2 * y2, 0.0, -a2 * b2};
        j[1] = {-sp.eps_b * b2 * y2, sp.eps_b * (-x2 - a2 * y2), -sp.eps_b * b2,
                -sp.eps_b * a2 * b2};
        j[2] = {ie2 * 3.0 * b2 * y2, ie2 * (x2 + 3.0 * a2 * y2),
                ie2 * (b2 - 2.0 * x2 - sp.xi), ie2 * 3.0 * a2 * b2};
        j[3] = {-ie2 * sp.kappa * b2 * y2, -ie2 * sp.kappa * a2 * y2, ie2 * sp.kappa * 2.0 * x2,
                -ie2 * sp.kappa * (1.0 + a2 * b2)};
    }
};

/// Fast rescaling (x = eps*x2, y = eps^2*y2), time scale tau. Requires
/// eps > 0; the eps = 0 layer is exposed separately via layer_field.
struct FastRhs {
    ScaledParams sp;

    void operator()(const Vec4& y, Vec4& dy) const {
        const double a = y[0], b = y[1], x = y[2], yy = y[3];
        const double e = sp.eps;
        const double aby = a * b * yy;
        dy[0] = e * e * (sp.mu - sp.alpha * a) - aby;
        dy[1] = e * (sp.eps_b * e - sp.eps_b * b * x) - sp.eps_b * aby;
        dy[2] = (-x * x + e * (b - sp.xi) * x + 3.0 * aby + e * e * sp.delta) / e;
        dy[3] = sp.kappa * (x * x - yy - aby);
    }

    void jacobian(const Vec4& y, Mat4& j) const {
        const double a = y[0], b = y[1], x = y[2], yy = y[3];
        const double e = sp.eps;
        j[0] = {-e * e * sp.alpha - b * yy, -a * yy, 0.0, -a * b};
        j[1] = {-sp.eps_b * b * yy, -e * sp.eps_b * x - sp.eps_b * a * yy, -e * sp.eps_b * b,
                -sp.eps_b * a * b};
        j[2] = {3.0 * b * yy / e, x + 3.0 * a * yy / e, (b - sp.xi) - 2.0 * x / e,
                3.0 * a * b / e};
        j[3] = {-sp.kappa * b * yy, -sp.kappa * a * yy, 2.0 * sp.kappa * x,
                -sp.kappa * (1.0 + a * b)};
    }
};

/// Fastest-layer scalar field F(a,b,x,y;eps) = -x^2 + eps*(b-xi)*x + 3aby + eps^2*delta.
/// Its zero set at eps = 0 (x > 0) is the attracting critical surface
/// y = x^2/(3ab); F also carries the fold data at (x,y) = (0,0).
inline double layer_field(double a, double b, double x, double y, const ScaledParams& sp,
                          double eps) {
    return -x * x + eps * (b - sp.xi) * x + 3.0 * a * b * y + eps * eps * sp.delta;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Built-in dimensional parameter sets; name selects the k1 member.
inline OlsenParams olsen_preset(const std::string& name) {
    OlsenParams p;
    if (name == "olsen-0.16")
        p.k1 = 0.16;
    else if (name == "olsen-0.35")
        p.k1 = 0.35;
    else if (name == "olsen-0.41")
        p.k1 = 0.41;
    else
        throw std::invalid_argument("unknown preset '" + name +
                                    "' (expected olsen-0.16, olsen-0.35, olsen-0.41)");
    return p;
}

/// Dimensionless presets used by the candidate/return-map drivers. Both carry
/// the same slow-drift parameters; they differ only in which passage case
/// (canard vs jump) they are meant to exercise, controlled by delta at run
/// time. eps defaults to 0.05 and delta to 0.
inline ScaledParams figure_preset(const std::string& name) {
    if (name != "fig6" && name != "fig10")
        throw std::invalid_argument("unknown preset '" + name + "' (expected fig6 or fig10)");
    ScaledParams sp;
    sp.mu = 1.3;
    sp.alpha = 0.37;
    sp.eps_b = 0.062;
    sp.xi = 0.98;
    sp.kappa = 3.93;
    sp.eps = 0.05;
    sp.delta = 0.0;
    return sp;
}

}  // namespace olsen
