#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olsen/loops.hpp"
#include "olsen/model.hpp"
#include "olsen/rootfind.hpp"
#include "olsen/transcritical.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Closure functions for singular periodic orbits. Collapsing the
// four-equation periodicity system (delayed exit + carrier line + loop
// landing) onto the entry ordinate beta0 leaves one transcendental equation
// per case; a root in (0, xi) that satisfies the entry constraints yields a
// full candidate orbit.
// ---------------------------------------------------------------------------

/// Thrown when a trial beta0 makes a logarithm argument non-positive; the
/// offending factor is reported so scan cells containing the pole can be
/// split rather than bridged.
struct LogBranchError : std::domain_error {
    double offending;
    explicit LogBranchError(const std::string& what, double factor)
        : std::domain_error(what + " (offending factor " + std::to_string(factor) + ")"),
          offending(factor) {}
};

enum class CandidateCase { Canard, Jump };

inline const char* candidate_case_name(CandidateCase c) {
    return c == CandidateCase::Canard ? "canard" : "jump";
}

namespace detail {

/// u * coth(u), series near 0 (removable singularity).
inline double u_coth_u(double u) {
    const double au = std::fabs(u);
    if (au < 1e-4) {
        const double u2 = u * u;
        return 1.0 + u2 / 3.0 - u2 * u2 / 45.0;
    }
    return u / std::tanh(u);  // tanh saturates, no overflow for large |u|
}

/// u / (e^u - 1), series near 0.
inline double u_over_expm1(double u) {
    const double au = std::fabs(u);
    if (au < 1e-4) {
        const double u2 = u * u;
        return 1.0 - u / 2.0 + u2 / 12.0 - u2 * u2 / 720.0;
    }
    if (u > 700.0) return 0.0;
    return u / std::expm1(u);
}

}  // namespace detail

/// w_c(beta0) = alpha (beta0 - xi) coth(alpha (xi - beta0)/eps_b); equals
/// -eps_b * u coth(u) with u = alpha (xi - beta0)/eps_b, limit -eps_b at xi.
inline double wc_term(double beta0, const ScaledParams& sp) {
    const double u = sp.alpha * (sp.xi - beta0) / sp.eps_b;
    return -sp.eps_b * detail::u_coth_u(u);
}

/// Canard closure function W_c(beta0; mu). Zero at an admissible beta0 means
/// the maximal-delay exit, carrier line and loop landing close up.
inline double w_c(double beta0, const ScaledParams& sp, double mu) {
    if (!(beta0 > 0.0) || !(beta0 <= sp.xi + 0.5))
        throw std::domain_error("w_c: beta0 out of range");
    const double wc = wc_term(beta0, sp);
    const double num = (2.0 * sp.xi - beta0) *
                       (beta0 * sp.alpha + sp.eps_b * mu - sp.alpha * sp.xi + wc);
    const double den =
        beta0 * (sp.eps_b * mu - sp.alpha * beta0 + sp.alpha * sp.xi + wc);
    if (beta0 == sp.xi) return 0.0;
    if (!(num > 0.0) || !(den > 0.0))
        throw LogBranchError("w_c: log argument not positive", num > 0.0 ? den : num);
    return 4.0 * (beta0 - sp.xi) * (sp.eps_b * mu - sp.alpha * sp.xi) +
           4.0 * (beta0 - sp.xi) * wc + sp.alpha * sp.eps_b * std::log(num / den);
}

/// Jump closure function W_j(beta0; mu), same role for the no-delay exit.
/// Evaluated through u-scaled factors so the removable singularity at
/// beta0 = xi causes no cancellation trouble:
///   P/u = eps_b [mu (e^u-1)/u - e^u],  Q/u = eps_b [mu (e^u-1)/u - 1].
inline double w_j(double beta0, const ScaledParams& sp, double mu) {
    if (!(beta0 > 0.0) || !(beta0 <= sp.xi + 0.5))
        throw std::domain_error("w_j: beta0 out of range");
    const double u = sp.alpha * (sp.xi - beta0) / sp.eps_b;
    if (beta0 == sp.xi) return 0.0;
    const double wjr = -sp.eps_b * detail::u_over_expm1(u);  // alpha(beta0-xi)/w_j
    const double t1 = 2.0 * (beta0 - sp.xi) * (sp.eps_b * mu - sp.alpha * sp.xi + wjr);

    double num_scaled, den_scaled;
    if (std::fabs(u) < 1e-4) {
        num_scaled = sp.eps_b * ((mu - 1.0) + u * (mu / 2.0 - 1.0) + u * u * (mu / 6.0 - 0.5));
        den_scaled = sp.eps_b * ((mu - 1.0) + u * mu / 2.0 + u * u * mu / 6.0);
    } else if (u > 700.0) {
        // e^u overflows; factor it out: P/(u e^u) -> eps_b (mu/u - 1), Q/(u) ~ eps_b mu e^u/u
        // ratio P/Q -> (mu - u)/mu for huge u; fold the residual exponent into the log.
        const double pn = sp.eps_b * (mu / u - 1.0);
        const double qn = sp.eps_b * (mu / u);  // Q/(u e^u), since e^u dominates
        if (!(pn / qn > 0.0)) throw LogBranchError("w_j: log argument not positive", pn);
        return t1 + sp.alpha * sp.eps_b * (std::log(sp.xi / beta0) + std::log(pn / qn));
    } else {
        const double em = std::expm1(u);
        num_scaled = sp.eps_b * (mu * em / u - std::exp(u));
        den_scaled = sp.eps_b * (mu * em / u - 1.0);
    }
    const double ratio_sign = num_scaled / den_scaled;
    if (!(ratio_sign > 0.0))
        throw LogBranchError("w_j: log argument not positive",
                             den_scaled != 0.0 ? num_scaled : den_scaled);
    return t1 + sp.alpha * sp.eps_b * (std::log(sp.xi / beta0) + std::log(ratio_sign));
}

/// Entry abscissa from the entry ordinate, inverting the delayed-exit and
/// carrier-line relations.
inline double alpha0_from_beta0(double beta0, const ScaledParams& sp, double mu,
                                CandidateCase kind) {
    if (!(beta0 < sp.xi)) throw std::domain_error("alpha0_from_beta0: requires beta0 < xi");
    if (kind == CandidateCase::Canard) {
        const double wc = wc_term(beta0, sp);
        return (beta0 * sp.alpha + sp.eps_b * mu - sp.alpha * sp.xi + wc) /
               (sp.alpha * sp.eps_b);
    }
    const double u = sp.alpha * (sp.xi - beta0) / sp.eps_b;
    const double wjr = -sp.eps_b * detail::u_over_expm1(u);
    return (sp.eps_b * mu + sp.alpha * (beta0 - sp.xi) + wjr) / (sp.alpha * sp.eps_b);
}

// ---------------------------------------------------------------------------
// Candidate assembly
// ---------------------------------------------------------------------------

struct CandidateOrbit {
    CandidateCase kind = CandidateCase::Canard;
    double mu = 0.0;
    double alpha0 = 0.0, beta0 = 0.0;  // entry corner (loop landing point)
    double alpha1 = 0.0, beta1 = 0.0;  // exit corner (loop launch point)
    double alpha2 = 0.0, beta2 = 0.0;  // loop landing, should close on (alpha0, beta0)
    double closure_residual = 0.0;
    std::vector<Vec2> slow_segment;  // (a2, b2) along the drift, x2 = y2 = 0
    std::vector<Vec3> loop;          // (a, b, y) along the large loop

    /// Combined closed polyline in the fast-scaling coordinates
    /// (a, b, x, y); on the loop x = sqrt(3aby), on the drift x = y = 0.
    std::vector<Vec4> polyline4() const {
        std::vector<Vec4> out;
        out.reserve(slow_segment.size() + loop.size());
        for (const auto& p : slow_segment) out.push_back({p[0], p[1], 0.0, 0.0});
        // loop runs from alpha1 down to alpha2: reverse the stored a-increasing order
        for (auto it = loop.rbegin(); it != loop.rend(); ++it) {
            const auto& p = *it;
            const double x = std::sqrt(std::fmax(3.0 * p[0] * p[1] * p[2], 0.0));
            out.push_back({p[0], p[1], x, p[2]});
        }
        return out;
    }
};

struct CandidateOptions {
    double beta_floor = 0.3;
    std::size_t grid_n = 512;
    std::size_t slow_samples = 400;
    std::size_t loop_samples = 2000;
};

enum class CandidateStatus { Found, NoRoot, ConstraintViolated };

struct CandidateResult {
    CandidateStatus status = CandidateStatus::NoRoot;
    std::optional<CandidateOrbit> orbit;
    double beta0_root = 0.0;     // root of the closure function, if any
    std::string diagnostics;
};

namespace detail {

template <class W>
std::vector<double> scan_roots(const W& w, double lo, double hi, std::size_t n) {
    std::vector<double> roots;
    auto try_eval = [&](double x, double& f) {
        try {
            f = w(x);
            return std::isfinite(f);
        } catch (const std::domain_error&) {
            return false;
        }
    };
    auto refine = [&](double xa, double fa, double xb, double fb) {
        try {
            roots.push_back(brent(w, xa, xb, fa, fb, 1e-13));
        } catch (const std::domain_error&) {
        }
    };
    // a cell with a branch failure at one end is probed up to the validity
    // boundary: the closure functions dive to -inf at their poles, so a root
    // adjacent to the pole is still bracketed against the valid endpoint
    auto probe_broken_cell = [&](double x_bad, double x_good, double f_good) {
        double blo = x_bad, bhi = x_good, f_edge = f_good;
        bool edge_found = false;
        for (int k = 0; k < 80; ++k) {
            const double mid = 0.5 * (blo + bhi);
            double fm;
            if (try_eval(mid, fm)) {
                bhi = mid;
                f_edge = fm;
                edge_found = true;
            } else {
                blo = mid;
            }
            if (std::fabs(bhi - blo) < 1e-14 * std::fmax(1.0, std::fabs(bhi))) break;
        }
        if (edge_found && f_edge * f_good < 0.0) {
            if (bhi < x_good)
                refine(bhi, f_edge, x_good, f_good);
            else
                refine(x_good, f_good, bhi, f_edge);
        }
    };

    double prev_x = lo, prev_f = 0.0;
    bool prev_ok = try_eval(prev_x, prev_f);
    for (std::size_t i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        double f = 0.0;
        const bool ok = try_eval(x, f);
        if (ok && prev_ok && prev_f * f <= 0.0 && (prev_f != 0.0 || f != 0.0)) {
            refine(prev_x, prev_f, x, f);
        } else if (ok && !prev_ok) {
            probe_broken_cell(prev_x, x, f);
        } else if (!ok && prev_ok) {
            probe_broken_cell(x, prev_x, prev_f);
        }
        prev_x = x;
        prev_f = f;
        prev_ok = ok;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace detail

/// Solve the closure equation on (beta_floor, xi) and assemble the singular
/// periodic orbit. The root nearest xi is selected when several exist.
inline CandidateResult solve_candidate(CandidateCase kind, const ScaledParams& sp, double mu,
                                       const CandidateOptions& opt = {}) {
    sp.validate();
    auto W = [&](double b0) {
        return kind == CandidateCase::Canard ? w_c(b0, sp, mu) : w_j(b0, sp, mu);
    };
    // stop the grid just short of xi: beta0 = xi is always a (trivial) zero
    const double hi = sp.xi - 1e-7;
    const auto roots = detail::scan_roots(W, opt.beta_floor, hi, opt.grid_n);
    CandidateResult res;
    if (roots.empty()) {
        res.status = CandidateStatus::NoRoot;
        res.diagnostics = "no sign change of the closure function on the scan interval";
        return res;
    }
    const double beta0 = roots.back();  // nearest to xi
    res.beta0_root = beta0;

    ScaledParams spm = sp;  // the scan parameter mu overrides the stored one
    spm.mu = mu;
    const double alpha0 = alpha0_from_beta0(beta0, sp, mu, kind);
    const DelayResult exit = (kind == CandidateCase::Canard) ? canard_exit(alpha0, beta0, spm)
                                                             : jump_exit(alpha0, beta0, spm);
    const double alpha1 = exit.exit_a, beta1 = exit.exit_b;
    if (!(2.0 * alpha0 * beta0 < 1.0) || !(beta0 < sp.xi) || !(alpha0 > 0.0) ||
        !(2.0 * alpha1 * beta1 > 1.0)) {
        res.status = CandidateStatus::ConstraintViolated;
        res.diagnostics = "root found but entry/launch constraints fail (2*a0*b0=" +
                          std::to_string(2.0 * alpha0 * beta0) + ", 2*a1*b1=" +
                          std::to_string(2.0 * alpha1 * beta1) + ")";
        return res;
    }

    CandidateOrbit orb;
    orb.kind = kind;
    orb.mu = mu;
    orb.alpha0 = alpha0;
    orb.beta0 = beta0;
    orb.alpha1 = alpha1;
    orb.beta1 = beta1;

    // slow drift from (alpha0, beta0) to the exit corner
    const double A = mu / sp.alpha;
    orb.slow_segment.reserve(opt.slow_samples);
    for (std::size_t i = 0; i < opt.slow_samples; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(opt.slow_samples - 1);
        const double s = exit.s1 * f;
        orb.slow_segment.push_back(
            {A + std::exp(-sp.alpha * s) * (alpha0 - A), beta0 + sp.eps_b * s});
    }

    LoopSpec loop{alpha1, beta1, sp.eps_b, sp.kappa};
    orb.loop = loop_polyline(loop, opt.loop_samples);
    orb.alpha2 = landing_point(loop);
    orb.beta2 = invariant_line(loop, orb.alpha2);
    orb.closure_residual = std::hypot(orb.alpha2 - alpha0, orb.beta2 - beta0);
    res.orbit = std::move(orb);
    res.status = CandidateStatus::Found;
    return res;
}

// ---------------------------------------------------------------------------
// mu-window scanning
// ---------------------------------------------------------------------------

struct MuWindow {
    CandidateCase kind;
    double mu_lo;
    double mu_hi;
};

/// Maximal grid intervals of mu on which a constrained candidate exists.
inline std::vector<MuWindow> mu_window_scan(CandidateCase kind, const ScaledParams& sp,
                                            double mu_lo, double mu_hi, std::size_t grid_n,
                                            const CandidateOptions& opt = {}) {
    if (!(mu_lo > 0.0) || !(mu_hi > mu_lo))
        throw std::domain_error("mu_window_scan: need 0 < mu_lo < mu_hi");
    if (grid_n < 16) throw std::domain_error("mu_window_scan: grid_n must be >= 16");
    std::vector<MuWindow> windows;
    bool in_window = false;
    double start = 0.0, last_good = 0.0;
    for (std::size_t i = 0; i <= grid_n; ++i) {
        const double mu =
            mu_lo + (mu_hi - mu_lo) * static_cast<double>(i) / static_cast<double>(grid_n);
        bool good = false;
        try {
            good = solve_candidate(kind, sp, mu, opt).status == CandidateStatus::Found;
        } catch (const std::exception&) {
        }
        if (good && !in_window) {
            in_window = true;
            start = mu;
        }
        if (good) last_good = mu;
        if (!good && in_window) {
            windows.push_back({kind, start, last_good});
            in_window = false;
        }
    }
    if (in_window) windows.push_back({kind, start, last_good});
    return windows;
}

/// Overlap of two window lists (used for the canard/jump intersection).
inline std::vector<MuWindow> window_intersection(const std::vector<MuWindow>& a,
                                                 const std::vector<MuWindow>& b) {
    std::vector<MuWindow> out;
    for (const auto& wa : a)
        for (const auto& wb : b) {
            const double lo = std::fmax(wa.mu_lo, wb.mu_lo);
            const double hi = std::fmin(wa.mu_hi, wb.mu_hi);
            if (lo < hi) out.push_back({wa.kind, lo, hi});
        }
    return out;
}

}  // namespace olsen
