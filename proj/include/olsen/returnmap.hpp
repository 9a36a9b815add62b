#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "olsen/candidates.hpp"
#include "olsen/integrate.hpp"
#include "olsen/linalg.hpp"
#include "olsen/manifolds.hpp"
#include "olsen/model.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Slow-flow maps on the invariant plane
// ---------------------------------------------------------------------------

namespace detail {
inline void check_slow_map_entry(double a, double b, const ScaledParams& sp) {
    // b = xi is admitted as the zero-delay limit (both maps fix the point)
    if (!(2.0 * a * b < 1.0) || !(b <= sp.xi))
        throw std::domain_error("slow flow map: requires 2ab < 1 and b <= xi");
}
}  // namespace detail

/// Maximal-delay slow map: (a, b) -> (mu/alpha + e^{-2alpha(xi-b)/eps_b}(a - mu/alpha), 2xi - b).
inline Vec2 phi_c(double a, double b, const ScaledParams& sp) {
    detail::check_slow_map_entry(a, b, sp);
    const double A = sp.mu / sp.alpha;
    return {A + std::exp(-2.0 * sp.alpha * (sp.xi - b) / sp.eps_b) * (a - A), 2.0 * sp.xi - b};
}

/// No-delay slow map: exits at b = xi with the single-exponent contraction.
inline Vec2 phi_j(double a, double b, const ScaledParams& sp) {
    detail::check_slow_map_entry(a, b, sp);
    const double A = sp.mu / sp.alpha;
    return {A + std::exp(-sp.alpha * (sp.xi - b) / sp.eps_b) * (a - A), sp.xi};
}

// ---------------------------------------------------------------------------
// Ordering/contraction inequalities of the slow maps near a candidate
// ---------------------------------------------------------------------------

struct LemmaMargins {
    double rho = 0.0;
    std::vector<double> margins;  // all must be > 0
    bool all_hold = false;
};

struct LemmaReport {
    CandidateCase kind = CandidateCase::Canard;
    double alpha0 = 0.0, beta0 = 0.0;
    std::vector<LemmaMargins> per_rho;
    std::vector<double> linearity_slopes;  // log-log slope of margin vs rho, per inequality
    double largest_rho_ok = 0.0;
    bool all_hold = false;
};

/// Evaluate the slow-map ordering inequalities at the candidate base point
/// for each rho in the grid, and fit the scaling of the margins in rho.
inline LemmaReport lemma_checks(const ScaledParams& sp, double mu, CandidateCase kind,
                                const std::vector<double>& rho_grid) {
    const CandidateResult cand = solve_candidate(kind, sp, mu);
    if (cand.status != CandidateStatus::Found)
        throw std::runtime_error("lemma_checks: no candidate orbit at this mu");
    const double a0 = cand.orbit->alpha0, b0 = cand.orbit->beta0;
    ScaledParams spm = sp;
    spm.mu = mu;

    LemmaReport rep;
    rep.kind = kind;
    rep.alpha0 = a0;
    rep.beta0 = b0;

    for (double rho : rho_grid) {
        LemmaMargins m;
        m.rho = rho;
        if (kind == CandidateCase::Canard) {
            const Vec2 lowered = phi_c(a0, b0 - rho, spm);   // (a1_low, b1_low)
            const Vec2 raised = phi_c(a0, b0 + rho, spm);    // (a1_up,  b1_up)
            const double b1 = 2.0 * spm.xi - b0;
            // image-ordinate ordering
            m.margins.push_back(lowered[1] - b1);
            m.margins.push_back(b1 - raised[1]);
            // images stay between the neighbouring carrier lines
            m.margins.push_back(lowered[1] -
                                (spm.eps_b * lowered[0] + b0 - rho - spm.eps_b * a0));
            m.margins.push_back((spm.eps_b * raised[0] + b0 + rho - spm.eps_b * a0) -
                                raised[1]);
        } else {
            const Vec2 lowered = phi_j(a0, b0 - rho, spm);
            const Vec2 raised = phi_j(a0, b0 + rho, spm);
            m.margins.push_back((spm.xi - b0 + rho + spm.eps_b * a0) / spm.eps_b - lowered[0]);
            m.margins.push_back(raised[0] - (spm.xi - b0 - rho + spm.eps_b * a0) / spm.eps_b);
        }
        m.all_hold = true;
        for (double v : m.margins) m.all_hold = m.all_hold && v > 0.0;
        rep.per_rho.push_back(std::move(m));
    }

    rep.all_hold = true;
    for (const auto& m : rep.per_rho) {
        rep.all_hold = rep.all_hold && m.all_hold;
        if (m.all_hold) rep.largest_rho_ok = std::fmax(rep.largest_rho_ok, m.rho);
    }

    // least-squares slope of log(margin) vs log(rho) for each inequality,
    // fitted on the three smallest rho values (the margins carry O(rho^2)
    // curvature that is still sizeable at rho ~ 0.02)
    if (rep.per_rho.size() >= 2) {
        std::vector<const LemmaMargins*> sorted;
        for (const auto& m : rep.per_rho) sorted.push_back(&m);
        std::sort(sorted.begin(), sorted.end(),
                  [](const LemmaMargins* a, const LemmaMargins* b) { return a->rho < b->rho; });
        if (sorted.size() > 3) sorted.resize(3);
        const std::size_t n_ineq = rep.per_rho.front().margins.size();
        for (std::size_t j = 0; j < n_ineq; ++j) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            std::size_t n = 0;
            for (const auto* m : sorted) {
                if (!(m->margins[j] > 0.0)) continue;
                const double x = std::log(m->rho), y = std::log(m->margins[j]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++n;
            }
            rep.linearity_slopes.push_back(
                n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Poincare sections and the global return map
// ---------------------------------------------------------------------------

/// Section layout around a candidate corner (alpha0, beta0):
///   Sigma0: {a2 = alpha0 + rho}, crossed with a2 increasing
///   Sigma1: {x2 = k}, crossed upward on departure
///   Sigma2: {x2 = k}, crossed downward on landing
struct SectionFrame {
    double alpha0 = 0.0;
    double beta0 = 0.0;
    double rho = 0.02;
    double k = 1.0;
    double upsilon = 0.05;

    void validate(const ScaledParams& sp) const {
        if (!(rho > 0.0) || !(k > 0.0)) throw std::domain_error("SectionFrame: rho, k > 0");
        const double da = alpha0 + rho - 1.0 / (2.0 * sp.xi);
        const double db = beta0 - sp.xi;
        if (da * da + db * db <= upsilon * upsilon)
            throw std::domain_error("SectionFrame: Sigma0 intersects the exclusion ball");
    }

    bool sigma0_box_contains(const Vec4& s) const {
        return std::fabs(s[1] - beta0) <= rho && s[2] >= 0.0 && s[2] <= rho && s[3] >= 0.0 &&
               s[3] <= rho;
    }
};

struct EscapeError : IntegrationError {
    int leg;
    EscapeError(int leg_, const std::string& what)
        : IntegrationError("poincare_return: leg " + std::to_string(leg_) + " (" + what + ")"),
          leg(leg_) {}
};

struct ReturnCrossings {
    Vec4 sigma1{};
    double t_sigma1 = 0.0;
    Vec4 sigma2{};
    double t_sigma2 = 0.0;
    bool sigma0_box_ok = false;
};

/// One full turn of the flow: Sigma0 -> Sigma1 -> Sigma2 -> Sigma0, by stiff
/// integration of the rescaled system on the slow time scale. Returns the
/// state on Sigma0; `period` receives the elapsed slow time.
inline Vec4 poincare_return(const Vec4& on_sigma0, const ScaledParams& sp,
                            const SectionFrame& fr, IntegratorConfig cfg = {},
                            double* period = nullptr, ReturnCrossings* log = nullptr,
                            Trajectory<4>* record = nullptr) {
    fr.validate(sp);
    cfg.method = Method::StiffImplicit;
    cfg.clamp_tiny_negative = true;
    const ScaledRhs rhs{sp};
    const double a_level = fr.alpha0 + fr.rho;
    if (std::fabs(on_sigma0[0] - a_level) > 1e-9)
        throw std::domain_error("poincare_return: state not on Sigma0 (a2 != alpha0 + rho)");

    SectionSpec<4> sigma1;
    sigma1.g = [k = fr.k](const Vec4& y) { return y[2] - k; };
    sigma1.direction = +1;
    SectionSpec<4> sigma2 = sigma1;
    sigma2.direction = -1;
    SectionSpec<4> sigma0;
    sigma0.g = [a_level](const Vec4& y) { return y[0] - a_level; };
    sigma0.direction = +1;

    const double h1 = (3.0 * (sp.xi - fr.beta0) + 1.0) / sp.eps_b + 20.0;
    const double h2 = 5.0;
    const double h3 = 10.0 / sp.alpha + 5.0;

    SectionHit<4> hit1, hit2, hit0;
    try {
        hit1 = integrate_to_section(rhs, on_sigma0, 0.0, sigma1, cfg, h1, record);
    } catch (const NoCrossingError& e) {
        throw EscapeError(1, e.what());
    }
    try {
        hit2 = integrate_to_section(rhs, hit1.state, hit1.time, sigma2, cfg, h2, record);
    } catch (const NoCrossingError& e) {
        throw EscapeError(2, e.what());
    }
    try {
        hit0 = integrate_to_section(rhs, hit2.state, hit2.time, sigma0, cfg, h3, record);
    } catch (const NoCrossingError& e) {
        throw EscapeError(3, e.what());
    }

    if (log) {
        log->sigma1 = hit1.state;
        log->t_sigma1 = hit1.time;
        log->sigma2 = hit2.state;
        log->t_sigma2 = hit2.time;
        log->sigma0_box_ok = fr.sigma0_box_contains(hit0.state);
    }
    if (period) *period = hit0.time;
    return hit0.state;
}

// ---------------------------------------------------------------------------
// Hausdorff distance between polylines in the fast-scaling coordinates
// ---------------------------------------------------------------------------

namespace detail {

inline double point_segment_dist2(const Vec4& p, const Vec4& q0, const Vec4& q1) {
    double dq[4], dp[4];
    double qq = 0.0, qp = 0.0;
    for (int i = 0; i < 4; ++i) {
        dq[i] = q1[i] - q0[i];
        dp[i] = p[i] - q0[i];
        qq += dq[i] * dq[i];
        qp += dq[i] * dp[i];
    }
    const double t = qq > 0.0 ? std::fmin(1.0, std::fmax(0.0, qp / qq)) : 0.0;
    double d2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double r = dp[i] - t * dq[i];
        d2 += r * r;
    }
    return d2;
}

inline double directed_hausdorff(const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
    double worst = 0.0;
    for (const auto& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            best = std::fmin(best, point_segment_dist2(p, b[i], b[i + 1]));
            if (best == 0.0) break;
        }
        worst = std::fmax(worst, best);
    }
    return std::sqrt(worst);
}

}  // namespace detail

/// Symmetric Hausdorff distance between two polylines in (a, b, x, y).
inline double hausdorff_distance(const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
    if (a.empty() || b.empty()) throw std::domain_error("hausdorff_distance: empty polyline");
    if (a.size() == 1 || b.size() == 1) {
        // degenerate: fall back to point sets
        double best = 0.0;
        for (const auto& p : a) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& q : b) {
                double d2 = 0.0;
                for (int i = 0; i < 4; ++i) d2 += (p[i] - q[i]) * (p[i] - q[i]);
                m = std::fmin(m, d2);
            }
            best = std::fmax(best, m);
        }
        return std::sqrt(best);
    }
    return std::fmax(detail::directed_hausdorff(a, b), detail::directed_hausdorff(b, a));
}

/// Map a slow-scale trajectory into the fast-scaling coordinates
/// (a, b, x, y) = (a2, b2, eps*x2, eps^2*y2) used for orbit comparisons.
inline std::vector<Vec4> to_fast_polyline(const Trajectory<4>& traj, double eps) {
    std::vector<Vec4> out;
    out.reserve(traj.states.size());
    for (const auto& s : traj.states) out.push_back(scale_state(s, eps));
    return out;
}

// ---------------------------------------------------------------------------
// Periodic orbit via fixed-point iteration of the return map
// ---------------------------------------------------------------------------

struct NoOrbitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReturnMapResult {
    Vec4 fixed_point{};
    double period = 0.0;
    Mat3 jacobian{};                        // d(map) in (b2, x2, y2) on Sigma0
    std::array<double, 3> multipliers{};    // eigenvalue moduli
    double hausdorff_to_candidate = 0.0;    // NaN when no candidate exists
    double residual = 0.0;
    int iterations = 0;
    double rho_used = 0.0;
    bool from_candidate = true;             // false: frame from attractor reconnaissance
    CandidateOrbit candidate;               // default-constructed when from_candidate is false
    Trajectory<4> orbit;                    // one period starting at the fixed point
};

struct OrbitSearchOptions {
    double damping = 0.7;
    double tol = 1e-8;
    int max_iterations = 120;
    double jacobian_step_floor = 1e-6;
    std::vector<double> rho_ladder{0.02, 0.05, 0.1, 0.15};
    double lift_x2_floor = 1e-6;
};

namespace detail {

struct MapOnSigma0 {
    const ScaledParams& sp;
    const SectionFrame& fr;
    const IntegratorConfig& cfg;

    Vec3 operator()(const Vec3& v, double* period = nullptr,
                    Trajectory<4>* record = nullptr) const {
        const Vec4 s{fr.alpha0 + fr.rho, v[0], std::fmax(v[1], 0.0), std::fmax(v[2], 0.0)};
        const Vec4 r = poincare_return(s, sp, fr, cfg, period, nullptr, record);
        return {r[1], r[2], r[3]};
    }
};

}  // namespace detail

namespace detail {

/// Section base when no singular candidate exists at this mu (for example the
/// standard published rows have mu < 1): free-run onto the attractor and use
/// its landing corner (minimum of a2 over the tail) plus the fast-variable
/// values there as the lift.
struct ReconBase {
    double alpha0, beta0, x2, y2;
};

inline ReconBase attractor_recon(const ScaledParams& spm, IntegratorConfig cfg) {
    cfg.method = Method::StiffImplicit;
    cfg.clamp_tiny_negative = true;
    cfg.dense_output = true;
    const auto tr = integrate(ScaledRhs{spm}, Vec4{1.0, 0.8, 0.5, 0.5}, 0.0, 80.0, cfg);
    ReconBase rb{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        if (tr.times[i] < 40.0) continue;
        const auto& s = tr.states[i];
        if (s[0] < rb.alpha0) rb = {s[0], s[1], s[2], s[3]};
    }
    if (!std::isfinite(rb.alpha0))
        throw NoOrbitError("find_periodic_orbit: attractor reconnaissance failed");
    return rb;
}

}  // namespace detail

/// Locate the attracting periodic orbit: damped fixed-point iteration on
/// Sigma0, a secant pass on the b2 component if the damped iteration
/// converges too slowly, then the numerical return-map Jacobian and the
/// orbit itself. The section frame comes from the singular candidate when
/// one exists at this mu, otherwise from a free-running reconnaissance of
/// the attractor.
inline ReturnMapResult find_periodic_orbit(const ScaledParams& sp, double mu, CandidateCase kind,
                                           IntegratorConfig cfg = {},
                                           const OrbitSearchOptions& opt = {}) {
    ScaledParams spm = sp;
    spm.mu = mu;

    CandidateResult cand;
    try {
        cand = solve_candidate(kind, sp, mu);
    } catch (const std::exception&) {
        cand.status = CandidateStatus::NoRoot;
    }
    const bool has_candidate = cand.status == CandidateStatus::Found;
    detail::ReconBase recon{};
    if (!has_candidate) recon = detail::attractor_recon(spm, cfg);
    const double base_a0 = has_candidate ? cand.orbit->alpha0 : recon.alpha0;
    const double base_b0 = has_candidate ? cand.orbit->beta0 : recon.beta0;

    std::string last_failure;
    for (double rho : opt.rho_ladder) {
        SectionFrame fr;
        fr.alpha0 = base_a0;
        fr.beta0 = base_b0;
        fr.rho = rho;
        try {
            fr.validate(spm);
        } catch (const std::domain_error& e) {
            last_failure = e.what();
            continue;
        }
        const detail::MapOnSigma0 map{spm, fr, cfg};

        // lift the section base into the basin: x2 from the attracting branch
        // expansion (or the reconnaissance values), floored away from the
        // exactly-invariant plane
        double x2 = opt.lift_x2_floor, y2 = 0.0;
        if (has_candidate) {
            try {
                const auto exp_ =
                    branch_expansions(fr.alpha0 + fr.rho, fr.beta0, spm.delta, spm);
                x2 = std::fmax(exp_.att_x2, opt.lift_x2_floor);
                y2 = std::fmax(exp_.att_y2, 0.0);
            } catch (const std::domain_error&) {
            }
        } else {
            x2 = std::fmax(recon.x2, opt.lift_x2_floor);
            y2 = std::fmax(recon.y2, 0.0);
        }
        if (y2 <= 0.0) y2 = x2 * x2 / (3.0 * (fr.alpha0 + fr.rho) * fr.beta0);

        Vec3 v{fr.beta0, x2, y2};
        try {
            auto full_residual = [](const Vec3& a, const Vec3& b) {
                return std::fmax(std::fabs(a[0] - b[0]),
                                 std::fmax(std::fabs(a[1] - b[1]), std::fabs(a[2] - b[2])));
            };
            double resid = std::numeric_limits<double>::infinity();
            int used = 0;
            for (int it = 0; it < opt.max_iterations; ++it) {
                const Vec3 fv = map(v);
                ++used;
                resid = full_residual(fv, v);
                if (resid < opt.tol) {
                    v = fv;
                    break;
                }
                // secant acceleration on b2, valid once the fast components
                // have slaved and the drift residual dominates
                const bool b_dominated =
                    std::fabs(fv[0] - v[0]) >
                    10.0 * std::fmax(std::fabs(fv[1] - v[1]), std::fabs(fv[2] - v[2]));
                if (it >= 3 && resid < 1e-3 && b_dominated) {
                    const Vec3 v2 = fv;
                    const Vec3 f2 = map(v2);
                    ++used;
                    const double g1 = fv[0] - v[0];
                    const double g2 = f2[0] - v2[0];
                    const double full = full_residual(f2, v2);
                    if (full < opt.tol) {
                        v = f2;
                        resid = full;
                        break;
                    }
                    double b_next = v2[0];
                    if (std::fabs(g2 - g1) > 1e-15)
                        b_next = v2[0] - g2 * (v2[0] - v[0]) / (g2 - g1);
                    v = Vec3{b_next, f2[1], f2[2]};
                    resid = full;
                    continue;
                }
                for (int i = 0; i < 3; ++i) v[i] += opt.damping * (fv[i] - v[i]);
            }
            if (!(resid < opt.tol))
                throw NoOrbitError("find_periodic_orbit: iteration did not reach residual " +
                                   std::to_string(opt.tol) + " (last residual " +
                                   std::to_string(resid) + ")");

            ReturnMapResult result;
            result.rho_used = rho;
            result.from_candidate = has_candidate;
            if (has_candidate) result.candidate = *cand.orbit;
            result.residual = resid;
            result.iterations = used;

            // Jacobian by one-sided differences in (b2, x2, y2)
            const double eta = std::fmax(opt.jacobian_step_floor, 10.0 * spm.eps * cfg.atol);
            const Vec3 base = map(v);
            for (int j = 0; j < 3; ++j) {
                Vec3 vp = v;
                vp[j] += eta;
                const Vec3 fp = map(vp);
                for (int i = 0; i < 3; ++i) result.jacobian[i][j] = (fp[i] - base[i]) / eta;
            }
            const auto eigs = eig3(result.jacobian);
            for (int i = 0; i < 3; ++i) result.multipliers[i] = std::abs(eigs[i]);

            double period = 0.0;
            Trajectory<4> orbit;
            orbit.time_scale = "s";
            const Vec3 closed = map(v, &period, &orbit);
            (void)closed;
            result.period = period;
            result.fixed_point = {fr.alpha0 + fr.rho, v[0], v[1], v[2]};
            result.orbit = std::move(orbit);
            result.hausdorff_to_candidate =
                has_candidate ? hausdorff_distance(to_fast_polyline(result.orbit, spm.eps),
                                                   cand.orbit->polyline4())
                              : std::numeric_limits<double>::quiet_NaN();
            return result;
        } catch (const EscapeError& e) {
            last_failure = e.what();
            continue;  // retry with a wider section offset
        }
    }
    throw NoOrbitError("find_periodic_orbit: all section offsets failed (" + last_failure + ")");
}

}  // namespace olsen
