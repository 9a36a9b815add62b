#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olsen/linalg.hpp"

namespace olsen {

// ---------------------------------------------------------------------------
// Configuration and result types
// ---------------------------------------------------------------------------

enum class Method { ExplicitAdaptive, StiffImplicit };

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 0.0;   // 0 = span * 1e-13
    double fixed_step = 0.0; // > 0 disables adaptivity (order-verification runs)
    double initial_step = 0.0;
    Method method = Method::StiffImplicit;
    bool dense_output = true;  // record every accepted step in the trajectory
    // Clamp components in (-10*atol, 0) back to 0 after each step. Used for
    // the slow-segment runs where {x2 = 0 = y2} is exactly invariant.
    bool clamp_tiny_negative = false;
    std::size_t max_steps = 20'000'000;

    void validate() const {
        if (!(rtol >= 1e-14)) throw std::domain_error("IntegratorConfig: rtol must be >= 1e-14");
        if (!(atol > 0.0)) throw std::domain_error("IntegratorConfig: atol must be > 0");
        if (min_step > 0.0 && !(min_step < max_step))
            throw std::domain_error("IntegratorConfig: min_step must be < max_step");
    }
};

template <std::size_t N>
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec<N>> states;
    std::string time_scale = "t";
    std::size_t n_accepted = 0;
    std::size_t n_rejected = 0;
    std::size_t n_rhs_evals = 0;

    const Vec<N>& back() const { return states.back(); }
};

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StiffnessError : IntegrationError {
    using IntegrationError::IntegrationError;
};
struct DivergenceError : IntegrationError {
    using IntegrationError::IntegrationError;
};
struct NoCrossingError : IntegrationError {
    using IntegrationError::IntegrationError;
};

/// Scalar event g(state) with a crossing direction.
///   direction +1: g goes from < 0 to > 0
///   direction -1: g goes from > 0 to < 0
///   direction  0: any sign change
template <std::size_t N>
struct SectionSpec {
    std::function<double(const Vec<N>&)> g;
    int direction = +1;
    bool terminal = true;
    double tolerance = 1e-10;  // |g| at the refined crossing
    double deadband = 1e-6;    // time after t0 (or a crossing) before re-arming
};

template <std::size_t N>
struct SectionHit {
    Vec<N> state{};
    double time = 0.0;
    double g_residual = 0.0;
};

namespace detail {

template <class RHS, std::size_t N>
concept HasJacobian = requires(const RHS r, const Vec<N>& y, Mat<N>& j) { r.jacobian(y, j); };

template <std::size_t N, class RHS>
void fill_jacobian(const RHS& rhs, const Vec<N>& y, Mat<N>& j) {
    if constexpr (HasJacobian<RHS, N>) {
        rhs.jacobian(y, j);
    } else {
        Vec<N> f0{}, f1{};
        rhs(y, f0);
        for (std::size_t c = 0; c < N; ++c) {
            Vec<N> yp = y;
            const double h = std::sqrt(2.220446049250313e-16) * std::fmax(std::fabs(y[c]), 1e-8);
            yp[c] += h;
            rhs(yp, f1);
            for (std::size_t r = 0; r < N; ++r) j[r][c] = (f1[r] - f0[r]) / h;
        }
    }
}

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, double rtol,
                  double atol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::fmax(std::fabs(y0[i]), std::fabs(y1[i]));
        const double r = err[i] / sc;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(N));
}

template <std::size_t N>
bool all_finite(const Vec<N>& y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stepper: one object per integration, owns the step-size control state.
// Embedded pairs: Dormand-Prince 5(4) explicit, and a 4-stage Rosenbrock
// 4(3) (Kaps-Rentrop with Shampine's parameter set) for stiff runs.
// ---------------------------------------------------------------------------

template <std::size_t N, class RHS>
class Stepper {
public:
    Stepper(const RHS& rhs, const IntegratorConfig& cfg) : rhs_(rhs), cfg_(cfg) {
        cfg_.validate();
    }

    void start(const Vec<N>& y0, double t0, double span_hint) {
        if (!detail::all_finite(y0)) throw DivergenceError("integrate: non-finite initial state");
        t_ = t0;
        y_ = y0;
        rhs_(y_, f_);
        ++n_rhs_;
        span_ = std::fabs(span_hint);
        min_step_ = cfg_.min_step > 0.0 ? cfg_.min_step : 1e-13 * std::fmax(span_, 1.0);
        if (cfg_.fixed_step > 0.0)
            h_ = cfg_.fixed_step;
        else if (cfg_.initial_step > 0.0)
            h_ = cfg_.initial_step;
        else
            h_ = initial_step_guess();
        h_ = std::fmin(h_, cfg_.max_step);
    }

    /// Advance by one accepted step, not exceeding t_limit.
    void advance(double t_limit) {
        const bool fixed = cfg_.fixed_step > 0.0;
        for (int attempt = 0; attempt < 64; ++attempt) {
            double h = std::fmin(h_, cfg_.max_step);
            if (t_ + h > t_limit) h = t_limit - t_;
            if (!(h > 0.0)) throw IntegrationError("integrate: zero step requested");

            Vec<N> y1{}, err{};
            const bool ok = (cfg_.method == Method::StiffImplicit)
                                ? rosenbrock_step(h, y1, err)
                                : dopri_step(h, y1, err);
            if (!ok) {
                // singular iteration matrix / non-finite stage: shrink and retry
                ++n_rejected_;
                h_ = std::fmax(0.25 * h, min_step_);
                if (h_ <= min_step_ && h <= min_step_ * 1.0000001)
                    throw StiffnessError("integrate: step-size underflow at t=" +
                                         std::to_string(t_));
                continue;
            }
            if (fixed) {
                accept(h, y1);
                return;
            }
            const double en = detail::error_norm(err, y_, y1, cfg_.rtol, cfg_.atol);
            const double expo = (cfg_.method == Method::StiffImplicit) ? 0.25 : 0.2;
            if (en <= 1.0) {
                accept(h, y1);
                double fac = 0.9 * std::pow(std::fmax(en, 1e-10), -expo);
                fac = std::clamp(fac, 0.2, 5.0);
                if (just_rejected_) fac = std::fmin(fac, 1.0);
                just_rejected_ = false;
                h_ = std::fmin(h * fac, cfg_.max_step);
                return;
            }
            ++n_rejected_;
            just_rejected_ = true;
            const double fac = std::clamp(0.9 * std::pow(en, -(cfg_.method == Method::StiffImplicit
                                                                   ? 1.0 / 3.0
                                                                   : 0.25)),
                                          0.1, 0.9);
            h_ = h * fac;
            if (h_ < min_step_)
                throw StiffnessError("integrate: step-size underflow at t=" + std::to_string(t_) +
                                     " (h=" + std::to_string(h_) + ")");
        }
        throw StiffnessError("integrate: too many rejected attempts at t=" + std::to_string(t_));
    }

    double t() const { return t_; }
    const Vec<N>& y() const { return y_; }
    double t_prev() const { return tp_; }
    const Vec<N>& y_prev() const { return yp_; }
    std::size_t accepted() const { return n_accepted_; }
    std::size_t rejected() const { return n_rejected_; }
    std::size_t rhs_evals() const { return n_rhs_; }

    /// Cubic Hermite interpolation inside the last accepted step.
    Vec<N> interpolate(double ts) const {
        const double h = t_ - tp_;
        if (h == 0.0) return y_;
        const double s = (ts - tp_) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        Vec<N> out{};
        for (std::size_t i = 0; i < N; ++i)
            out[i] = h00 * yp_[i] + h10 * h * fp_[i] + h01 * y_[i] + h11 * h * f_[i];
        return out;
    }

private:
    double initial_step_guess() const {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = cfg_.atol + cfg_.rtol * std::fabs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1 += (f_[i] / sc) * (f_[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h = (d1 > 1e-10) ? 0.01 * d0 / d1 : 1e-6;
        if (!(h > 0.0) || !std::isfinite(h)) h = 1e-6;
        return std::fmin(h, span_ > 0.0 ? 0.1 * span_ : h);
    }

    void accept(double h, const Vec<N>& y1) {
        tp_ = t_;
        yp_ = y_;
        fp_ = f_;
        t_ += h;
        y_ = y1;
        if (cfg_.clamp_tiny_negative)
            for (std::size_t i = 0; i < N; ++i)
                if (y_[i] < 0.0 && y_[i] > -10.0 * cfg_.atol) y_[i] = 0.0;
        if (!detail::all_finite(y_))
            throw DivergenceError("integrate: state diverged (NaN/Inf) at t=" +
                                  std::to_string(t_));
        rhs_(y_, f_);
        ++n_rhs_;
        ++n_accepted_;
        if (n_accepted_ > cfg_.max_steps)
            throw IntegrationError("integrate: max step count exceeded");
    }

    bool dopri_step(double h, Vec<N>& y1, Vec<N>& err) {
        // Dormand-Prince 5(4), FSAL not exploited (f_ recomputed on accept)
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double d1 = 5179.0 / 57600, d3 = 7571.0 / 16695, d4 = 393.0 / 640,
                                d5 = -92097.0 / 339200, d6 = 187.0 / 2100, d7 = 1.0 / 40;

        const Vec<N>& k1 = f_;
        Vec<N> k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{};
        auto stage = [&](const auto&... terms) {
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y_[i] + h * (... + (terms.second * terms.first[i]));
        };
        stage(std::pair{k1, a21});
        rhs_(tmp, k2);
        stage(std::pair{k1, a31}, std::pair{k2, a32});
        rhs_(tmp, k3);
        stage(std::pair{k1, a41}, std::pair{k2, a42}, std::pair{k3, a43});
        rhs_(tmp, k4);
        stage(std::pair{k1, a51}, std::pair{k2, a52}, std::pair{k3, a53}, std::pair{k4, a54});
        rhs_(tmp, k5);
        stage(std::pair{k1, a61}, std::pair{k2, a62}, std::pair{k3, a63}, std::pair{k4, a64},
              std::pair{k5, a65});
        rhs_(tmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            y1[i] = y_[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs_(y1, k7);
        n_rhs_ += 6;
        for (std::size_t i = 0; i < N; ++i) {
            const double y4 = y_[i] + h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                           d6 * k6[i] + d7 * k7[i]);
            err[i] = y1[i] - y4;
        }
        return detail::all_finite(y1) && detail::all_finite(err);
    }

    bool rosenbrock_step(double h, Vec<N>& y1, Vec<N>& err) {
        // Kaps-Rentrop GRK4 with Shampine's coefficients
        static constexpr double gam = 0.5;
        static constexpr double a21 = 2.0, a31 = 48.0 / 25, a32 = 6.0 / 25;
        static constexpr double c21 = -8.0, c31 = 372.0 / 25, c32 = 12.0 / 5;
        static constexpr double c41 = -112.0 / 125, c42 = -54.0 / 125, c43 = -2.0 / 5;
        static constexpr double b1 = 19.0 / 9, b2 = 0.5, b3 = 25.0 / 108, b4 = 125.0 / 108;
        static constexpr double e1 = 17.0 / 54, e2 = 7.0 / 36, e3 = 0.0, e4 = 125.0 / 108;

        Mat<N> m{};
        detail::fill_jacobian(rhs_, y_, m);
        n_rhs_ += detail::HasJacobian<RHS, N> ? 0 : N;
        const double diag = 1.0 / (gam * h);
        for (std::size_t r = 0; r < N; ++r) {
            for (std::size_t c = 0; c < N; ++c) m[r][c] = -m[r][c];
            m[r][r] += diag;
        }
        const Lu<N> lu = lu_factor(m);
        if (lu.singular) return false;

        Vec<N> g1 = lu_solve(lu, f_);
        Vec<N> tmp{}, ft{}, rhsv{};

        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + a21 * g1[i];
        rhs_(tmp, ft);
        for (std::size_t i = 0; i < N; ++i) rhsv[i] = ft[i] + c21 * g1[i] / h;
        Vec<N> g2 = lu_solve(lu, rhsv);

        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + a31 * g1[i] + a32 * g2[i];
        rhs_(tmp, ft);
        for (std::size_t i = 0; i < N; ++i) rhsv[i] = ft[i] + (c31 * g1[i] + c32 * g2[i]) / h;
        Vec<N> g3 = lu_solve(lu, rhsv);

        // fourth stage reuses the third-stage function value
        for (std::size_t i = 0; i < N; ++i)
            rhsv[i] = ft[i] + (c41 * g1[i] + c42 * g2[i] + c43 * g3[i]) / h;
        Vec<N> g4 = lu_solve(lu, rhsv);
        n_rhs_ += 2;

        for (std::size_t i = 0; i < N; ++i) {
            y1[i] = y_[i] + b1 * g1[i] + b2 * g2[i] + b3 * g3[i] + b4 * g4[i];
            err[i] = e1 * g1[i] + e2 * g2[i] + e3 * g3[i] + e4 * g4[i];
        }
        return detail::all_finite(y1) && detail::all_finite(err);
    }

    RHS rhs_;
    IntegratorConfig cfg_;
    double t_ = 0.0, tp_ = 0.0;
    Vec<N> y_{}, yp_{}, f_{}, fp_{};
    double h_ = 0.0, span_ = 0.0, min_step_ = 0.0;
    bool just_rejected_ = false;
    std::size_t n_accepted_ = 0, n_rejected_ = 0, n_rhs_ = 0;
};

// ---------------------------------------------------------------------------
// Driver functions
// ---------------------------------------------------------------------------

template <std::size_t N, class RHS>
Trajectory<N> integrate(const RHS& rhs, const Vec<N>& y0, double t0, double t1,
                        const IntegratorConfig& cfg) {
    if (!(t1 > t0)) throw std::domain_error("integrate: t1 must be > t0");
    Trajectory<N> traj;
    traj.times.push_back(t0);
    traj.states.push_back(y0);
    Stepper<N, RHS> st(rhs, cfg);
    st.start(y0, t0, t1 - t0);
    while (st.t() < t1 - 1e-14 * std::fabs(t1 - t0)) {
        st.advance(t1);
        if (cfg.dense_output || st.t() >= t1) {
            traj.times.push_back(st.t());
            traj.states.push_back(st.y());
        }
    }
    if (!cfg.dense_output && traj.times.back() != st.t()) {
        traj.times.push_back(st.t());
        traj.states.push_back(st.y());
    }
    traj.n_accepted = st.accepted();
    traj.n_rejected = st.rejected();
    traj.n_rhs_evals = st.rhs_evals();
    return traj;
}

namespace detail {

/// Re-integrate from (t0, y0) to tb and return the terminal state. Used to
/// evaluate the event function at trial times while refining a crossing.
template <std::size_t N, class RHS>
Vec<N> state_at(const RHS& rhs, const Vec<N>& y0, double t0, double tb,
                const IntegratorConfig& cfg) {
    if (tb <= t0) return y0;
    IntegratorConfig c = cfg;
    c.dense_output = false;
    Stepper<N, RHS> st(rhs, c);
    st.start(y0, t0, tb - t0);
    while (st.t() < tb - 1e-16 * std::fabs(tb)) st.advance(tb);
    return st.y();
}

}  // namespace detail

template <std::size_t N, class RHS>
void finalize_record(Trajectory<N>* record, const Stepper<N, RHS>& st,
                     const SectionHit<N>* hit = nullptr) {
    if (!record) return;
    record->n_accepted = st.accepted();
    record->n_rejected = st.rejected();
    record->n_rhs_evals = st.rhs_evals();
    if (hit) {
        // replace the overshoot point with the refined crossing
        record->times.back() = hit->time;
        record->states.back() = hit->state;
    }
}

/// Integrate until the section event fires (respecting crossing direction and
/// the post-start deadband), refine the crossing time until |g| falls below
/// the section tolerance, and return the crossing state. Non-terminal
/// sections keep integrating and return the last crossing before the horizon;
/// `all_hits`, when given, collects every crossing.
template <std::size_t N, class RHS>
SectionHit<N> integrate_to_section(const RHS& rhs, const Vec<N>& y0, double t0,
                                   const SectionSpec<N>& sec, const IntegratorConfig& cfg,
                                   double horizon, Trajectory<N>* record = nullptr,
                                   std::vector<SectionHit<N>>* all_hits = nullptr) {
    if (!sec.g) throw std::domain_error("integrate_to_section: missing event function");
    if (!(horizon > 0.0)) throw std::domain_error("integrate_to_section: horizon must be > 0");

    auto wanted = [&](double ga, double gb) {
        if (sec.direction > 0) return ga < 0.0 && gb > 0.0;
        if (sec.direction < 0) return ga > 0.0 && gb < 0.0;
        return (ga < 0.0 && gb > 0.0) || (ga > 0.0 && gb < 0.0);
    };

    const double t_end = t0 + horizon;
    std::optional<SectionHit<N>> last_hit;
    Vec<N> y_start = y0;
    double t_start = t0;

    if (record) {
        record->times.push_back(t0);
        record->states.push_back(y0);
    }

    while (t_start < t_end) {
        Stepper<N, RHS> st(rhs, cfg);
        st.start(y_start, t_start, t_end - t_start);
        const double arm_time = t_start + sec.deadband;
        double g_prev = sec.g(y_start);
        std::optional<SectionHit<N>> hit;

        while (st.t() < t_end) {
            st.advance(t_end);
            if (record) {
                record->times.push_back(st.t());
                record->states.push_back(st.y());
            }
            const double g_new = sec.g(st.y());
            const bool armed = st.t() > arm_time;
            if (armed && g_new == 0.0 &&
                (sec.direction == 0 || (sec.direction > 0) == (g_prev < 0.0))) {
                hit = SectionHit<N>{st.y(), st.t(), 0.0};
                finalize_record(record, st);
                break;
            }
            if (armed && wanted(g_prev, g_new)) {
                // bracket [t_prev, t]; refine with Illinois on re-integrated states
                double ta = st.t_prev(), tb = st.t();
                double ga = sec.g(st.y_prev()), gb = g_new;
                // crossings inside the deadband are not eligible
                if (ta < arm_time) {
                    const Vec<N> ya = detail::state_at(rhs, st.y_prev(), ta, arm_time, cfg);
                    const double gaa = sec.g(ya);
                    if (!wanted(gaa, gb)) {
                        g_prev = g_new;
                        continue;
                    }
                    ta = arm_time;
                    ga = gaa;
                }
                Vec<N> best = st.y();
                double tbest = tb, gbest = gb;
                int side = 0;
                for (int it = 0; it < 80 && std::fabs(gbest) > sec.tolerance; ++it) {
                    double tm = tb - gb * (tb - ta) / (gb - ga);
                    if (!(tm > ta) || !(tm < tb)) tm = 0.5 * (ta + tb);
                    const Vec<N> ym = detail::state_at(rhs, st.y_prev(), st.t_prev(), tm, cfg);
                    const double gm = sec.g(ym);
                    if (std::fabs(gm) < std::fabs(gbest)) {
                        gbest = gm;
                        tbest = tm;
                        best = ym;
                    }
                    if ((gm > 0.0) == (gb > 0.0)) {
                        tb = tm;
                        gb = gm;
                        if (side == -1) ga *= 0.5;
                        side = -1;
                    } else {
                        ta = tm;
                        ga = gm;
                        if (side == +1) gb *= 0.5;
                        side = +1;
                    }
                    if (tb - ta < 1e-15 * std::fmax(1.0, std::fabs(tb))) break;
                }
                hit = SectionHit<N>{best, tbest, gbest};
                finalize_record(record, st, &*hit);
                break;
            }
            g_prev = g_new;
        }

        if (!hit) break;  // horizon reached without another crossing
        last_hit = hit;
        if (all_hits) all_hits->push_back(*hit);
        if (sec.terminal) return *hit;
        y_start = hit->state;
        t_start = hit->time;
    }

    if (last_hit) return *last_hit;
    throw NoCrossingError("integrate_to_section: no crossing within horizon (t0=" +
                          std::to_string(t0) + ", horizon=" + std::to_string(horizon) + ")");
}

}  // namespace olsen
