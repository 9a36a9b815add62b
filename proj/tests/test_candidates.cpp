#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "olsen/candidates.hpp"

using namespace olsen;
using Catch::Approx;

namespace {

ScaledParams fig_params() { return figure_preset("fig6"); }

// residuals of the four-equation periodicity system for an assembled orbit
struct ClosureResiduals {
    double delay, exit_b, loop, line;
};

ClosureResiduals closure_residuals(const CandidateOrbit& o, const ScaledParams& sp) {
    const double A = o.mu / sp.alpha;
    const double expo = (o.kind == CandidateCase::Canard)
                            ? -2.0 * sp.alpha * (sp.xi - o.beta0) / sp.eps_b
                            : -sp.alpha * (sp.xi - o.beta0) / sp.eps_b;
    ClosureResiduals r{};
    r.delay = o.alpha1 - (A + std::exp(expo) * (o.alpha0 - A));
    r.exit_b = o.beta1 - ((o.kind == CandidateCase::Canard) ? 2.0 * sp.xi - o.beta0 : sp.xi);
    r.loop = 2.0 * (o.alpha0 - o.alpha1) * (o.beta1 - sp.eps_b * o.alpha1) -
             std::log(o.beta1 * o.alpha0 /
                      (o.alpha1 * (o.beta1 + sp.eps_b * (o.alpha0 - o.alpha1))));
    r.line = o.beta1 - sp.eps_b * o.alpha1 - o.beta0 + sp.eps_b * o.alpha0;
    return r;
}

}  // namespace

TEST_CASE("closure functions vanish at the exchange ordinate", "[candidates]") {
    const ScaledParams sp = fig_params();
    for (double mu : {1.1, 1.3, 1.5}) {
        CHECK(std::fabs(w_c(sp.xi, sp, mu)) < 1e-12);
        CHECK(std::fabs(w_j(sp.xi, sp, mu)) < 1e-12);
        // series continuation is smooth through the removable point
        CHECK(std::fabs(w_c(sp.xi - 1e-9, sp, mu)) < 1e-8);
        CHECK(std::fabs(w_j(sp.xi - 1e-9, sp, mu)) < 1e-8);
    }
}

TEST_CASE("derivative of the canard closure at the exchange ordinate", "[candidates][oracle]") {
    const ScaledParams sp = fig_params();
    for (double mu : {1.2, 1.3, 1.45}) {
        const double h = 1e-6;
        const double fd = (w_c(sp.xi + h, sp, mu) - w_c(sp.xi - h, sp, mu)) / (2.0 * h);
        const double closed = 2.0 / sp.xi * (sp.eps_b - sp.eps_b * mu + sp.alpha * sp.xi) *
                              (sp.alpha - 2.0 * (mu - 1.0) * sp.xi) / (mu - 1.0);
        CHECK(fd == Approx(closed).epsilon(1e-5));
    }
    // the jump closure carries single contraction powers: half the slope
    const double mu = 1.3, h = 1e-6;
    const double fdj = (w_j(sp.xi + h, sp, mu) - w_j(sp.xi - h, sp, mu)) / (2.0 * h);
    const double closed = 2.0 / sp.xi * (sp.eps_b - sp.eps_b * mu + sp.alpha * sp.xi) *
                          (sp.alpha - 2.0 * (mu - 1.0) * sp.xi) / (mu - 1.0);
    CHECK(fdj == Approx(0.5 * closed).epsilon(1e-5));
}

TEST_CASE("closure values at the published corner ordinates", "[candidates]") {
    const ScaledParams sp = fig_params();
    CHECK(std::fabs(w_c(0.9402, sp, 1.3)) < 1e-3);
    CHECK(std::fabs(w_j(0.9023, sp, 1.3)) < 1e-3);
}

TEST_CASE("log-branch failures are reported with the offending factor", "[candidates]") {
    const ScaledParams sp = fig_params();
    // below the pole ordinate the entry abscissa goes negative and the
    // logarithm argument with it
    CHECK_THROWS_AS(w_c(0.70, sp, 1.3), LogBranchError);
    try {
        w_c(0.70, sp, 1.3);
    } catch (const LogBranchError& e) {
        CHECK(std::isfinite(e.offending));
    }
}

TEST_CASE("entry abscissa from the entry ordinate", "[candidates]") {
    // the published ordinates are 4-digit roundings, which moves the abscissa
    // by a few 1e-4; compare at that resolution
    const ScaledParams sp = fig_params();
    CHECK(alpha0_from_beta0(0.9402, sp, 1.3, CandidateCase::Canard) ==
          Approx(0.1176).margin(1e-3));
    CHECK(alpha0_from_beta0(0.9023, sp, 1.3, CandidateCase::Jump) ==
          Approx(0.1362).margin(1e-3));
}

TEST_CASE("candidate orbits close up at the published corners", "[candidates]") {
    const ScaledParams sp = fig_params();

    const auto canard = solve_candidate(CandidateCase::Canard, sp, 1.3);
    REQUIRE(canard.status == CandidateStatus::Found);
    CHECK(canard.orbit->alpha0 == Approx(0.1176).margin(1e-3));
    CHECK(canard.orbit->beta0 == Approx(0.9402).margin(1e-3));
    CHECK(canard.orbit->beta1 == Approx(2.0 * sp.xi - canard.orbit->beta0).epsilon(1e-12));
    CHECK(canard.orbit->closure_residual < 1e-8);

    const auto jump = solve_candidate(CandidateCase::Jump, sp, 1.3);
    REQUIRE(jump.status == CandidateStatus::Found);
    CHECK(jump.orbit->alpha0 == Approx(0.1362).margin(1e-3));
    CHECK(jump.orbit->beta0 == Approx(0.9023).margin(1e-3));
    CHECK(jump.orbit->beta1 == sp.xi);
    CHECK(jump.orbit->closure_residual < 1e-8);

    // constraints of an admissible entry corner
    for (const auto* o : {&*canard.orbit, &*jump.orbit}) {
        CHECK(o->beta0 < sp.xi);
        CHECK(2.0 * o->alpha0 * o->beta0 < 1.0);
        CHECK(2.0 * o->alpha1 * o->beta1 > 1.0);
    }
}

TEST_CASE("assembled corners satisfy the four-equation system", "[candidates][oracle]") {
    const ScaledParams sp = fig_params();
    for (auto kind : {CandidateCase::Canard, CandidateCase::Jump}) {
        const auto res = solve_candidate(kind, sp, 1.3);
        REQUIRE(res.status == CandidateStatus::Found);
        const auto r = closure_residuals(*res.orbit, sp);
        CHECK(std::fabs(r.delay) < 1e-9);
        CHECK(std::fabs(r.exit_b) < 1e-12);
        CHECK(std::fabs(r.loop) < 1e-9);
        CHECK(std::fabs(r.line) < 1e-9);
    }
}

TEST_CASE("no admissible root below mu = 1", "[candidates]") {
    const ScaledParams sp = fig_params();
    CHECK(solve_candidate(CandidateCase::Canard, sp, 0.9).status == CandidateStatus::NoRoot);
    CHECK(solve_candidate(CandidateCase::Jump, sp, 0.9).status == CandidateStatus::NoRoot);
}

TEST_CASE("roots are stable under grid refinement", "[candidates][property]") {
    const ScaledParams sp = fig_params();
    CandidateOptions coarse, fine;
    coarse.grid_n = 512;
    fine.grid_n = 2048;
    for (auto kind : {CandidateCase::Canard, CandidateCase::Jump}) {
        const auto a = solve_candidate(kind, sp, 1.3, coarse);
        const auto b = solve_candidate(kind, sp, 1.3, fine);
        REQUIRE(a.status == CandidateStatus::Found);
        REQUIRE(b.status == CandidateStatus::Found);
        CHECK(std::fabs(a.beta0_root - b.beta0_root) < 1e-6);
    }
}

TEST_CASE("mu windows of existence and their overlap", "[candidates]") {
    const ScaledParams sp = fig_params();
    const auto wc = mu_window_scan(CandidateCase::Canard, sp, 1.0, 1.8, 32);
    const auto wj = mu_window_scan(CandidateCase::Jump, sp, 1.0, 1.8, 32);
    auto contains = [](const std::vector<MuWindow>& ws, double mu) {
        for (const auto& w : ws)
            if (w.mu_lo <= mu && mu <= w.mu_hi) return true;
        return false;
    };
    CHECK(contains(wc, 1.3));
    CHECK(contains(wj, 1.3));
    const auto both = window_intersection(wc, wj);
    CHECK_FALSE(both.empty());
    CHECK_THROWS_AS(mu_window_scan(CandidateCase::Canard, sp, 1.0, 1.8, 8), std::domain_error);
}

TEST_CASE("candidate polyline is a closed curve in the fast variables", "[candidates]") {
    const ScaledParams sp = fig_params();
    const auto res = solve_candidate(CandidateCase::Canard, sp, 1.3);
    REQUIRE(res.status == CandidateStatus::Found);
    const auto poly = res.orbit->polyline4();
    REQUIRE(poly.size() > 100);
    const auto& first = poly.front();
    const auto& last = poly.back();
    CHECK(std::hypot(first[0] - last[0], first[1] - last[1]) < 1e-6);
    for (const auto& p : poly) {
        CHECK(p[2] >= 0.0);
        CHECK(p[3] >= 0.0);
    }
}
