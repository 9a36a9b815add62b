#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "olsen/integrate.hpp"
#include "olsen/loops.hpp"

using namespace olsen;
using Catch::Approx;

namespace {

LoopSpec fig_loop() {
    // launch corner of the delayed candidate at mu = 1.3
    return LoopSpec{1.402582, 1.019835, 0.062, 3.93};
}

}  // namespace

TEST_CASE("loop profile basics", "[loops]") {
    const LoopSpec sp = fig_loop();
    CHECK(loop_y(sp.alpha1, sp) == Approx(0.0).margin(1e-14));

    // slope at the launch point, finite differences vs closed form
    const double h = 1e-7;
    const double fd = (loop_y(sp.alpha1 + h, sp) - loop_y(sp.alpha1 - h, sp)) / (2.0 * h);
    const double closed = sp.kappa * (1.0 - 2.0 * sp.alpha1 * sp.beta1) / (sp.alpha1 * sp.beta1);
    CHECK(fd == Approx(closed).epsilon(1e-6));
    CHECK(loop_dyda(sp.alpha1, sp) == Approx(closed).epsilon(1e-12));

    CHECK_THROWS_AS(loop_y(-1.0, sp), std::domain_error);
    const LoopSpec bad{1.0, 0.01, 0.062, 3.93};  // K1 < 0
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("integration oracle follows the closed-form profile", "[loops][oracle]") {
    const LoopSpec sp = fig_loop();
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-14;
    const LoopRhs rhs{sp.eps_b, sp.kappa};

    SectionSpec<3> landing;
    landing.g = [](const Vec3& v) { return v[2] - 1e-9; };
    landing.direction = -1;
    landing.deadband = 0.1;
    Trajectory<3> tr;
    const auto hit = integrate_to_section(rhs, Vec3{sp.alpha1, sp.beta1, 1e-9}, 0.0, landing,
                                          cfg, 400.0, &tr);

    // profile agreement along the run (the 1e-9 launch offset rides along)
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        const auto& s = tr.states[i];
        if (s[0] <= 0.0) continue;
        CHECK(std::fabs(s[2] - loop_y(s[0], sp)) < 1e-6);
        // carrier-line conservation
        CHECK(std::fabs(s[1] - invariant_line(sp, s[0])) < 1e-8);
    }

    // terminal abscissa matches the transcendental landing point
    CHECK(hit.state[0] == Approx(landing_point(sp)).margin(1e-5));
}

TEST_CASE("extrema of the profile", "[loops]") {
    const LoopSpec sp = fig_loop();
    const auto ex = loop_extrema(sp);
    CHECK(ex.a_plus > 0.0);
    CHECK(ex.a_minus < 0.0);
    CHECK(loop_dyda(ex.a_plus, sp) == Approx(0.0).margin(1e-10));
    CHECK(loop_y(ex.a_plus, sp) > 0.0);
    CHECK(ex.a_plus < sp.alpha1);

    SECTION("grazing launch: 2 a1 b1 = 1 puts the maximum at zero height") {
        const LoopSpec graze{1.0, 0.5, 0.062, 3.93};
        const auto e = loop_extrema(graze);
        CHECK(loop_y(e.a_plus, graze) == Approx(0.0).margin(1e-12));
    }

    SECTION("extrema sit on {2ab = 1} and approach 1/(2 b1) as eps_b -> 0") {
        double prev_err = 1.0;
        for (double eb : {1e-3, 1e-4, 1e-5}) {
            const LoopSpec s{1.3, 1.05, eb, 3.93};
            const auto e = loop_extrema(s);
            const double b_at = invariant_line(s, e.a_plus);
            CHECK(2.0 * e.a_plus * b_at == Approx(1.0).epsilon(1e-10));
            const double err = std::fabs(e.a_plus - 1.0 / (2.0 * s.beta1));
            CHECK(err < prev_err);
            prev_err = err;
        }
    }
}

TEST_CASE("landing point", "[loops]") {
    const LoopSpec sp = fig_loop();
    const double a2 = landing_point(sp);
    CHECK(std::fabs(loop_y(a2, sp)) < 1e-12);
    CHECK(a2 < loop_extrema(sp).a_plus);
    CHECK(a2 > 0.0);

    SECTION("collapsed loop at the tangency limit") {
        const double b1 = (1.0 + 1e-12) / 2.0;
        const LoopSpec tangent{1.0, b1, 0.062, 3.93};
        const double land = landing_point(tangent);
        CHECK(land == Approx(loop_extrema(tangent).a_plus).margin(1e-3));
        CHECK(land == Approx(1.0).margin(1e-3));
    }

    CHECK_THROWS_AS(landing_point(LoopSpec{0.4, 0.9, 0.062, 3.93}), std::domain_error);
}

TEST_CASE("carrier line", "[loops]") {
    const LoopSpec sp = fig_loop();
    CHECK(invariant_line(sp, sp.alpha1) == Approx(sp.beta1));
    const double a2 = landing_point(sp);
    const double b2 = invariant_line(sp, a2);
    CHECK(sp.beta1 == Approx(sp.eps_b * sp.alpha1 + b2 - sp.eps_b * a2).epsilon(1e-12));
    CHECK(on_line(a2, b2, sp));
    CHECK_FALSE(on_line(a2, b2 + 1e-6, sp));
}

TEST_CASE("single-hump shape and tails", "[loops][property]") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> ua(0.8, 2.0), ub(0.9, 1.25);
    int tested = 0;
    while (tested < 8) {
        const LoopSpec sp{ua(rng), ub(rng), 0.062, 3.93};
        if (!(2.0 * sp.alpha1 * sp.beta1 > 1.05) || !(sp.K1() > 0.0)) continue;
        ++tested;
        const double a2 = landing_point(sp);

        // exactly one interior sign change of y on (0, alpha1)
        int flips = 0;
        double prev = loop_y(a2 * 1e-3, sp);
        for (int i = 1; i <= 800; ++i) {
            const double a = a2 * 1e-3 + (sp.alpha1 * (1.0 - 1e-9) - a2 * 1e-3) * i / 800.0;
            const double y = loop_y(a, sp);
            if (prev * y < 0.0) ++flips;
            prev = y;
        }
        CHECK(flips == 1);

        // exactly one interior maximum
        int slope_flips = 0;
        prev = loop_dyda(a2 * 1e-3, sp);
        for (int i = 1; i <= 800; ++i) {
            const double a = a2 * 1e-3 + (sp.alpha1 - a2 * 1e-3) * i / 800.0;
            const double d = loop_dyda(a, sp);
            if (prev * d < 0.0) ++slope_flips;
            prev = d;
        }
        CHECK(slope_flips == 1);

        // monotone dive toward -inf on the left tail
        CHECK(loop_y(a2 / 10.0, sp) < loop_y(a2 / 2.0, sp));
        CHECK(loop_y(a2 / 2.0, sp) < 0.0);
    }
}

TEST_CASE("loop polyline sampling", "[loops]") {
    const LoopSpec sp = fig_loop();
    const auto pts = loop_polyline(sp, 500);
    REQUIRE(pts.size() == 500);
    CHECK(pts.front()[0] == Approx(landing_point(sp)).epsilon(1e-10));
    CHECK(pts.back()[0] == Approx(sp.alpha1).epsilon(1e-12));
    for (const auto& p : pts) {
        CHECK(p[2] >= 0.0);
        CHECK(std::fabs(p[1] - invariant_line(sp, p[0])) < 1e-12);
    }
}
