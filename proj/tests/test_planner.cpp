#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "tkslt/planner.hpp"

using namespace tkslt;

namespace {

// independent oracle for the stationary point: bisection on the
// derivative numerator -a^(g+1) ln(a) (1 + l g) - l (1 - a^(g+1)),
// positive below the root and negative above it
double numerator(double a, double l, double g) {
    const double ag = std::pow(a, g + 1.0);
    return -ag * std::log(a) * (1.0 + l * g) - l * (1.0 - ag);
}

double bisect_gamma_zero(double a, double l) {
    // the stationary point can sit below zero when the overhead is large;
    // the numerator is only defined (and positive) for g > -1/l
    double lo = -1.0 / l + 1e-9, hi = 1e4;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (numerator(a, l, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

const std::vector<double> kAlphaGrid = [] {
    std::vector<double> v;
    for (int i = 1; i <= 19; ++i) {
        v.push_back(i * 0.05);
    }
    return v;
}();

const std::vector<double> kLGrid = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3,
                                    0.4,  0.5,  0.6,  0.7, 0.8, 0.9};

}  // namespace

TEST_CASE("expected tokens per round") {
    CHECK(expected_tokens(0.0, 1) == 1.0);
    CHECK(expected_tokens(0.0, 7) == 1.0);
    CHECK(expected_tokens(0.5, 2) == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(expected_tokens(1.0, 4) == 5.0);
    // continuous approach to the alpha = 1 limit
    CHECK(expected_tokens(1.0 - 1e-12, 4) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK_THROWS_AS(expected_tokens(0.5, 0), invalid_input);
    CHECK_THROWS_AS(expected_tokens(1.5, 1), invalid_input);
    CHECK_THROWS_AS(expected_tokens(-0.1, 1), invalid_input);
}

TEST_CASE("speedup closed form") {
    // gamma = 1: (1 - a^2) / ((1 + l)(1 - a)) = (1 + a) / (1 + l)
    CHECK(speedup(0.3, 1, 0.1) == doctest::Approx(1.3 / 1.1).epsilon(1e-15));
    CHECK(speedup(0.4, 1, 0.6) == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(speedup(0.8, 14, 0.01) == doctest::Approx(4.2316474909).epsilon(1e-9));
    CHECK_THROWS_AS(speedup(0.5, 1, 0.0), invalid_input);
}

TEST_CASE("speedup never reaches the perfect-acceptance bound") {
    for (double a : kAlphaGrid) {
        for (double l : {0.01, 0.2, 0.6}) {
            for (std::uint32_t g = 1; g <= 200; ++g) {
                CHECK(speedup(a, g, l) < 1.0 / (1.0 - a));
            }
        }
    }
}

TEST_CASE("speedup strictly decreases in the overhead") {
    for (double a : {0.2, 0.5, 0.8}) {
        for (std::uint32_t g : {1u, 3u, 10u}) {
            double prev = speedup(a, g, 0.005);
            for (double l : {0.01, 0.05, 0.2, 0.5, 0.9, 1.5}) {
                const double s = speedup(a, g, l);
                CHECK(s < prev);
                prev = s;
            }
        }
    }
}

TEST_CASE("stationary point matches the bisection oracle") {
    for (double a : kAlphaGrid) {
        for (double l : kLGrid) {
            const double g0 = gamma_zero(a, l);
            CHECK(g0 == doctest::Approx(bisect_gamma_zero(a, l)).epsilon(1e-9));
            // and the derivative numerator vanishes there
            CHECK(std::fabs(numerator(a, l, g0)) <= 1e-9);
        }
    }
}

TEST_CASE("stationary point spot values") {
    CHECK(gamma_zero(0.8, 0.01) == doctest::Approx(13.6630647279).epsilon(1e-8));
    CHECK(gamma_zero(0.6, 0.1) == doctest::Approx(2.9779038426).epsilon(1e-8));
    CHECK(gamma_zero(0.4, 0.4) < 1.0);
    CHECK_THROWS_AS(gamma_zero(0.5, 1.0), domain_error);
    CHECK_THROWS_AS(gamma_zero(0.5, 1.3), domain_error);
    CHECK_THROWS_AS(gamma_zero(0.0, 0.1), invalid_input);
    CHECK_THROWS_AS(gamma_zero(1.0, 0.1), invalid_input);
}

TEST_CASE("draft length picks the better integer neighbor") {
    CHECK(odld(0.8, 0.005, 0.005).first == 14);
    CHECK(odld(0.6, 0.05, 0.05).first == 3);
    CHECK(odld(0.4, 0.1, 0.1).first == 1);
    // gamma_zero below one clamps
    CHECK(odld(0.4, 0.2, 0.2).first == 1);
    CHECK(odld(0.4, 0.2, 0.2).second == doctest::Approx(speedup(0.4, 1, 0.4)));
}

TEST_CASE("draft length agrees with exhaustive search on the whole grid") {
    int cells = 0;
    for (double a : kAlphaGrid) {
        for (double l : kLGrid) {
            ++cells;
            const auto [bg, bs] = brute_force_gamma(a, l, 200);
            const auto [og, os] = odld(a, l / 2.0, l / 2.0);
            CHECK(og == bg);
            CHECK(os == doctest::Approx(bs).epsilon(1e-14));
        }
    }
    CHECK(cells == 228);
}

TEST_CASE("speedup is unimodal in the draft length") {
    for (double a : {0.3, 0.6, 0.8, 0.95}) {
        for (double l : {0.01, 0.05, 0.2}) {
            if (gamma_zero(a, l) <= 1.0) {
                continue;
            }
            const auto [peak, ps] = brute_force_gamma(a, l, 200);
            for (std::uint32_t g = 2; g <= 200; ++g) {
                const double prev = speedup(a, g - 1, l);
                const double cur = speedup(a, g, l);
                if (g <= peak) {
                    CHECK(cur > prev);
                } else {
                    CHECK(cur < prev);
                }
            }
        }
    }
}

TEST_CASE("mode selection across the operating grid") {
    // healthy offload point
    Plan p = as2(0.8, 0.005, 0.005);
    CHECK(p.mode == Mode::dsd);
    CHECK(p.gamma_star == 14);
    CHECK(p.gamma_zero == doctest::Approx(13.663).epsilon(1e-3));

    // overhead at parity: the break-even point stays with offload
    p = as2(0.4, 0.2, 0.2);
    CHECK(p.mode == Mode::dsd);
    CHECK(p.gamma_star == 1);
    CHECK(p.s_star == 1.0);

    // slow drafts lose
    p = as2(0.4, 0.3, 0.3);
    CHECK(p.mode == Mode::standalone);
    CHECK(p.s_star == doctest::Approx(0.875));

    p = as2(0.6, 0.3, 0.3);
    CHECK(p.mode == Mode::standalone);

    p = as2(0.8, 0.3, 0.3);
    CHECK(p.mode == Mode::dsd);
    CHECK(p.gamma_star == 1);
    CHECK(p.s_star == doctest::Approx(1.125));

    // overhead >= 1: a drafted token costs a full verifier step
    p = as2(0.6, 0.6, 0.6);
    CHECK(p.mode == Mode::standalone);
    CHECK(p.gamma_star == 1);
    CHECK(std::isnan(p.gamma_zero));
    CHECK(p.s_star < 1.0);

    CHECK_THROWS_AS(as2(0.5, -0.1, 0.2), invalid_input);
    CHECK_THROWS_AS(as2(1.2, 0.1, 0.2), invalid_input);
}

TEST_CASE("sweep covers the cross product in sorted order") {
    const auto rows = sweep_table({0.8, 0.4, 0.6}, {0.2, 0.01, 0.1, 0.6, 0.4});
    REQUIRE(rows.size() == 15);

    const std::uint32_t want_gamma[15] = {4, 2, 1, 1, 1, 7, 3, 2, 1, 1, 14, 6, 4, 2, 1};
    const bool want_standalone[15] = {false, false, false, false, true,
                                      false, false, false, false, true,
                                      false, false, false, false, false};
    for (int i = 0; i < 15; ++i) {
        CHECK(rows[i].plan.gamma_star == want_gamma[i]);
        CHECK((rows[i].plan.mode == Mode::standalone) == want_standalone[i]);
    }
    // sorted by (alpha, L)
    for (int i = 1; i < 15; ++i) {
        const bool ordered = rows[i - 1].alpha < rows[i].alpha ||
                             (rows[i - 1].alpha == rows[i].alpha &&
                              rows[i - 1].l < rows[i].l);
        CHECK(ordered);
    }

    CHECK(sweep_table({}, {0.1}).empty());
    CHECK(sweep_table({0.5}, {}).empty());
}

TEST_CASE("dominant direction of the plan surface") {
    // larger overlap never shortens the optimal draft at fixed overhead
    for (double l : {0.01, 0.1, 0.3}) {
        std::uint32_t prev = 1;
        for (double a : kAlphaGrid) {
            const auto [g, s] = odld(a, l / 2.0, l / 2.0);
            CHECK(g >= prev);
            prev = g;
        }
    }
}
