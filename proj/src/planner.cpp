#include "tkslt/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tkslt/lambert.hpp"

namespace tkslt {

namespace {

void check_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0 || alpha >= 1.0) {
        throw invalid_input("planner: alpha must lie in (0,1)");
    }
}

void check_pos(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw invalid_input(std::string("planner: ") + name +
                            " must be finite and > 0");
    }
}

}  // namespace

double expected_tokens(double alpha, std::uint32_t gamma) {
    if (gamma == 0) {
        throw invalid_input("expected_tokens: gamma must be >= 1");
    }
    if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
        throw invalid_input("expected_tokens: alpha must lie in [0,1]");
    }
    if (alpha == 1.0) {
        return static_cast<double>(gamma) + 1.0;
    }
    return (1.0 - std::pow(alpha, static_cast<double>(gamma) + 1.0)) / (1.0 - alpha);
}

double speedup(double alpha, std::uint32_t gamma, double l) {
    check_pos(l, "l");
    return expected_tokens(alpha, gamma) / (1.0 + static_cast<double>(gamma) * l);
}

double gamma_zero(double alpha, double l) {
    check_alpha(alpha);
    check_pos(l, "l");
    if (l >= 1.0) {
        throw domain_error("gamma_zero: no interior optimum for l >= 1");
    }
    const double ln_a = std::log(alpha);
    // the stationary condition in continuous gamma rearranges to
    // w e^w = -(1/e) alpha^(1/l - 1); the power underflows doubles for
    // small l, so hand the exponent over in log form
    const double u = -1.0 + (1.0 / l - 1.0) * ln_a;
    const double w = lambert_wm1_log(u);
    return (w + 1.0) / ln_a - 1.0 / l;
}

std::pair<std::uint32_t, double> odld(double alpha, double b, double c) {
    check_alpha(alpha);
    check_pos(b, "b");
    check_pos(c, "c");
    const double l = b + c;
    const double g0 = gamma_zero(alpha, l);
    if (g0 < 1.0) {
        return {1u, speedup(alpha, 1u, l)};
    }
    const auto lo = static_cast<std::uint32_t>(std::floor(g0));
    const auto hi = static_cast<std::uint32_t>(std::ceil(g0));
    if (lo == hi) {
        return {lo, speedup(alpha, lo, l)};
    }
    const double s_lo = speedup(alpha, lo, l);
    const double s_hi = speedup(alpha, hi, l);
    if (s_hi > s_lo) {
        return {hi, s_hi};
    }
    return {lo, s_lo};
}

Plan as2(double alpha, double b, double c) {
    check_alpha(alpha);
    check_pos(b, "b");
    check_pos(c, "c");
    const double l = b + c;
    if (l >= 1.0) {
        // every drafted token already costs at least a full verifier step
        return {Mode::standalone, 1u, speedup(alpha, 1u, l),
                std::numeric_limits<double>::quiet_NaN()};
    }
    const double g0 = gamma_zero(alpha, l);
    const auto [gamma, s] = odld(alpha, b, c);
    // offload only when it beats decoding in place; the break-even point
    // itself stays with the offload side
    const Mode mode = s < 1.0 ? Mode::standalone : Mode::dsd;
    return {mode, gamma, s, g0};
}

std::pair<std::uint32_t, double> brute_force_gamma(double alpha, double l,
                                                   std::uint32_t gamma_max) {
    if (gamma_max == 0) {
        throw invalid_input("brute_force_gamma: gamma_max must be >= 1");
    }
    std::uint32_t best = 1;
    double best_s = speedup(alpha, 1u, l);
    for (std::uint32_t g = 2; g <= gamma_max; ++g) {
        const double s = speedup(alpha, g, l);
        if (s > best_s) {
            best_s = s;
            best = g;
        }
    }
    return {best, best_s};
}

std::vector<SweepRow> sweep_table(const std::vector<double>& alphas,
                                  const std::vector<double>& ls) {
    std::vector<double> as = alphas;
    std::vector<double> bs = ls;
    std::sort(as.begin(), as.end());
    std::sort(bs.begin(), bs.end());
    std::vector<SweepRow> rows;
    rows.reserve(as.size() * bs.size());
    for (double a : as) {
        for (double l : bs) {
            rows.push_back({a, l, as2(a, l / 2.0, l / 2.0)});
        }
    }
    return rows;
}

}  // namespace tkslt
