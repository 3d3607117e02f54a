#include "tkslt/lambert.hpp"

#include <cmath>
#include <limits>

namespace tkslt {

namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e
constexpr int kMaxIter = 100;

// Halley refinement of w*e^w = x from a branch-appropriate guess.
double halley(double w, double x) {
    for (int it = 0; it < kMaxIter; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        // f' = e^w (w+1), f'' = e^w (w+2)
        const double denom = ew * wp1 - f * (w + 2.0) / (2.0 * wp1);
        const double dw = f / denom;
        w -= dw;
        if (std::fabs(dw) <= 1e-14 * (1.0 + std::fabs(w))) {
            return w;
        }
    }
    throw convergence_error("lambert: iteration cap reached");
}

}  // namespace

double lambert_w0(double x) {
    if (!std::isfinite(x) || x < -kInvE) {
        throw domain_error("lambert_w0: argument below -1/e");
    }
    if (x == 0.0) {
        return 0.0;
    }

    double w;
    const double q = 2.0 * (1.0 + std::exp(1.0) * x);
    if (q <= 0.0) {
        return -1.0;  // x == -1/e up to rounding
    }
    if (x < 1.0) {
        // series about the branch point: w = -1 + sqrt(q) - q/3 + ...
        const double r = std::sqrt(q);
        w = -1.0 + r - q / 3.0 + 11.0 * r * q / 72.0;
    } else {
        // asymptotic for large x
        const double lx = std::log(x);
        w = x >= std::exp(1.0) ? lx - std::log(lx) : lx;
        if (w <= -1.0) {
            w = -0.5;
        }
    }
    return halley(w, x);
}

double lambert_wm1(double x) {
    if (!std::isfinite(x) || x < -kInvE || x >= 0.0) {
        throw domain_error("lambert_wm1: argument outside [-1/e, 0)");
    }

    const double q = 2.0 * (1.0 + std::exp(1.0) * x);
    if (q <= 0.0) {
        return -1.0;
    }

    double w;
    if (x > -0.25) {
        // near zero: w ~ ln(-x) - ln(-ln(-x))
        const double l1 = std::log(-x);
        w = l1 - std::log(-l1);
    } else {
        // near the branch point: descend along -1 - sqrt(q)
        const double r = std::sqrt(q);
        w = -1.0 - r - q / 3.0;
    }
    return halley(w, x);
}

double lambert_wm1_log(double u) {
    if (!std::isfinite(u) || u > -1.0) {
        throw domain_error("lambert_wm1_log: argument must be <= -1");
    }
    if (u == -1.0) {
        return -1.0;
    }

    // fixed point w <- u - ln(-w) is a contraction on this branch;
    // a few sweeps land close enough for Halley on g(w) = ln(-w) + w - u
    double w = u;
    for (int it = 0; it < 8; ++it) {
        w = u - std::log(-w);
    }
    for (int it = 0; it < kMaxIter; ++it) {
        const double g = std::log(-w) + w - u;
        const double gp = 1.0 / w + 1.0;     // g'
        const double gpp = -1.0 / (w * w);   // g''
        const double denom = gp - g * gpp / (2.0 * gp);
        const double dw = g / denom;
        w -= dw;
        if (std::fabs(dw) <= 1e-14 * (1.0 + std::fabs(w))) {
            return w;
        }
    }
    throw convergence_error("lambert_wm1_log: iteration cap reached");
}

}  // namespace tkslt
