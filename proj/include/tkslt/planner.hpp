#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tkslt/common.hpp"

namespace tkslt {

enum class Mode {
    dsd,         // draft on device, verify on edge
    standalone,  // device generates alone; offload never pays off
};

struct Plan {
    Mode mode;
    std::uint32_t gamma_star;  // chosen draft length per round
    double s_star;             // speedup at gamma_star (vs edge-only decode)
    double gamma_zero;         // real-valued stationary point; NaN when L >= 1
};

// Mean tokens committed per round at draft length gamma: the accepted
// prefix plus either the corrective or the bonus token.
double expected_tokens(double alpha, std::uint32_t gamma);

// Throughput ratio against running the verifier alone, with per-round
// overhead l = b + c expressed in verifier-step units.
double speedup(double alpha, std::uint32_t gamma, double l);

// Real gamma maximizing the speedup, from the closed form on the lower
// Lambert branch. Requires alpha in (0,1) and 0 < l < 1.
double gamma_zero(double alpha, double l);

// Integer draft length and its speedup: clamp gamma_zero below 1,
// otherwise the better of its floor and ceiling (floor on exact tie).
std::pair<std::uint32_t, double> odld(double alpha, double b, double c);

// Mode decision plus draft length. b + c >= 1, or a speedup below
// parity at the chosen gamma, means the device should decode alone.
Plan as2(double alpha, double b, double c);

// Exhaustive argmax over gamma in [1, gamma_max]; ties keep the smaller.
std::pair<std::uint32_t, double> brute_force_gamma(double alpha, double l,
                                                   std::uint32_t gamma_max);

struct SweepRow {
    double alpha;
    double l;
    Plan plan;
};

// Cartesian sweep, rows ordered by (alpha, l); overhead is split evenly
// between the transmission and drafting terms.
std::vector<SweepRow> sweep_table(const std::vector<double>& alphas,
                                  const std::vector<double>& ls);

}  // namespace tkslt
