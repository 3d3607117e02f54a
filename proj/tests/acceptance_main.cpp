// End-to-end acceptance gate: one line per criterion, exit code = number
// of criteria that failed. Tolerances are pinned here on purpose; loosen
// them only with a recorded reason.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "tkslt/lambert.hpp"
#include "tkslt/simkit.hpp"

using namespace tkslt;

namespace {

int g_failed = 0;

bool expect(bool ok, const char* what) {
    if (!ok) {
        std::fprintf(stderr, "  fail: %s\n", what);
    }
    return ok;
}

void report(const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) {
        ++g_failed;
    }
}

ChannelConfig demo_channel() {
    ChannelConfig cfg;
    cfg.uplink_rate = 50e6;
    cfg.downlink_rate = 50e6;
    cfg.prob_bits = 16;
    cfg.vocab_size = 32000;
    cfg.t_llm = 0.01024 / 0.23;
    cfg.t_slm = 0.07 * cfg.t_llm;
    return cfg;
}

ChannelConfig sim_channel(std::uint32_t vocab) {
    ChannelConfig cfg;
    cfg.uplink_rate = 1e6;
    cfg.downlink_rate = 1e6;
    cfg.prob_bits = 16;
    cfg.vocab_size = vocab;
    cfg.t_llm = 0.01;
    cfg.t_slm = 0.0007;
    return cfg;
}

SyntheticPairSpec static_spec(std::uint32_t vocab, double lambda, double temp,
                              std::uint64_t seed) {
    SyntheticPairSpec s;
    s.vocab_size = vocab;
    s.kind = PairKind::static_pair;
    s.overlap_lambda = lambda;
    s.target_temp = temp;
    s.seed = seed;
    return s;
}

// 1. the planner reproduces the pinned (overlap, overhead) grid
bool planner_grid() {
    bool ok = true;
    const auto rows = sweep_table({0.4, 0.6, 0.8}, {0.01, 0.1, 0.2, 0.4, 0.6});
    ok &= expect(rows.size() == 15, "grid size");
    const std::uint32_t want_gamma[15] = {4, 2, 1, 1, 1, 7, 3, 2, 1, 1,
                                          14, 6, 4, 2, 1};
    const bool want_standalone[15] = {false, false, false, false, true,
                                      false, false, false, false, true,
                                      false, false, false, false, false};
    for (int i = 0; i < 15; ++i) {
        ok &= expect(rows[i].plan.gamma_star == want_gamma[i], "gamma_star cell");
        ok &= expect((rows[i].plan.mode == Mode::standalone) == want_standalone[i],
                     "mode cell");
        ok &= expect(std::isfinite(rows[i].plan.gamma_zero), "gamma_zero finite");
    }
    return ok;
}

// 2. latency ratios across the sparsity ladder at 50 Mbit/s
bool latency_ladder() {
    bool ok = true;
    const ChannelConfig cfg = demo_channel();
    const std::uint32_t ks[5] = {3, 32, 320, 3200, 32000};
    const double want_l[5] = {0.0700, 0.0702, 0.0723, 0.093, 0.300};
    for (int i = 0; i < 5; ++i) {
        const LatencyParams lp = latency_params(cfg, ks[i]);
        ok &= expect(std::fabs(lp.l - want_l[i]) <= 0.0005, "L within 5e-4");
        ok &= expect(std::fabs(lp.c - 0.07) <= 1e-12, "c pinned");
    }
    return ok;
}

// 3. full-vocabulary uplink payload at 16-bit probabilities
bool payload_size() {
    return expect(ideal_uplink_bits(1, 32000, demo_channel()) == 512000u,
                  "512000 bits per drafted token");
}

// 4. draft-and-verify leaves the target law untouched
bool target_law_preserved() {
    bool ok = true;

    // analytic: per-token emission mass equals the target mass
    Rng rng(4242);
    int checked = 0;
    for (int pair = 0; pair < 1000; ++pair) {
        const std::uint32_t vocab = 2 + rng.next_u64() % 15;
        LogitVector slm_logits(vocab), llm_logits(vocab);
        for (double& v : slm_logits) {
            v = 2.0 * rng.gaussian();
        }
        for (double& v : llm_logits) {
            v = 2.0 * rng.gaussian();
        }
        const Distribution target = softmax_temp(llm_logits, 1.0);
        for (std::uint32_t k = 1; k <= vocab; ++k) {
            const Distribution draft = densify(top_k_sparsify(slm_logits, k));
            const double alpha = analytic_alpha(target, draft);
            if (1.0 - alpha < 1e-12) {
                continue;
            }
            const Distribution resid = residual(target, draft);
            for (std::uint32_t x = 0; x < vocab; ++x) {
                const double emit =
                    std::min(target.probs[x], draft.probs[x]) +
                    (1.0 - alpha) * resid.probs[x];
                ok &= expect(std::fabs(emit - target.probs[x]) <= 1e-12,
                             "one-step emission mass");
            }
            ++checked;
        }
    }
    ok &= expect(checked >= 5000, "enough (pair, k) cells");

    // sampled: 200k independent rounds against a mid-overlap pair
    const EquivalenceReport rep =
        equivalence_report(static_spec(16, 0.5, 1.0, 1), 1, 8, 200000, 424242);
    ok &= expect(rep.tv <= 0.01, "sampled TV within 1e-2");
    ok &= expect(rep.pass, "equivalence verdict");
    return ok;
}

// 5. measured acceptance tracks the analytic overlap
bool acceptance_estimator() {
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
        const std::uint32_t vocab = 8 + (i % 3) * 4;
        const double lambda = 0.3 + 0.028 * i;
        const SyntheticPairSpec spec =
            static_spec(vocab, lambda, 1.0, 100 + static_cast<std::uint64_t>(i));
        const std::uint32_t k =
            1 + static_cast<std::uint32_t>(mix64(i) % vocab);
        const double alpha = static_pair_alpha(spec, k);
        const Metrics m = monte_carlo(spec, 1, k, sim_channel(vocab), 100000,
                                      5000 + static_cast<std::uint64_t>(i));
        ok &= expect(std::fabs(m.empirical_alpha - alpha) <= 0.01,
                     "empirical alpha within 1e-2");
    }
    return ok;
}

// 6. mean committed tokens per round follow the closed form
bool tokens_per_round() {
    bool ok = true;
    const SyntheticPairSpec spec = static_spec(16, 0.55, 1.0, 21);
    const double alpha = static_pair_alpha(spec, 16);
    for (std::uint32_t gamma : {1u, 2u, 4u, 8u}) {
        const Metrics m = monte_carlo(spec, gamma, 16, sim_channel(16), 50000, 99);
        const double want = expected_tokens(alpha, gamma);
        ok &= expect(std::fabs(m.mean_tokens_per_round - want) / want <= 0.01,
                     "tokens per round within 1%");
    }
    return ok;
}

// 7. both Lambert branches solve w e^w = x to near machine accuracy
bool lambert_accuracy() {
    bool ok = true;
    const double inv_e = std::exp(-1.0);

    auto rel_residual = [](double w, double x) {
        return std::fabs(w * std::exp(w) - x) / std::fmax(std::fabs(x), 1e-30);
    };

    for (int i = 0; i < 300; ++i) {
        const double t = i / 299.0;
        const double pos = 1e-12 * std::pow(1e24, t);
        ok &= expect(rel_residual(lambert_w0(pos), pos) <= 1e-12,
                     "principal branch, positive x");
        const double neg = -(inv_e - 1e-12) * (1.0 - t) - 1e-15;
        ok &= expect(rel_residual(lambert_w0(neg), neg) <= 1e-12,
                     "principal branch, negative x");
        const double mag = 1e-300 * std::pow((inv_e - 1e-16) / 1e-300, t);
        const double w = lambert_wm1(-mag);
        ok &= expect(w <= -1.0, "lower branch stays below -1");
        ok &= expect(rel_residual(w, -mag) <= 1e-12, "lower branch residual");
    }

    ok &= expect(std::fabs(lambert_wm1(-inv_e) + 1.0) <= 1e-8, "branch point, lower");
    ok &= expect(std::fabs(lambert_w0(-inv_e) + 1.0) <= 1e-8, "branch point, principal");

    for (int i = 0; i < 200; ++i) {
        const double u = -1.0 - 29.0 * i / 199.0;
        const double direct = lambert_wm1(-std::exp(u));
        ok &= expect(std::fabs(lambert_wm1_log(u) - direct) <= 1e-9,
                     "log-domain agrees with direct");
    }
    return ok;
}

// 8. the closed-form draft length matches exhaustive search everywhere
bool closed_form_vs_search() {
    bool ok = true;
    int cells = 0;
    for (int ai = 1; ai <= 19; ++ai) {
        const double a = ai * 0.05;
        for (double l : {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7,
                         0.8, 0.9}) {
            const auto [og, os] = odld(a, l / 2.0, l / 2.0);
            const auto [bg, bs] = brute_force_gamma(a, l, 200);
            ok &= expect(og == bg, "gamma agrees with brute force");
            ok &= expect(std::fabs(os - bs) <= 1e-12 * bs, "speedup agrees");
            ++cells;
        }
    }
    ok &= expect(cells == 228, "full grid covered");
    return ok;
}

// 9. the speedup curve has the right shape on both sides of its peak
bool speedup_shape() {
    bool ok = true;
    for (std::uint32_t g = 1; g < 14; ++g) {
        ok &= expect(speedup(0.8, g + 1, 0.01) > speedup(0.8, g, 0.01),
                     "rising left of the peak");
    }
    for (std::uint32_t g = 14; g < 200; ++g) {
        ok &= expect(speedup(0.8, g + 1, 0.01) < speedup(0.8, g, 0.01),
                     "falling right of the peak");
    }
    ok &= expect(odld(0.8, 0.005, 0.005).first == 14, "peak location");

    ok &= expect(std::fabs(speedup(0.4, 1, 0.6) - 0.875) <= 1e-12,
                 "below-parity operating point");
    ok &= expect(speedup(0.4, 1, 0.6) < 1.0, "offload loses here");
    for (std::uint32_t g = 1; g < 200; ++g) {
        ok &= expect(speedup(0.4, g + 1, 0.6) < speedup(0.4, g, 0.6),
                     "monotone decline when overhead dominates");
    }
    return ok;
}

// 10. the best sparsity level is interior: neither top-1 nor full vocab
bool interior_sweet_spot() {
    bool ok = true;
    const SyntheticPairSpec spec = static_spec(256, 0.5, 1.0, 1);
    ChannelConfig cfg;
    cfg.uplink_rate = 256.0 * 16.0 / 0.23;
    cfg.downlink_rate = cfg.uplink_rate;
    cfg.prob_bits = 16;
    cfg.vocab_size = 256;
    cfg.t_llm = 1.0;
    cfg.t_slm = 0.07;

    const std::vector<std::uint32_t> ks = {1, 2, 4, 8, 16, 32, 64, 128, 256};
    const auto rows = k_sweep(spec, {}, ks, cfg, 20000);
    ok &= expect(rows.size() == 9, "one row per k");

    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].measured_s > rows[best].measured_s) {
            best = i;
        }
    }
    ok &= expect(best > 0 && best + 1 < rows.size(),
                 "measured optimum strictly inside the ladder");
    for (const auto& r : rows) {
        ok &= expect(std::fabs(r.measured_s - r.predicted_s) / r.predicted_s <= 0.02,
                     "prediction within 2% of measurement");
    }
    return ok;
}

// 11. the wire format survives encode/decode and matches pinned bytes
bool wire_integrity() {
    bool ok = true;

    Rng rng(2025);
    for (int iter = 0; iter < 10000; ++iter) {
        const std::uint32_t vocab = 2 + rng.next_u64() % 63;
        const std::uint32_t gamma = 1 + rng.next_u64() % 8;
        const std::uint32_t k = 1 + rng.next_u64() % vocab;
        ChannelConfig cfg = sim_channel(vocab);
        cfg.prob_bits = (iter % 4 == 0) ? 32 : 16;

        DraftPacket p;
        p.gamma = gamma;
        p.k = k;
        for (std::uint32_t i = 0; i < gamma; ++i) {
            LogitVector logits(vocab);
            for (double& v : logits) {
                v = 3.0 * rng.gaussian();
            }
            SparseTopK s = top_k_sparsify(logits, k);
            p.draft_tokens.push_back(sample(s, rng));
            p.dists.push_back(std::move(s));
        }

        const DraftPacket q = decode_draft(encode_draft(p, cfg), cfg);
        ok &= expect(q.draft_tokens == p.draft_tokens, "draft tokens round trip");
        for (std::uint32_t i = 0; i < gamma; ++i) {
            for (const auto& e : q.dists[i].entries) {
                ok &= expect(std::fabs(e.prob - p.dists[i].prob_of(e.id)) <= 1e-3,
                             "probability drift within 1e-3");
            }
        }
        if (!ok) {
            break;  // one broken packet is enough to fail the criterion
        }
    }

    // pinned bytes for one drafting round of the frozen synthetic pair
    const ModelPair pair = make_pair(static_spec(16, 0.6, 1.0, 7));
    Rng drng(mix64(42));
    const DraftPacket golden = draft_round(*pair.slm, {}, 2, 2, drng);
    const std::vector<std::uint8_t> want_packet = {
        0x54, 0x4b, 0x53, 0x4c, 0x01, 0x00, 0x10, 0x00, 0x00, 0x00, 0x02, 0x00,
        0x02, 0x00, 0x0e, 0x00, 0x00, 0x00, 0x0e, 0x00, 0x00, 0x00, 0x7c, 0x38,
        0x0b, 0x00, 0x00, 0x00, 0x08, 0x37, 0x0b, 0x00, 0x00, 0x00, 0x0e, 0x00,
        0x00, 0x00, 0x7c, 0x38, 0x0b, 0x00, 0x00, 0x00, 0x08, 0x37};
    ok &= expect(encode_draft(golden, sim_channel(16)) == want_packet,
                 "pinned draft packet bytes");

    VerifyOutcome v;
    v.position_j = 3;
    v.accepted_count = 2;
    v.emitted_tokens = {4, 9, 7};
    const std::vector<std::uint8_t> want_verdict = {0x03, 0x00, 0x07, 0x00,
                                                    0x00, 0x00, 0x02, 0x00};
    ok &= expect(encode_verdict(v) == want_verdict, "pinned verdict bytes");
    return ok;
}

}  // namespace

int main() {
    report("planner operating grid", planner_grid());
    report("latency ladder", latency_ladder());
    report("uplink payload size", payload_size());
    report("target law preserved", target_law_preserved());
    report("acceptance estimator", acceptance_estimator());
    report("tokens per round", tokens_per_round());
    report("lambert accuracy", lambert_accuracy());
    report("closed form vs search", closed_form_vs_search());
    report("speedup curve shape", speedup_shape());
    report("interior sparsity optimum", interior_sweet_spot());
    report("wire format integrity", wire_integrity());

    std::printf("%d of 11 criteria passed\n", 11 - g_failed);
    return g_failed;
}
