#include "tkslt/specdec.hpp"

#include <cmath>

namespace tkslt {

void check_packet(const DraftPacket& p, std::uint32_t vocab_size) {
    if (p.gamma == 0) {
        throw invalid_input("packet: gamma must be >= 1");
    }
    if (p.k == 0 || p.k > vocab_size) {
        throw invalid_input("packet: k must be in [1, vocab_size]");
    }
    if (p.draft_tokens.size() != p.gamma || p.dists.size() != p.gamma) {
        throw invalid_input("packet: token/dist counts disagree with gamma");
    }
    for (std::uint32_t i = 0; i < p.gamma; ++i) {
        const SparseTopK& s = p.dists[i];
        if (s.vocab_size != vocab_size || s.k() != p.k) {
            throw invalid_input("packet: dist shape mismatch");
        }
        check_sparse(s);
        if (s.prob_of(p.draft_tokens[i]) <= 0.0) {
            throw invalid_input("packet: drafted token outside dist support");
        }
    }
}

DraftPacket draft_round(const TokenModel& slm, const std::vector<token_id>& prefix,
                        std::uint32_t gamma, std::uint32_t k, Rng& rng) {
    if (gamma == 0) {
        throw invalid_input("draft_round: gamma must be >= 1");
    }
    DraftPacket p;
    p.gamma = gamma;
    p.k = k;
    p.draft_tokens.reserve(gamma);
    p.dists.reserve(gamma);

    std::vector<token_id> ctx = prefix;
    for (std::uint32_t i = 0; i < gamma; ++i) {
        SparseTopK s = top_k_sparsify(slm.next_logits(ctx), k);
        const token_id x = sample(s, rng);
        p.draft_tokens.push_back(x);
        p.dists.push_back(std::move(s));
        ctx.push_back(x);
    }
    return p;
}

bool accept_decision(double p, double q, double u) {
    if (!(q > 0.0)) {
        throw invalid_input("accept_decision: drafted token must have q > 0");
    }
    if (p < 0.0 || !std::isfinite(p)) {
        throw invalid_input("accept_decision: p must be finite and >= 0");
    }
    return p >= q || u < p / q;
}

VerifyOutcome verify_round(const TokenModel& llm, const std::vector<token_id>& prefix,
                           const DraftPacket& packet, double t_target, Rng& rng,
                           VerifyAudit* audit, VerifyPolicy policy) {
    check_packet(packet, llm.vocab_size());

    VerifyOutcome out;
    std::vector<token_id> ctx = prefix;
    for (std::uint32_t j = 0; j < packet.gamma; ++j) {
        const Distribution target = softmax_temp(llm.next_logits(ctx), t_target);
        const token_id x = packet.draft_tokens[j];
        const double q = packet.dists[j].prob_of(x);
        const double p = target[x];
        const double u = rng.uniform();
        const bool ok =
            policy == VerifyPolicy::accept_always || accept_decision(p, q, u);
        if (audit) {
            audit->accept_flags.push_back(ok);
            audit->uniforms.push_back(u);
        }
        if (!ok) {
            const Distribution corr = residual(target, densify(packet.dists[j]));
            const double u2 = rng.uniform();
            if (audit) {
                audit->uniforms.push_back(u2);
            }
            out.emitted_tokens.push_back(sample_u(corr, u2));
            out.accepted_count = j;
            out.position_j = j + 1;
            out.bonus = false;
            return out;
        }
        out.emitted_tokens.push_back(x);
        ctx.push_back(x);
    }

    const Distribution last = softmax_temp(llm.next_logits(ctx), t_target);
    const double u2 = rng.uniform();
    if (audit) {
        audit->uniforms.push_back(u2);
    }
    out.emitted_tokens.push_back(sample_u(last, u2));
    out.accepted_count = packet.gamma;
    out.position_j = packet.gamma + 1;
    out.bonus = true;
    return out;
}

std::vector<RoundTrace> run_episode(const TokenModel& slm, const TokenModel& llm,
                                    const std::vector<token_id>& prefix,
                                    std::uint32_t gamma, std::uint32_t k,
                                    double t_target, std::uint32_t n_rounds,
                                    Rng& rng) {
    if (slm.vocab_size() != llm.vocab_size()) {
        throw invalid_input("run_episode: models must share a vocabulary");
    }
    std::vector<RoundTrace> traces;
    traces.reserve(n_rounds);
    std::vector<token_id> ctx = prefix;
    for (std::uint32_t r = 0; r < n_rounds; ++r) {
        RoundTrace t;
        t.packet = draft_round(slm, ctx, gamma, k, rng);
        t.outcome = verify_round(llm, ctx, t.packet, t_target, rng, &t.audit);
        ctx.insert(ctx.end(), t.outcome.emitted_tokens.begin(),
                   t.outcome.emitted_tokens.end());
        traces.push_back(std::move(t));
    }
    return traces;
}

}  // namespace tkslt
