#pragma once

#include <cstdint>
#include <vector>

#include "tkslt/common.hpp"
#include "tkslt/dist.hpp"
#include "tkslt/rng.hpp"

namespace tkslt {

// Shared model interface for drafter and verifier. Implementations must
// be deterministic in the context and return vocab_size() logits.
class TokenModel {
public:
    virtual ~TokenModel() = default;
    virtual std::uint32_t vocab_size() const = 0;
    virtual LogitVector next_logits(const std::vector<token_id>& context) const = 0;
};

// What the device uplinks per round: gamma drafted tokens plus the
// k-sparse distribution each one was sampled from.
struct DraftPacket {
    std::vector<token_id> draft_tokens;
    std::vector<SparseTopK> dists;
    std::uint32_t gamma = 0;
    std::uint32_t k = 0;
};

// Verifier result for one round. emitted_tokens is the accepted prefix
// plus one trailing token, corrective on rejection or bonus on a clean
// sweep; position_j = accepted_count + 1 is what goes on the wire.
struct VerifyOutcome {
    std::uint32_t accepted_count = 0;
    std::vector<token_id> emitted_tokens;
    std::uint32_t position_j = 0;
    bool bonus = false;
};

// Audit record of the verifier's randomness: one flag per examined
// position, and every uniform in consumption order (one per examined
// position, then one for the corrective or bonus draw).
struct VerifyAudit {
    std::vector<bool> accept_flags;
    std::vector<double> uniforms;
};

struct RoundTrace {
    DraftPacket packet;
    VerifyOutcome outcome;
    VerifyAudit audit;
};

void check_packet(const DraftPacket& p, std::uint32_t vocab_size);

// Autoregressive drafting: at each step, sparsify the drafter's logits
// to the top k and sample the next token from that sparse law.
DraftPacket draft_round(const TokenModel& slm, const std::vector<token_id>& prefix,
                        std::uint32_t gamma, std::uint32_t k, Rng& rng);

// Accept iff u < min(1, p/q), where q is the drafter's (sparse,
// renormalized) mass on the drafted token and p the verifier's.
bool accept_decision(double p, double q, double u);

enum class VerifyPolicy {
    exact,          // rejection sampling with residual resampling
    accept_always,  // broken on purpose, for negative controls
};

VerifyOutcome verify_round(const TokenModel& llm, const std::vector<token_id>& prefix,
                           const DraftPacket& packet, double t_target, Rng& rng,
                           VerifyAudit* audit = nullptr,
                           VerifyPolicy policy = VerifyPolicy::exact);

// Full device/edge loop in one process: draft, verify, append the
// emitted tokens to the shared context, repeat.
std::vector<RoundTrace> run_episode(const TokenModel& slm, const TokenModel& llm,
                                    const std::vector<token_id>& prefix,
                                    std::uint32_t gamma, std::uint32_t k,
                                    double t_target, std::uint32_t n_rounds,
                                    Rng& rng);

}  // namespace tkslt
