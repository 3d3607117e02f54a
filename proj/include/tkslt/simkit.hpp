#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "tkslt/planner.hpp"
#include "tkslt/specdec.hpp"
#include "tkslt/transport.hpp"

namespace tkslt {

enum class PairKind {
    static_pair,  // one context-free logit vector per model
    markov,       // logits keyed on the previous token
};

// Recipe for a reproducible drafter/verifier pair. Drafter logits are
// lambda * target + (1 - lambda) * independent noise, mixed in logit
// space so every token keeps nonzero dense mass and top-k truncation is
// the only source of sparsity.
struct SyntheticPairSpec {
    std::uint32_t vocab_size = 0;
    PairKind kind = PairKind::static_pair;
    double overlap_lambda = 1.0;  // in [0,1]
    double target_temp = 1.0;     // >= 0, applied on the verifier side
    std::uint64_t seed = 0;
};

struct ModelPair {
    std::unique_ptr<TokenModel> slm;
    std::unique_ptr<TokenModel> llm;
};

void check_spec(const SyntheticPairSpec& spec);
ModelPair make_pair(const SyntheticPairSpec& spec);

// Closed forms for static pairs (context-free logits make them exact);
// markov specs are rejected.
Distribution static_target_dist(const SyntheticPairSpec& spec);
double static_pair_alpha(const SyntheticPairSpec& spec, std::uint32_t k);

struct Metrics {
    std::uint64_t rounds = 0;
    std::uint64_t total_tokens = 0;
    // acceptance rate of position j among rounds that examined it
    std::vector<double> alpha_by_position;
    // pooled over every examined position
    double empirical_alpha = 0.0;
    double mean_tokens_per_round = 0.0;
    double simulated_wall_time = 0.0;  // seconds
    double throughput = 0.0;           // tokens per second
    double measured_speedup = 0.0;     // vs 1/t_llm edge-only decode
    // TV between the pooled emitted-token frequencies and the target
    // law; NaN for markov pairs, where the marginal is context-bound
    double tv_next_token = 0.0;
};

// Simulated experiment: rounds of draft/verify with wall time charged as
// gamma * (t_slm + T_V(k)) + t_llm per round (plus the verdict's return
// trip when the channel says to count it). The carried context is
// truncated to the last emitted token between rounds; both synthetic
// kinds condition on at most that, so the process law is unchanged and
// the cost per round stays flat.
Metrics monte_carlo(const SyntheticPairSpec& spec, std::uint32_t gamma,
                    std::uint32_t k, const ChannelConfig& channel,
                    std::uint32_t n_rounds, std::uint64_t seed);

struct KSweepRow {
    std::uint32_t k = 0;
    double alpha = 0.0;  // analytic for static pairs, pilot-measured for markov
    LatencyParams lat{};
    Mode mode = Mode::dsd;
    std::uint32_t gamma = 0;
    double predicted_s = 0.0;
    double measured_s = 0.0;
    Metrics metrics;
};

// Sweep sparsity levels: per k, obtain alpha_k, compute the latency
// point, pick gamma (auto via the planner when gammas is empty; one
// value broadcasts; otherwise pairwise with ks), simulate, report
// predicted vs measured speedup. Seeds derive from spec.seed and k, so
// rows are independent of sweep order.
std::vector<KSweepRow> k_sweep(const SyntheticPairSpec& spec,
                               const std::vector<std::uint32_t>& gammas,
                               const std::vector<std::uint32_t>& ks,
                               const ChannelConfig& channel,
                               std::uint32_t n_rounds);

struct EquivalenceReport {
    std::uint64_t n_samples = 0;
    std::uint32_t vocab_size = 0;
    double tv = 0.0;         // empirical first-emitted-token law vs target
    double threshold = 0.0;  // 3 * sqrt(vocab / n)
    // at target_temp == 0 the TV test degenerates; instead every sample
    // must equal the target argmax and this counts the violations
    std::uint64_t argmax_mismatches = 0;
    bool pass = false;
};

// Distributional check of the protocol itself: n independent one-round
// runs on a fixed empty context, comparing the first emitted token's
// frequencies against the target law. policy=accept_always is the
// negative control and should fail for any drafter that differs from
// the target.
EquivalenceReport equivalence_report(const SyntheticPairSpec& spec,
                                     std::uint32_t gamma, std::uint32_t k,
                                     std::uint64_t n_samples, std::uint64_t seed,
                                     VerifyPolicy policy = VerifyPolicy::exact);

}  // namespace tkslt
