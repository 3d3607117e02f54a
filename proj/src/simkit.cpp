#include "tkslt/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace tkslt {

namespace {

class StaticModel : public TokenModel {
 public:
    explicit StaticModel(LogitVector logits) : logits_(std::move(logits)) {}

    std::uint32_t vocab_size() const override {
        return static_cast<std::uint32_t>(logits_.size());
    }
    LogitVector next_logits(const std::vector<token_id>&) const override {
        return logits_;
    }

 private:
    LogitVector logits_;
};

class MarkovModel : public TokenModel {
 public:
    explicit MarkovModel(std::vector<LogitVector> rows) : rows_(std::move(rows)) {}

    std::uint32_t vocab_size() const override {
        return static_cast<std::uint32_t>(rows_.size());
    }
    LogitVector next_logits(const std::vector<token_id>& context) const override {
        // row 0 doubles as the start state
        const token_id prev = context.empty() ? 0 : context.back();
        return rows_[prev];
    }

 private:
    std::vector<LogitVector> rows_;
};

LogitVector gaussian_logits(Rng& rng, std::uint32_t n) {
    LogitVector v(n);
    for (double& x : v) {
        x = rng.gaussian();
    }
    return v;
}

LogitVector mix(const LogitVector& target, const LogitVector& noise, double lambda) {
    LogitVector out(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        out[i] = lambda * target[i] + (1.0 - lambda) * noise[i];
    }
    return out;
}

// target logits first, then noise, in a fixed order so the pair is a
// pure function of the spec
struct RawLogits {
    std::vector<LogitVector> target;  // one row for static, V rows for markov
    std::vector<LogitVector> drafter;
};

RawLogits generate(const SyntheticPairSpec& spec) {
    Rng rng(mix64(spec.seed));
    const std::uint32_t rows =
        spec.kind == PairKind::static_pair ? 1 : spec.vocab_size;
    RawLogits raw;
    raw.target.reserve(rows);
    raw.drafter.reserve(rows);
    for (std::uint32_t r = 0; r < rows; ++r) {
        raw.target.push_back(gaussian_logits(rng, spec.vocab_size));
    }
    for (std::uint32_t r = 0; r < rows; ++r) {
        raw.drafter.push_back(
            mix(raw.target[r], gaussian_logits(rng, spec.vocab_size),
                spec.overlap_lambda));
    }
    return raw;
}

}  // namespace

void check_spec(const SyntheticPairSpec& spec) {
    if (spec.vocab_size < 2) {
        throw invalid_input("pair spec: vocab_size must be >= 2");
    }
    if (!(spec.overlap_lambda >= 0.0 && spec.overlap_lambda <= 1.0)) {
        throw invalid_input("pair spec: overlap_lambda must lie in [0,1]");
    }
    if (!std::isfinite(spec.target_temp) || spec.target_temp < 0.0) {
        throw invalid_input("pair spec: target_temp must be finite and >= 0");
    }
}

ModelPair make_pair(const SyntheticPairSpec& spec) {
    check_spec(spec);
    RawLogits raw = generate(spec);
    ModelPair pair;
    if (spec.kind == PairKind::static_pair) {
        pair.slm = std::make_unique<StaticModel>(std::move(raw.drafter[0]));
        pair.llm = std::make_unique<StaticModel>(std::move(raw.target[0]));
    } else {
        pair.slm = std::make_unique<MarkovModel>(std::move(raw.drafter));
        pair.llm = std::make_unique<MarkovModel>(std::move(raw.target));
    }
    return pair;
}

Distribution static_target_dist(const SyntheticPairSpec& spec) {
    check_spec(spec);
    if (spec.kind != PairKind::static_pair) {
        throw invalid_input("static_target_dist: spec is not static");
    }
    return softmax_temp(generate(spec).target[0], spec.target_temp);
}

double static_pair_alpha(const SyntheticPairSpec& spec, std::uint32_t k) {
    check_spec(spec);
    if (spec.kind != PairKind::static_pair) {
        throw invalid_input("static_pair_alpha: spec is not static");
    }
    RawLogits raw = generate(spec);
    const Distribution p = softmax_temp(raw.target[0], spec.target_temp);
    const Distribution y = densify(top_k_sparsify(raw.drafter[0], k));
    return analytic_alpha(p, y);
}

Metrics monte_carlo(const SyntheticPairSpec& spec, std::uint32_t gamma,
                    std::uint32_t k, const ChannelConfig& channel,
                    std::uint32_t n_rounds, std::uint64_t seed) {
    check_spec(spec);
    check_channel(channel);
    if (channel.vocab_size != spec.vocab_size) {
        throw invalid_input("monte_carlo: channel and spec vocab sizes disagree");
    }
    if (n_rounds == 0) {
        throw invalid_input("monte_carlo: n_rounds must be >= 1");
    }

    ModelPair pair = make_pair(spec);
    Rng rng(mix64(seed));

    const bool is_static = spec.kind == PairKind::static_pair;
    std::vector<std::uint64_t> examined(gamma, 0);
    std::vector<std::uint64_t> accepted(gamma, 0);
    std::vector<std::uint64_t> emitted_freq(is_static ? spec.vocab_size : 0, 0);

    Metrics m;
    m.rounds = n_rounds;
    std::vector<token_id> ctx;
    for (std::uint32_t r = 0; r < n_rounds; ++r) {
        auto traces = run_episode(*pair.slm, *pair.llm, ctx, gamma, k,
                                  spec.target_temp, 1, rng);
        const RoundTrace& t = traces.front();
        for (std::size_t j = 0; j < t.audit.accept_flags.size(); ++j) {
            ++examined[j];
            if (t.audit.accept_flags[j]) {
                ++accepted[j];
            }
        }
        m.total_tokens += t.outcome.emitted_tokens.size();
        if (is_static) {
            for (token_id x : t.outcome.emitted_tokens) {
                ++emitted_freq[x];
            }
        }
        ctx.assign(1, t.outcome.emitted_tokens.back());
    }

    m.alpha_by_position.resize(gamma, 0.0);
    std::uint64_t exam_total = 0;
    std::uint64_t acc_total = 0;
    for (std::uint32_t j = 0; j < gamma; ++j) {
        m.alpha_by_position[j] =
            examined[j] ? static_cast<double>(accepted[j]) / examined[j] : 0.0;
        exam_total += examined[j];
        acc_total += accepted[j];
    }
    m.empirical_alpha = static_cast<double>(acc_total) / exam_total;
    m.mean_tokens_per_round = static_cast<double>(m.total_tokens) / n_rounds;

    const LatencyParams lp = latency_params(channel, k);
    double per_round = gamma * (channel.t_slm + lp.b * channel.t_llm) + channel.t_llm;
    if (channel.include_downlink) {
        per_round += 48.0 / channel.downlink_rate;
    }
    m.simulated_wall_time = n_rounds * per_round;
    m.throughput = static_cast<double>(m.total_tokens) / m.simulated_wall_time;
    m.measured_speedup = m.throughput * channel.t_llm;

    if (is_static) {
        Distribution emp;
        emp.probs.resize(spec.vocab_size);
        for (std::uint32_t x = 0; x < spec.vocab_size; ++x) {
            emp.probs[x] =
                static_cast<double>(emitted_freq[x]) / m.total_tokens;
        }
        m.tv_next_token = tv_distance(emp, static_target_dist(spec));
    } else {
        m.tv_next_token = std::numeric_limits<double>::quiet_NaN();
    }
    return m;
}

std::vector<KSweepRow> k_sweep(const SyntheticPairSpec& spec,
                               const std::vector<std::uint32_t>& gammas,
                               const std::vector<std::uint32_t>& ks,
                               const ChannelConfig& channel,
                               std::uint32_t n_rounds) {
    check_spec(spec);
    check_channel(channel);
    if (ks.empty()) {
        throw invalid_input("k_sweep: ks must not be empty");
    }
    if (!gammas.empty() && gammas.size() != 1 && gammas.size() != ks.size()) {
        throw invalid_input("k_sweep: gammas must be empty, one value, or match ks");
    }

    std::vector<KSweepRow> rows;
    rows.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const std::uint32_t k = ks[i];
        KSweepRow row;
        row.k = k;
        row.lat = latency_params(channel, k);

        if (spec.kind == PairKind::static_pair) {
            row.alpha = static_pair_alpha(spec, k);
        } else {
            // pilot run to estimate the acceptance rate before planning
            const std::uint32_t pilot = std::max(1000u, n_rounds / 10);
            Metrics pm = monte_carlo(spec, 4, k, channel, pilot,
                                     mix64(spec.seed ^ (0xA1F0ull + k)));
            row.alpha = pm.empirical_alpha;
        }

        if (gammas.empty()) {
            const Plan plan = as2(row.alpha, row.lat.b, row.lat.c);
            row.mode = plan.mode;
            row.gamma = plan.gamma_star;
        } else {
            row.mode = Mode::dsd;
            row.gamma = gammas.size() == 1 ? gammas[0] : gammas[i];
        }
        row.predicted_s = speedup(row.alpha, row.gamma, row.lat.l);
        row.metrics = monte_carlo(spec, row.gamma, k, channel, n_rounds,
                                  mix64(spec.seed ^ k));
        row.measured_s = row.metrics.measured_speedup;
        rows.push_back(std::move(row));
    }
    return rows;
}

EquivalenceReport equivalence_report(const SyntheticPairSpec& spec,
                                     std::uint32_t gamma, std::uint32_t k,
                                     std::uint64_t n_samples, std::uint64_t seed,
                                     VerifyPolicy policy) {
    check_spec(spec);
    if (n_samples == 0) {
        throw invalid_input("equivalence_report: n_samples must be >= 1");
    }

    ModelPair pair = make_pair(spec);
    const std::vector<token_id> ctx;  // fixed start context
    const Distribution target =
        softmax_temp(pair.llm->next_logits(ctx), spec.target_temp);

    std::size_t argmax = 0;
    for (std::size_t i = 1; i < target.size(); ++i) {
        if (target[i] > target[argmax]) {
            argmax = i;
        }
    }

    std::vector<std::uint64_t> freq(spec.vocab_size, 0);
    std::uint64_t mismatches = 0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        Rng rng(mix64(seed ^ i));
        const DraftPacket packet = draft_round(*pair.slm, ctx, gamma, k, rng);
        const VerifyOutcome out = verify_round(*pair.llm, ctx, packet,
                                               spec.target_temp, rng, nullptr,
                                               policy);
        const token_id first = out.emitted_tokens.front();
        ++freq[first];
        if (first != argmax) {
            ++mismatches;
        }
    }

    Distribution emp;
    emp.probs.resize(spec.vocab_size);
    for (std::uint32_t x = 0; x < spec.vocab_size; ++x) {
        emp.probs[x] = static_cast<double>(freq[x]) / n_samples;
    }

    EquivalenceReport rep;
    rep.n_samples = n_samples;
    rep.vocab_size = spec.vocab_size;
    rep.tv = tv_distance(emp, target);
    rep.threshold = 3.0 * std::sqrt(static_cast<double>(spec.vocab_size) /
                                    static_cast<double>(n_samples));
    rep.argmax_mismatches = mismatches;
    rep.pass = spec.target_temp == 0.0 ? mismatches == 0 : rep.tv <= rep.threshold;
    return rep;
}

}  // namespace tkslt
