#pragma once

#include <cstdint>
#include <vector>

#include "tkslt/common.hpp"
#include "tkslt/rng.hpp"

namespace tkslt {

// Unnormalized log-scores over the vocabulary; all entries must be finite.
using LogitVector = std::vector<double>;

// Dense probability vector over the vocabulary (the P(x)/Q(x) of the
// protocol). Entries are nonnegative and sum to 1 within 1e-9.
struct Distribution {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
};

// Top-K token ids with renormalized probabilities. Entries are kept sorted
// by probability descending, ties broken by ascending token id.
struct SparseTopK {
    struct Entry {
        token_id id;
        double prob;
    };

    std::vector<Entry> entries;
    std::uint32_t vocab_size = 0;

    std::uint32_t k() const { return static_cast<std::uint32_t>(entries.size()); }

    // probability of `id`; zero when the token is not among the entries
    double prob_of(token_id id) const;
};

// Invariant checks; throw invalid_input with a description on failure.
void check_distribution(const Distribution& d, double sum_tol = 1e-9);
void check_sparse(const SparseTopK& s, double sum_tol = 1e-9);

// Temperature softmax. temperature == 0 degenerates to a one-hot at the
// argmax (ties broken by lowest index).
Distribution softmax_temp(const LogitVector& logits, double temperature);

// Softmax over only the K largest logits (ties by lowest index); every
// other token carries zero implicit mass.
SparseTopK top_k_sparsify(const LogitVector& logits, std::uint32_t k);

Distribution densify(const SparseTopK& s);

// norm(max(0, target - draft)); the law of the corrective token after a
// rejection. Throws degenerate_residual when the positive part is
// identically zero.
Distribution residual(const Distribution& target, const Distribution& draft);

// Acceptance rate sum_x min(p(x), q(x)); terms with q(x) = 0 contribute 0.
double analytic_alpha(const Distribution& target, const Distribution& draft);

// Total variation distance, 0.5 * sum |p1 - p2|.
double tv_distance(const Distribution& a, const Distribution& b);

// Inverse-CDF sampling over entries in storage order. sample_u is the pure
// kernel (one uniform in, token out); sample draws the uniform from rng.
// The returned token always has positive probability.
token_id sample_u(const Distribution& d, double u);
token_id sample_u(const SparseTopK& s, double u);
token_id sample(const Distribution& d, Rng& rng);
token_id sample(const SparseTopK& s, Rng& rng);

}  // namespace tkslt
