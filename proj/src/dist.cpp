#include "tkslt/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tkslt {

double SparseTopK::prob_of(token_id id) const {
    for (const Entry& e : entries) {
        if (e.id == id) {
            return e.prob;
        }
    }
    return 0.0;
}

void check_distribution(const Distribution& d, double sum_tol) {
    if (d.probs.empty()) {
        throw invalid_input("distribution: empty");
    }
    double sum = 0.0;
    for (double p : d.probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw invalid_input("distribution: entry not a finite nonnegative value");
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > sum_tol) {
        throw invalid_input("distribution: entries sum to " + std::to_string(sum));
    }
}

void check_sparse(const SparseTopK& s, double sum_tol) {
    if (s.vocab_size == 0 || s.entries.empty() || s.entries.size() > s.vocab_size) {
        throw invalid_input("sparse: bad entry count");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        const auto& e = s.entries[i];
        if (e.id >= s.vocab_size) {
            throw invalid_input("sparse: token id out of range");
        }
        if (!std::isfinite(e.prob) || e.prob < 0.0) {
            throw invalid_input("sparse: prob not a finite nonnegative value");
        }
        sum += e.prob;
        if (i > 0) {
            const auto& prev = s.entries[i - 1];
            const bool ordered =
                prev.prob > e.prob || (prev.prob == e.prob && prev.id < e.id);
            if (!ordered) {
                throw invalid_input("sparse: entries not sorted by (prob desc, id asc)");
            }
        }
    }
    if (std::fabs(sum - 1.0) > sum_tol) {
        throw invalid_input("sparse: probs sum to " + std::to_string(sum));
    }
}

static void require_finite(const LogitVector& logits, const char* who) {
    if (logits.empty()) {
        throw invalid_input(std::string(who) + ": empty logit vector");
    }
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw invalid_input(std::string(who) + ": non-finite logit");
        }
    }
}

Distribution softmax_temp(const LogitVector& logits, double temperature) {
    require_finite(logits, "softmax_temp");
    if (temperature < 0.0 || !std::isfinite(temperature)) {
        throw invalid_input("softmax_temp: temperature must be finite and >= 0");
    }

    Distribution out;
    out.probs.assign(logits.size(), 0.0);

    if (temperature == 0.0) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < logits.size(); ++i) {
            if (logits[i] > logits[best]) {
                best = i;
            }
        }
        out.probs[best] = 1.0;
        return out;
    }

    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logits) {
        mx = std::max(mx, v / temperature);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double e = std::exp(logits[i] / temperature - mx);
        out.probs[i] = e;
        sum += e;
    }
    for (double& p : out.probs) {
        p /= sum;
    }
    return out;
}

SparseTopK top_k_sparsify(const LogitVector& logits, std::uint32_t k) {
    require_finite(logits, "top_k_sparsify");
    const auto n = static_cast<std::uint32_t>(logits.size());
    if (k == 0 || k > n) {
        throw invalid_input("top_k_sparsify: k must be in [1, vocab_size]");
    }

    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (logits[a] != logits[b]) {
                              return logits[a] > logits[b];
                          }
                          return a < b;
                      });

    const double mx = logits[idx[0]];
    SparseTopK s;
    s.vocab_size = n;
    s.entries.reserve(k);
    double sum = 0.0;
    for (std::uint32_t i = 0; i < k; ++i) {
        const double e = std::exp(logits[idx[i]] - mx);
        s.entries.push_back({idx[i], e});
        sum += e;
    }
    for (auto& e : s.entries) {
        e.prob /= sum;
    }
    // logit order already matches prob order, except when distinct logits
    // round to the same prob; re-sort so the (prob desc, id asc) invariant
    // holds unconditionally
    std::sort(s.entries.begin(), s.entries.end(),
              [](const SparseTopK::Entry& a, const SparseTopK::Entry& b) {
                  if (a.prob != b.prob) {
                      return a.prob > b.prob;
                  }
                  return a.id < b.id;
              });
    return s;
}

Distribution densify(const SparseTopK& s) {
    Distribution out;
    out.probs.assign(s.vocab_size, 0.0);
    for (const auto& e : s.entries) {
        out.probs[e.id] = e.prob;
    }
    return out;
}

Distribution residual(const Distribution& target, const Distribution& draft) {
    if (target.size() != draft.size()) {
        throw invalid_input("residual: length mismatch");
    }
    Distribution r;
    r.probs.resize(target.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = target[i] - draft[i];
        const double v = d > 0.0 ? d : 0.0;
        r.probs[i] = v;
        sum += v;
    }
    if (sum == 0.0) {
        throw degenerate_residual("residual: positive part is identically zero");
    }
    for (double& p : r.probs) {
        p /= sum;
    }
    return r;
}

double analytic_alpha(const Distribution& target, const Distribution& draft) {
    if (target.size() != draft.size()) {
        throw invalid_input("analytic_alpha: length mismatch");
    }
    double a = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        a += std::min(target[i], draft[i]);
    }
    return a;
}

double tv_distance(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size()) {
        throw invalid_input("tv_distance: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::fabs(a[i] - b[i]);
    }
    return 0.5 * s;
}

token_id sample_u(const Distribution& d, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw invalid_input("sample: u outside [0,1)");
    }
    double cum = 0.0;
    std::int64_t last = -1;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double p = d[i];
        if (p > 0.0) {
            cum += p;
            last = static_cast<std::int64_t>(i);
            if (u < cum) {
                return static_cast<token_id>(i);
            }
        }
    }
    if (last < 0) {
        throw invalid_input("sample: distribution has no positive mass");
    }
    return static_cast<token_id>(last);
}

token_id sample_u(const SparseTopK& s, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw invalid_input("sample: u outside [0,1)");
    }
    double cum = 0.0;
    std::int64_t last = -1;
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        const double p = s.entries[i].prob;
        if (p > 0.0) {
            cum += p;
            last = static_cast<std::int64_t>(i);
            if (u < cum) {
                return s.entries[i].id;
            }
        }
    }
    if (last < 0) {
        throw invalid_input("sample: distribution has no positive mass");
    }
    return s.entries[static_cast<std::size_t>(last)].id;
}

token_id sample(const Distribution& d, Rng& rng) {
    return sample_u(d, rng.uniform());
}

token_id sample(const SparseTopK& s, Rng& rng) {
    return sample_u(s, rng.uniform());
}

}  // namespace tkslt
