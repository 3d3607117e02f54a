#include "tkslt/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace tkslt {

namespace {

constexpr char kMagic[4] = {'T', 'K', 'S', 'L'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kFlagWideProbs = 0x01;  // prob_bits == 32

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v & 0xFF));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }
}

struct Reader {
    const std::uint8_t* p;
    std::size_t n;
    std::size_t off = 0;

    void need(std::size_t count) const {
        if (off + count > n) {
            throw malformed_packet("packet: truncated buffer");
        }
    }
    std::uint8_t u8() {
        need(1);
        return p[off++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p[off]) |
                          static_cast<std::uint16_t>(p[off + 1]) << 8;
        off += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(p[off + i]) << (8 * i);
        }
        off += 4;
        return v;
    }
};

std::uint32_t index_bits(std::uint32_t vocab_size) {
    std::uint32_t bits = 0;
    while ((1ull << bits) < vocab_size) {
        ++bits;
    }
    return bits == 0 ? 1 : bits;
}

}  // namespace

void check_channel(const ChannelConfig& cfg) {
    if (cfg.uplink_rate <= 0.0 || cfg.downlink_rate <= 0.0 ||
        !std::isfinite(cfg.uplink_rate) || !std::isfinite(cfg.downlink_rate)) {
        throw invalid_input("channel: rates must be finite and > 0");
    }
    if (cfg.prob_bits != 16 && cfg.prob_bits != 32) {
        throw invalid_input("channel: prob_bits must be 16 or 32");
    }
    if (cfg.vocab_size < 2) {
        throw invalid_input("channel: vocab_size must be >= 2");
    }
    if (cfg.t_llm <= 0.0 || cfg.t_slm <= 0.0 || !std::isfinite(cfg.t_llm) ||
        !std::isfinite(cfg.t_slm)) {
        throw invalid_input("channel: step times must be finite and > 0");
    }
}

std::uint64_t ideal_uplink_bits(std::uint32_t gamma, std::uint32_t k,
                                const ChannelConfig& cfg) {
    check_channel(cfg);
    if (k == 0 || k > cfg.vocab_size) {
        throw invalid_input("ideal_uplink_bits: k must be in [1, vocab_size]");
    }
    std::uint64_t per_entry = cfg.prob_bits;
    if (cfg.include_index_bits) {
        per_entry += index_bits(cfg.vocab_size);
    }
    return static_cast<std::uint64_t>(gamma) * k * per_entry;
}

LatencyParams latency_params(const ChannelConfig& cfg, std::uint32_t k) {
    const double t_v =
        static_cast<double>(ideal_uplink_bits(1, k, cfg)) / cfg.uplink_rate;
    LatencyParams lp;
    lp.b = t_v / cfg.t_llm;
    lp.c = cfg.t_slm / cfg.t_llm;
    lp.l = lp.b + lp.c;
    return lp;
}

std::uint16_t float_to_half(float f) {
    std::uint32_t x;
    std::memcpy(&x, &f, 4);
    const std::uint32_t sign = (x >> 16) & 0x8000u;
    const std::int32_t exp = static_cast<std::int32_t>((x >> 23) & 0xFF) - 127;
    std::uint32_t mant = x & 0x7FFFFFu;

    if (exp == 128) {  // inf or nan
        return static_cast<std::uint16_t>(sign | 0x7C00u | (mant ? 0x200u : 0u));
    }
    if (exp > 15) {  // overflow to inf
        return static_cast<std::uint16_t>(sign | 0x7C00u);
    }
    if (exp >= -14) {  // normal half
        // round mantissa from 23 to 10 bits, to nearest even
        std::uint32_t m = mant | 0x800000u;
        const std::uint32_t shift = 13;
        std::uint32_t half = (m >> shift) & 0x7FFu;  // keep the implicit bit
        const std::uint32_t rem = m & ((1u << shift) - 1);
        const std::uint32_t mid = 1u << (shift - 1);
        if (rem > mid || (rem == mid && (half & 1u))) {
            ++half;
        }
        // a mantissa carry bumps the exponent; half == 0x800 handles it
        const std::uint32_t e = static_cast<std::uint32_t>(exp + 15) + (half >> 11);
        if (e > 30) {
            return static_cast<std::uint16_t>(sign | 0x7C00u);
        }
        return static_cast<std::uint16_t>(sign | (e << 10) | (half & 0x3FFu));
    }
    if (exp >= -24) {  // subnormal half
        std::uint32_t m = mant | 0x800000u;
        const std::uint32_t shift = static_cast<std::uint32_t>(-exp - 14 + 13);
        std::uint32_t half = m >> shift;
        const std::uint32_t rem = m & ((1u << shift) - 1);
        const std::uint32_t mid = 1u << (shift - 1);
        if (rem > mid || (rem == mid && (half & 1u))) {
            ++half;
        }
        return static_cast<std::uint16_t>(sign | half);
    }
    return static_cast<std::uint16_t>(sign);  // underflow to signed zero
}

float half_to_float(std::uint16_t h) {
    const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
    const std::uint32_t exp = (h >> 10) & 0x1F;
    const std::uint32_t mant = h & 0x3FFu;
    std::uint32_t x;

    if (exp == 0) {
        if (mant == 0) {
            x = sign;
        } else {
            // normalize the subnormal
            int e = -1;
            std::uint32_t m = mant;
            do {
                ++e;
                m <<= 1;
            } while ((m & 0x400u) == 0);
            x = sign | static_cast<std::uint32_t>(127 - 15 - e) << 23 |
                (m & 0x3FFu) << 13;
        }
    } else if (exp == 31) {
        x = sign | 0x7F800000u | mant << 13;
    } else {
        x = sign | (exp + 127 - 15) << 23 | mant << 13;
    }
    float f;
    std::memcpy(&f, &x, 4);
    return f;
}

std::vector<std::uint8_t> encode_draft(const DraftPacket& p, const ChannelConfig& cfg) {
    check_channel(cfg);
    check_packet(p, cfg.vocab_size);
    if (p.gamma > 0xFFFF || p.k > 0xFFFF) {
        throw invalid_input("encode_draft: gamma and k must fit u16");
    }

    std::vector<std::uint8_t> b;
    b.reserve(14 + static_cast<std::size_t>(p.gamma) *
                       (4 + static_cast<std::size_t>(p.k) * (4 + cfg.prob_bits / 8)));
    b.insert(b.end(), kMagic, kMagic + 4);
    b.push_back(kVersion);
    b.push_back(cfg.prob_bits == 32 ? kFlagWideProbs : 0);
    put_u32(b, cfg.vocab_size);
    put_u16(b, static_cast<std::uint16_t>(p.gamma));
    put_u16(b, static_cast<std::uint16_t>(p.k));

    for (std::uint32_t i = 0; i < p.gamma; ++i) {
        put_u32(b, p.draft_tokens[i]);
        for (const auto& e : p.dists[i].entries) {
            put_u32(b, e.id);
            if (cfg.prob_bits == 16) {
                put_u16(b, float_to_half(static_cast<float>(e.prob)));
            } else {
                float f = static_cast<float>(e.prob);
                std::uint32_t v;
                std::memcpy(&v, &f, 4);
                put_u32(b, v);
            }
        }
    }
    return b;
}

DraftPacket decode_draft(const std::vector<std::uint8_t>& bytes,
                         const ChannelConfig& cfg) {
    check_channel(cfg);
    Reader r{bytes.data(), bytes.size()};

    r.need(4);
    if (std::memcmp(r.p, kMagic, 4) != 0) {
        throw malformed_packet("packet: bad magic");
    }
    r.off = 4;
    if (r.u8() != kVersion) {
        throw malformed_packet("packet: unsupported version");
    }
    const std::uint8_t flags = r.u8();
    const std::uint32_t wire_prob_bits = (flags & kFlagWideProbs) ? 32 : 16;
    if (wire_prob_bits != cfg.prob_bits) {
        throw malformed_packet("packet: prob width disagrees with channel");
    }
    if (r.u32() != cfg.vocab_size) {
        throw malformed_packet("packet: vocab size disagrees with channel");
    }
    const std::uint16_t gamma = r.u16();
    const std::uint16_t k = r.u16();
    if (gamma == 0 || k == 0 || k > cfg.vocab_size) {
        throw malformed_packet("packet: bad gamma or k");
    }

    DraftPacket p;
    p.gamma = gamma;
    p.k = k;
    p.draft_tokens.reserve(gamma);
    p.dists.reserve(gamma);

    for (std::uint32_t i = 0; i < gamma; ++i) {
        const std::uint32_t tok = r.u32();
        if (tok >= cfg.vocab_size) {
            throw malformed_packet("packet: draft token id out of range");
        }
        SparseTopK s;
        s.vocab_size = cfg.vocab_size;
        s.entries.reserve(k);
        double sum = 0.0;
        for (std::uint32_t e = 0; e < k; ++e) {
            const std::uint32_t id = r.u32();
            if (id >= cfg.vocab_size) {
                throw malformed_packet("packet: entry id out of range");
            }
            double prob;
            if (cfg.prob_bits == 16) {
                prob = half_to_float(r.u16());
            } else {
                const std::uint32_t v = r.u32();
                float f;
                std::memcpy(&f, &v, 4);
                prob = f;
            }
            if (!(prob >= 0.0) || !std::isfinite(prob)) {
                throw malformed_packet("packet: bad probability value");
            }
            s.entries.push_back({id, prob});
            sum += prob;
        }
        if (sum < 0.98 || sum > 1.02) {
            throw malformed_packet("packet: probs drifted outside [0.98, 1.02]");
        }
        for (auto& e : s.entries) {
            e.prob /= sum;
        }
        // quantization can reorder near-equal probs; restore the invariant
        std::sort(s.entries.begin(), s.entries.end(),
                  [](const SparseTopK::Entry& a, const SparseTopK::Entry& b) {
                      if (a.prob != b.prob) {
                          return a.prob > b.prob;
                      }
                      return a.id < b.id;
                  });
        if (s.prob_of(tok) <= 0.0) {
            throw malformed_packet("packet: draft token lost all mass");
        }
        p.draft_tokens.push_back(tok);
        p.dists.push_back(std::move(s));
    }
    if (r.off != r.n) {
        throw malformed_packet("packet: trailing bytes");
    }
    return p;
}

std::vector<std::uint8_t> encode_verdict(const VerifyOutcome& v) {
    if (v.emitted_tokens.empty() || v.position_j == 0 || v.position_j > 0xFFFF ||
        v.accepted_count > 0xFFFF) {
        throw invalid_input("encode_verdict: malformed outcome");
    }
    std::vector<std::uint8_t> b;
    b.reserve(8);
    put_u16(b, static_cast<std::uint16_t>(v.position_j));
    put_u32(b, v.emitted_tokens.back());
    put_u16(b, static_cast<std::uint16_t>(v.accepted_count));
    return b;
}

Verdict decode_verdict(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes.data(), bytes.size()};
    Verdict v;
    v.position_j = r.u16();
    v.final_token = r.u32();
    v.accepted_count = r.u16();
    if (r.off != r.n) {
        throw malformed_packet("verdict: trailing bytes");
    }
    return v;
}

}  // namespace tkslt
