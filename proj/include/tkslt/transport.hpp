#pragma once

#include <cstdint>
#include <vector>

#include "tkslt/common.hpp"
#include "tkslt/specdec.hpp"

namespace tkslt {

// Wireless link and timing parameters. Rates in bit/s, times in seconds.
struct ChannelConfig {
    double uplink_rate = 0.0;
    double downlink_rate = 0.0;
    std::uint32_t prob_bits = 16;  // 16 or 32
    std::uint32_t vocab_size = 0;
    double t_llm = 0.0;  // one verifier step
    double t_slm = 0.0;  // one drafter step
    bool include_index_bits = false;  // count token-id bits in the payload
    bool include_downlink = false;    // count the verdict's return trip
};

// Per-step costs relative to a verifier step: b for uplink transmission
// of one sparse distribution, c for one drafter step, l = b + c.
struct LatencyParams {
    double b;
    double c;
    double l;
};

void check_channel(const ChannelConfig& cfg);

// Idealized payload for gamma positions of k probabilities each. Index
// bits (ceil(log2 vocab) per entry) are opt-in; the default counts only
// probability payload.
std::uint64_t ideal_uplink_bits(std::uint32_t gamma, std::uint32_t k,
                                const ChannelConfig& cfg);

LatencyParams latency_params(const ChannelConfig& cfg, std::uint32_t k);

// What the verifier sends back: where drafting stopped and the one token
// it appended (corrective or bonus).
struct Verdict {
    std::uint16_t position_j = 0;
    token_id final_token = 0;
    std::uint16_t accepted_count = 0;
};

// IEEE binary16 conversion, round to nearest even. Out-of-range values
// become inf; subnormals are kept.
std::uint16_t float_to_half(float f);
float half_to_float(std::uint16_t h);

// Byte-aligned little-endian draft packet codec; layout in
// docs/wire-format.md. Decoding validates the header against cfg,
// renormalizes each quantized distribution, and restores entry order.
std::vector<std::uint8_t> encode_draft(const DraftPacket& p, const ChannelConfig& cfg);
DraftPacket decode_draft(const std::vector<std::uint8_t>& bytes,
                         const ChannelConfig& cfg);

std::vector<std::uint8_t> encode_verdict(const VerifyOutcome& v);
Verdict decode_verdict(const std::vector<std::uint8_t>& bytes);

}  // namespace tkslt
