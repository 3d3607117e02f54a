#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tkslt {

using token_id = std::uint32_t;

// Error taxonomy shared by all modules. Everything derives from tkslt::error
// so the CLI boundary can catch the whole family at once.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad argument values (preconditions)
struct invalid_input : error {
    using error::error;
};

// math input outside a function's defined domain
struct domain_error : error {
    using error::error;
};

// residual(P, Q) where max(0, P - Q) is identically zero
struct degenerate_residual : error {
    using error::error;
};

// iteration cap reached; treated as a bug signal, not a user error
struct convergence_error : error {
    using error::error;
};

// wire decode failure
struct malformed_packet : error {
    using error::error;
};

}  // namespace tkslt
