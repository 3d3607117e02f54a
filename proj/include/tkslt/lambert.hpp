#pragma once

#include "tkslt/common.hpp"

namespace tkslt {

// Principal branch W0(x), real solutions of w*e^w = x for x >= -1/e.
double lambert_w0(double x);

// Lower branch W-1(x), defined on [-1/e, 0); W-1(-1/e) = -1.
double lambert_wm1(double x);

// W-1(-e^u) for u <= -1, without forming -e^u. For u far below -1 the
// direct argument underflows to zero while the log-domain solve stays
// well conditioned; solves ln(-w) + w = u.
double lambert_wm1_log(double u);

}  // namespace tkslt
