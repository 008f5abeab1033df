#pragma once

#include <ostream>

namespace lpr {

// Runs the built-in sanity suite (FFT-vs-direct oracle, rotation exactness,
// metric fixtures, a miniature end-to-end localization), printing one
// PASS/FAIL line per check. Returns true when everything passed.
bool run_selfcheck(std::ostream& out);

}  // namespace lpr
