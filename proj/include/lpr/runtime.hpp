#pragma once

namespace lpr {

// Worker cap for parallel sections. LPR_THREADS env var overrides;
// 0 or unset means auto (hardware concurrency).
int worker_count();

}  // namespace lpr
