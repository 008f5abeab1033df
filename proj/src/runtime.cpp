#include "lpr/runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace lpr {

int worker_count() {
    int n = 0;
    if (const char* env = std::getenv("LPR_THREADS")) {
        n = std::atoi(env);
    }
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
    }
    return std::clamp(n, 1, 64);
}

}  // namespace lpr
