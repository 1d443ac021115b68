#include "shearmix/parallel.hpp"

#include <atomic>

namespace shearmix {

namespace {
std::atomic<int> g_threads{1};
}

int default_threads() noexcept { return g_threads.load(std::memory_order_relaxed); }

void set_default_threads(int threads) noexcept {
  g_threads.store(std::max(1, threads), std::memory_order_relaxed);
}

}  // namespace shearmix
