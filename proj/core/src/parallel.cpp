#include "sphmean/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace sphmean {

std::size_t worker_count() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec == std::errc() && n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace sphmean
