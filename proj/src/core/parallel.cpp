#include "etv/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace etv {

std::size_t thread_limit() {
  if (const char* env = std::getenv("ETVALLOC_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t workers = std::min(thread_limit(), std::max<std::size_t>(1, count / 256));
  if (workers <= 1) {
    body(0, count);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> threads;
  for (std::size_t begin = 0; begin < count; begin += chunk) {
    threads.emplace_back([&body, begin, end = std::min(count, begin + chunk)] { body(begin, end); });
  }
}

}  // namespace etv
