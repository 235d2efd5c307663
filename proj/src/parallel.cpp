#include "xalign/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace xalign {

namespace {

int from_env() {
  if (const char* env = std::getenv("XALIGN_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

std::atomic<int>& configured() {
  static std::atomic<int> n{from_env()};
  return n;
}

}  // namespace

int thread_count() { return configured().load(); }

void set_thread_count(int n) { configured().store(n > 0 ? n : from_env()); }

}  // namespace xalign
