#include "roadgraph/parallel.hpp"

namespace roadgraph {

namespace {
std::atomic<unsigned> g_limit{0};
}

void set_thread_limit(unsigned n) { g_limit = n; }

unsigned thread_limit() {
  const unsigned n = g_limit.load();
  if (n != 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

}  // namespace roadgraph
