#include "hardi/parallel.hpp"

namespace hardi {

namespace {
std::atomic<std::size_t> g_default_threads{1};
}

std::size_t default_threads() { return g_default_threads.load(); }
void set_default_threads(std::size_t threads) { g_default_threads = threads == 0 ? 1 : threads; }

}  // namespace hardi
