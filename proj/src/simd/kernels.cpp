#include "nlsrom/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace nlsrom::simd {

#ifndef NLSROM_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

const KernelTable* select_default() {
  if (const char* env = std::getenv("NLSROM_KERNELS"); env && std::string_view(env) == "scalar")
    return &scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{select_default()};
  return slot;
}

}  // namespace

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void set_active_kernels(const KernelTable& table) {
  active_slot().store(&table, std::memory_order_release);
}

}  // namespace nlsrom::simd
