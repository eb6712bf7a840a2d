#include <cstdlib>
#include <string_view>

#include "hlt/simd/kernels.hpp"

namespace hlt::simd {

#ifndef HLT_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(HLT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() {
  const KernelTable* avx2 = cpu_supports_avx2() ? avx2_kernels() : nullptr;
  if (const char* forced = std::getenv("HLT_SIMD")) {
    const std::string_view choice(forced);
    if (choice == "scalar") return scalar_kernels();
    if (choice == "avx2" && avx2 != nullptr) return *avx2;
  }
  return avx2 != nullptr ? *avx2 : scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace hlt::simd
