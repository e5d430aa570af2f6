#include <atomic>
#include <cstdlib>
#include <string>

#include "mfbm/error.hpp"
#include "mfbm/kernels.hpp"

namespace mfbm::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("MFBM_SIMD"); env != nullptr && *env != '\0') {
    const Isa wanted = parse_isa(env);
    if (isa_supported(wanted)) return wanted;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{detect()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(MFBM_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  throw ArgumentError("unknown SIMD level '" + std::string(name) + "' (expected scalar or avx2)");
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ArgumentError("SIMD level '" + std::string(isa_name(isa)) +
                        "' is not available on this machine");
  }
  active_slot().store(isa, std::memory_order_relaxed);
}

WindowedDotFn windowed_dot_for(Isa isa) {
#if defined(MFBM_HAVE_AVX2_KERNELS)
  if (isa == Isa::avx2) return &windowed_dot_avx2;
#endif
  (void)isa;
  return &windowed_dot_scalar;
}

}  // namespace mfbm::kernels
