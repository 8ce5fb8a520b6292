// Runtime kernel dispatch. The choice is made once per process: an explicit
// GYROCOMPASS_KERNELS=scalar|avx2 override wins when it names an available
// variant, otherwise the best supported variant is picked via cpuid.

#include "gyrocompass/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace gyro::kernels {

#ifdef GYRO_BUILD_AVX2
const Ops* avx2_table();  // defined in kernels_avx2.cpp
#endif

const Ops* avx2_or_null() {
#ifdef GYRO_BUILD_AVX2
#if defined(__GNUC__) || defined(__clang__)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_table();
#endif
#endif
  return nullptr;
}

namespace {

const Ops& resolve() {
  const char* request = std::getenv("GYROCOMPASS_KERNELS");
  if (request != nullptr) {
    const std::string_view want(request);
    if (want == "scalar") return scalar();
    if (want == "avx2") {
      if (const Ops* ops = avx2_or_null()) return *ops;
      // Requested variant unavailable on this machine; fall through to auto.
    }
  }
  if (const Ops* ops = avx2_or_null()) return *ops;
  return scalar();
}

}  // namespace

const Ops& active() {
  static const Ops& ops = resolve();
  return ops;
}

}  // namespace gyro::kernels
