#include <cstdlib>
#include <stdexcept>
#include <string>

#include "svcache/kernels/kernels.hpp"

namespace svcache::kernels {

#if SVCACHE_HAVE_AVX2
const KernelOps& avx2_ops();

static bool cpu_has_avx2_fma() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}
#endif

std::vector<const KernelOps*> available_ops() {
  std::vector<const KernelOps*> ops{&scalar_ops()};
#if SVCACHE_HAVE_AVX2
  if (cpu_has_avx2_fma()) ops.push_back(&avx2_ops());
#endif
  return ops;
}

namespace {

const KernelOps* resolve(std::string_view name) {
  if (name == "auto") {
    const auto ops = available_ops();
    return ops.back();
  }
  for (const KernelOps* ops : available_ops()) {
    if (name == ops->name) return ops;
  }
  throw std::runtime_error("unknown or unavailable kernel variant: " + std::string(name));
}

const KernelOps*& active_slot() {
  static const KernelOps* slot = [] {
    const char* env = std::getenv("SVC_CACHE_KERNEL");
    return resolve(env != nullptr ? std::string_view(env) : std::string_view("auto"));
  }();
  return slot;
}

}  // namespace

void select(std::string_view name) { active_slot() = resolve(name); }

const KernelOps& active() { return *active_slot(); }

}  // namespace svcache::kernels
