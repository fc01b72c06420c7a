#include <atomic>
#include <cstdlib>
#include <string>

#include "pcs/error.hpp"
#include "pcs/kernels.hpp"

namespace pcs::kernels {

namespace {

constexpr KernelTable kScalarTable{Backend::kScalar, &scalar::service_moments, &scalar::row_max};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{Backend::kAvx2, &avx2::service_moments, &avx2::row_max};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeonTable{Backend::kNeon, &neon::service_moments, &neon::row_max};
#endif

Backend detect() {
  if (const char* env = std::getenv("PCS_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::kScalar;
    if (want == "avx2" && supported(Backend::kAvx2)) return Backend::kAvx2;
    if (want == "neon" && supported(Backend::kNeon)) return Backend::kNeon;
  }
  if (supported(Backend::kAvx2)) return Backend::kAvx2;
  if (supported(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

bool supported(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend b) {
  if (!supported(b)) {
    throw Error(ErrorCode::kBadConfig,
                "kernel backend '" + std::string(to_string(b)) + "' not supported on this CPU");
  }
  switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::kAvx2: return kAvx2Table;
#endif
#if defined(__aarch64__)
    case Backend::kNeon: return kNeonTable;
#endif
    default: return kScalarTable;
  }
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = &table(detect());
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void set_active(Backend b) { g_active.store(&table(b), std::memory_order_release); }

}  // namespace pcs::kernels
