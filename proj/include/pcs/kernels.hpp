#pragma once

// Batched inner loops of the performance model.
//
// Two kernels are hot when the performance matrix is built or updated:
//   * service_moments: evaluate the weighted-combination model over a window
//     of contention samples (optionally shifted by a component's own
//     contribution) and reduce to mean / population variance;
//   * row_max: maximum of a matrix row, used by the scheduler's selection.
//
// Every backend accumulates into four interleaved lanes (element i goes to
// lane i % 4) and combines them as (l0 + l1) + (l2 + l3), so scalar, AVX2 and
// NEON results are bit-identical, not merely close.

#include <cstddef>
#include <span>
#include <string_view>

namespace pcs::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view to_string(Backend b);

// Combined-model coefficients in resource order core, cache, diskBW, networkBW.
struct ModelCoefficients {
  double weight[4] = {0, 0, 0, 0};
  double intercept[4] = {0, 0, 0, 0};
  double slope[4] = {0, 0, 0, 0};
  double weight_sum = 0.0;
  double floor = 0.0;
};

struct SampleColumns {
  const double* core = nullptr;
  const double* cache = nullptr;
  const double* disk = nullptr;
  const double* network = nullptr;
  std::size_t size = 0;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// shift[r] is added to every sample of resource r before evaluation; results
// are clamped at zero and core usage is capped at 1.
using MomentsFn = Moments (*)(const ModelCoefficients& model, const SampleColumns& samples,
                              const double* shift);
using RowMaxFn = double (*)(std::span<const double> row);

struct KernelTable {
  Backend backend;
  MomentsFn service_moments;
  RowMaxFn row_max;
};

// Reference implementation of one model evaluation. The SIMD kernels perform
// exactly this sequence of IEEE operations per lane.
inline double predict_one(const ModelCoefficients& m, double core, double cache, double disk,
                          double network) {
  core = core > 0.0 ? core : 0.0;
  core = core < 1.0 ? core : 1.0;
  cache = cache > 0.0 ? cache : 0.0;
  disk = disk > 0.0 ? disk : 0.0;
  network = network > 0.0 ? network : 0.0;
  double num = m.weight[0] * (m.intercept[0] + m.slope[0] * core);
  num = num + m.weight[1] * (m.intercept[1] + m.slope[1] * cache);
  num = num + m.weight[2] * (m.intercept[2] + m.slope[2] * disk);
  num = num + m.weight[3] * (m.intercept[3] + m.slope[3] * network);
  const double p = num / m.weight_sum;
  return p > m.floor ? p : m.floor;
}

namespace scalar {
Moments service_moments(const ModelCoefficients& model, const SampleColumns& samples,
                        const double* shift);
double row_max(std::span<const double> row);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
Moments service_moments(const ModelCoefficients& model, const SampleColumns& samples,
                        const double* shift);
double row_max(std::span<const double> row);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
Moments service_moments(const ModelCoefficients& model, const SampleColumns& samples,
                        const double* shift);
double row_max(std::span<const double> row);
}  // namespace neon
#endif

bool supported(Backend b);

// Kernel table for a specific backend; throws pcs::Error if unsupported here.
const KernelTable& table(Backend b);

// The table in use. Chosen on first call: the PCS_SIMD environment variable
// (scalar | avx2 | neon) if set, otherwise the widest backend the CPU supports.
const KernelTable& active();

// Overrides the active backend for the whole process (tests, benchmarks).
void set_active(Backend b);

}  // namespace pcs::kernels
