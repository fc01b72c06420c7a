// AArch64 only. Two float64x2 registers hold lanes {0,1} and {2,3}, matching
// the four-lane accumulation order of the scalar kernel.

#include <arm_neon.h>

#include <limits>

#include "pcs/kernels.hpp"

namespace pcs::kernels::neon {

namespace {

struct Broadcast {
  float64x2_t w[4], a[4], b[4], shift[4];
  float64x2_t weight_sum, floor, zero, one;

  Broadcast(const ModelCoefficients& m, const double* s) {
    for (int r = 0; r < 4; ++r) {
      w[r] = vdupq_n_f64(m.weight[r]);
      a[r] = vdupq_n_f64(m.intercept[r]);
      b[r] = vdupq_n_f64(m.slope[r]);
      shift[r] = vdupq_n_f64(s[r]);
    }
    weight_sum = vdupq_n_f64(m.weight_sum);
    floor = vdupq_n_f64(m.floor);
    zero = vdupq_n_f64(0.0);
    one = vdupq_n_f64(1.0);
  }
};

// x > y ? x : y, spelled as a select so it matches the scalar comparison on
// signed zeros (vmaxq_f64 treats -0 < +0).
inline float64x2_t max2(float64x2_t x, float64x2_t y) { return vbslq_f64(vcgtq_f64(x, y), x, y); }
inline float64x2_t min2(float64x2_t x, float64x2_t y) { return vbslq_f64(vcltq_f64(x, y), x, y); }

inline float64x2_t predict2(const Broadcast& k, const SampleColumns& s, std::size_t i) {
  float64x2_t core = vaddq_f64(vld1q_f64(s.core + i), k.shift[0]);
  float64x2_t cache = vaddq_f64(vld1q_f64(s.cache + i), k.shift[1]);
  float64x2_t disk = vaddq_f64(vld1q_f64(s.disk + i), k.shift[2]);
  float64x2_t net = vaddq_f64(vld1q_f64(s.network + i), k.shift[3]);
  core = min2(max2(core, k.zero), k.one);
  cache = max2(cache, k.zero);
  disk = max2(disk, k.zero);
  net = max2(net, k.zero);

  float64x2_t num = vmulq_f64(k.w[0], vaddq_f64(k.a[0], vmulq_f64(k.b[0], core)));
  num = vaddq_f64(num, vmulq_f64(k.w[1], vaddq_f64(k.a[1], vmulq_f64(k.b[1], cache))));
  num = vaddq_f64(num, vmulq_f64(k.w[2], vaddq_f64(k.a[2], vmulq_f64(k.b[2], disk))));
  num = vaddq_f64(num, vmulq_f64(k.w[3], vaddq_f64(k.a[3], vmulq_f64(k.b[3], net))));
  return max2(vdivq_f64(num, k.weight_sum), k.floor);
}

}  // namespace

Moments service_moments(const ModelCoefficients& m, const SampleColumns& s, const double* shift) {
  const Broadcast k(m, shift);
  const std::size_t n = s.size;
  const std::size_t body = n - n % 4;

  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < body; i += 4) {
    lo = vaddq_f64(lo, predict2(k, s, i));
    hi = vaddq_f64(hi, predict2(k, s, i + 2));
  }
  double lane[4];
  vst1q_f64(lane, lo);
  vst1q_f64(lane + 2, hi);
  for (std::size_t i = body; i < n; ++i) {
    lane[i % 4] += predict_one(m, s.core[i] + shift[0], s.cache[i] + shift[1],
                               s.disk[i] + shift[2], s.network[i] + shift[3]);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double mean = ((lane[0] + lane[1]) + (lane[2] + lane[3])) * inv_n;

  const float64x2_t vmean = vdupq_n_f64(mean);
  lo = vdupq_n_f64(0.0);
  hi = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < body; i += 4) {
    const float64x2_t d0 = vsubq_f64(predict2(k, s, i), vmean);
    const float64x2_t d1 = vsubq_f64(predict2(k, s, i + 2), vmean);
    lo = vaddq_f64(lo, vmulq_f64(d0, d0));
    hi = vaddq_f64(hi, vmulq_f64(d1, d1));
  }
  vst1q_f64(lane, lo);
  vst1q_f64(lane + 2, hi);
  for (std::size_t i = body; i < n; ++i) {
    const double d = predict_one(m, s.core[i] + shift[0], s.cache[i] + shift[1],
                                 s.disk[i] + shift[2], s.network[i] + shift[3]) -
                     mean;
    lane[i % 4] += d * d;
  }
  const double variance = ((lane[0] + lane[1]) + (lane[2] + lane[3])) * inv_n;
  return {mean, variance};
}

double row_max(std::span<const double> row) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const std::size_t n = row.size();
  const std::size_t body = n - n % 2;
  float64x2_t best = vdupq_n_f64(neg_inf);
  for (std::size_t i = 0; i < body; i += 2) best = vmaxq_f64(vld1q_f64(row.data() + i), best);
  double out = vmaxvq_f64(best);
  for (std::size_t i = body; i < n; ++i) out = row[i] > out ? row[i] : out;
  return out;
}

}  // namespace pcs::kernels::neon
