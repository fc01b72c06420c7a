// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <limits>

#include "pcs/kernels.hpp"

namespace pcs::kernels::avx2 {

namespace {

struct Broadcast {
  __m256d w[4], a[4], b[4];
  __m256d weight_sum, floor, zero, one;
  __m256d shift[4];

  Broadcast(const ModelCoefficients& m, const double* s) {
    for (int r = 0; r < 4; ++r) {
      w[r] = _mm256_set1_pd(m.weight[r]);
      a[r] = _mm256_set1_pd(m.intercept[r]);
      b[r] = _mm256_set1_pd(m.slope[r]);
      shift[r] = _mm256_set1_pd(s[r]);
    }
    weight_sum = _mm256_set1_pd(m.weight_sum);
    floor = _mm256_set1_pd(m.floor);
    zero = _mm256_setzero_pd();
    one = _mm256_set1_pd(1.0);
  }
};

// Four consecutive samples starting at i; mirrors predict_one lane by lane.
inline __m256d predict4(const Broadcast& k, const SampleColumns& s, std::size_t i) {
  __m256d core = _mm256_add_pd(_mm256_loadu_pd(s.core + i), k.shift[0]);
  __m256d cache = _mm256_add_pd(_mm256_loadu_pd(s.cache + i), k.shift[1]);
  __m256d disk = _mm256_add_pd(_mm256_loadu_pd(s.disk + i), k.shift[2]);
  __m256d net = _mm256_add_pd(_mm256_loadu_pd(s.network + i), k.shift[3]);
  core = _mm256_min_pd(_mm256_max_pd(core, k.zero), k.one);
  cache = _mm256_max_pd(cache, k.zero);
  disk = _mm256_max_pd(disk, k.zero);
  net = _mm256_max_pd(net, k.zero);

  __m256d num = _mm256_mul_pd(k.w[0], _mm256_add_pd(k.a[0], _mm256_mul_pd(k.b[0], core)));
  num = _mm256_add_pd(num, _mm256_mul_pd(k.w[1], _mm256_add_pd(k.a[1], _mm256_mul_pd(k.b[1], cache))));
  num = _mm256_add_pd(num, _mm256_mul_pd(k.w[2], _mm256_add_pd(k.a[2], _mm256_mul_pd(k.b[2], disk))));
  num = _mm256_add_pd(num, _mm256_mul_pd(k.w[3], _mm256_add_pd(k.a[3], _mm256_mul_pd(k.b[3], net))));
  return _mm256_max_pd(_mm256_div_pd(num, k.weight_sum), k.floor);
}

inline double combine(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

Moments service_moments(const ModelCoefficients& m, const SampleColumns& s, const double* shift) {
  const Broadcast k(m, shift);
  const std::size_t n = s.size;
  const std::size_t body = n - n % 4;

  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) acc = _mm256_add_pd(acc, predict4(k, s, i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t i = body; i < n; ++i) {
    lane[i % 4] += predict_one(m, s.core[i] + shift[0], s.cache[i] + shift[1],
                               s.disk[i] + shift[2], s.network[i] + shift[3]);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double mean = ((lane[0] + lane[1]) + (lane[2] + lane[3])) * inv_n;

  const __m256d vmean = _mm256_set1_pd(mean);
  __m256d sq = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d d = _mm256_sub_pd(predict4(k, s, i), vmean);
    sq = _mm256_add_pd(sq, _mm256_mul_pd(d, d));
  }
  _mm256_store_pd(lane, sq);
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
  const std::size_t body = n - n % 4;
  __m256d best = _mm256_set1_pd(neg_inf);
  for (std::size_t i = 0; i < body; i += 4) {
    best = _mm256_max_pd(_mm256_loadu_pd(row.data() + i), best);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, best);
  double out = neg_inf;
  for (double v : lane) out = v > out ? v : out;
  for (std::size_t i = body; i < n; ++i) out = row[i] > out ? row[i] : out;
  return out;
}

}  // namespace pcs::kernels::avx2
