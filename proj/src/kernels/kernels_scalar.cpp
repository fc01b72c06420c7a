#include <limits>

#include "pcs/kernels.hpp"

namespace pcs::kernels::scalar {

Moments service_moments(const ModelCoefficients& m, const SampleColumns& s, const double* shift) {
  const std::size_t n = s.size;
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    lane[i % 4] += predict_one(m, s.core[i] + shift[0], s.cache[i] + shift[1],
                               s.disk[i] + shift[2], s.network[i] + shift[3]);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double mean = ((lane[0] + lane[1]) + (lane[2] + lane[3])) * inv_n;

  double sq[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = predict_one(m, s.core[i] + shift[0], s.cache[i] + shift[1],
                                 s.disk[i] + shift[2], s.network[i] + shift[3]) -
                     mean;
    sq[i % 4] += d * d;
  }
  const double variance = ((sq[0] + sq[1]) + (sq[2] + sq[3])) * inv_n;
  return {mean, variance};
}

double row_max(std::span<const double> row) {
  double best = -std::numeric_limits<double>::infinity();
  for (double v : row) best = v > best ? v : best;
  return best;
}

}  // namespace pcs::kernels::scalar
