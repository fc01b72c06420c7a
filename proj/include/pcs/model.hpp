#pragma once

// Contention-driven service-time model: one least-squares regression per
// shared resource, combined by relevance weights into a weighted mean.

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "pcs/contention.hpp"
#include "pcs/kernels.hpp"

namespace pcs {

struct TrainingSample {
  ContentionVector contention;
  double service_time = 0.0;  // seconds, > 0
};

// One (reading, service time) pair for a single resource.
struct ScalarSample {
  double reading = 0.0;
  double service_time = 0.0;
};

// service_time ~ intercept + slope * reading, with weight = |Pearson r|.
struct ResourceRegression {
  Resource resource = Resource::kCore;
  double intercept = 0.0;
  double slope = 0.0;
  double weight = 0.0;

  double predict(double reading) const { return intercept + slope * reading; }

  bool operator==(const ResourceRegression&) const = default;
};

// Ordinary least squares on (reading, service_time).
// Throws kTooFewSamples below 3 samples, kDegenerateSamples when every reading
// is identical, kValidationError on non-finite or non-positive service times.
ResourceRegression train_resource_regression(std::span<const ScalarSample> samples,
                                             Resource resource);

class CombinedModel {
 public:
  static constexpr double kDefaultFloor = 1e-4;  // 0.1 ms

  // regressions are indexed by Resource. Throws kZeroWeightSum when every
  // weight is zero and kValidationError for negative/non-finite parameters.
  explicit CombinedModel(const std::array<ResourceRegression, kResourceCount>& regressions,
                         double floor = kDefaultFloor);

  const ResourceRegression& regression(Resource r) const {
    return regressions_[static_cast<std::size_t>(r)];
  }
  double floor() const { return coeffs_.floor; }
  double weight_sum() const { return coeffs_.weight_sum; }
  const kernels::ModelCoefficients& coefficients() const { return coeffs_; }

  // Weighted combination before the floor clamp. Inputs are clamped the same
  // way as in predict (non-negative, core usage <= 1).
  double combine_unclamped(const ContentionVector& u) const;

  // max(floor, combine_unclamped(u)).
  double predict(const ContentionVector& u) const {
    return kernels::predict_one(coeffs_, u.core_usage, u.cache_mpki, u.disk_bw, u.network_bw);
  }

 private:
  std::array<ResourceRegression, kResourceCount> regressions_;
  kernels::ModelCoefficients coeffs_;
};

// Requires exactly one regression per resource, in any order.
CombinedModel build_combined_model(std::span<const ResourceRegression> regressions,
                                   double floor = CombinedModel::kDefaultFloor);

double predict_service_time(const CombinedModel& model, const ContentionVector& u);

struct ServiceTimeStats {
  double mean = 0.0;      // seconds
  double variance = 0.0;  // seconds^2, population variance
};

// Mean and population variance of the predictions over samples; throws
// kEmptySamples on an empty span.
ServiceTimeStats service_time_stats(const CombinedModel& model,
                                    std::span<const ContentionVector> samples);

// Same, over a structure-of-arrays window with a per-resource shift applied to
// every sample (see kernels::service_moments).
ServiceTimeStats service_time_stats(const CombinedModel& model, const SampleWindow& window,
                                    const ContentionVector& shift = {});

// Trains all four regressions from full-vector samples and combines them. A
// resource whose readings never vary gets weight 0 instead of failing, so a
// node with, say, no network traffic still yields a usable model.
CombinedModel train_combined_model(std::span<const TrainingSample> samples,
                                   double floor = CombinedModel::kDefaultFloor);

// CSV with the exact header
//   core_usage,cache_mpki,disk_bw,network_bw,service_time_s
// Throws kParseError naming the offending line.
std::vector<TrainingSample> read_training_csv(std::istream& in);
void write_training_csv(std::ostream& out, std::span<const TrainingSample> samples);

}  // namespace pcs
