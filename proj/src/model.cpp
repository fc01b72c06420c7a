#include "pcs/model.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "pcs/error.hpp"

namespace pcs {

ResourceRegression train_resource_regression(std::span<const ScalarSample> samples,
                                             Resource resource) {
  if (samples.size() < 3) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 3 samples for " + std::string(to_string(resource)) + ", got " +
                    std::to_string(samples.size()));
  }
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.reading) || !std::isfinite(s.service_time) || s.service_time <= 0.0) {
      throw Error(ErrorCode::kValidationError,
                  "training samples need finite readings and positive service times");
    }
    sum_x += s.reading;
    sum_y += s.service_time;
  }
  const double n = static_cast<double>(samples.size());
  const double mean_x = sum_x / n;
  const double mean_y = sum_y / n;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  bool all_equal = true;
  for (const auto& s : samples) {
    const double dx = s.reading - mean_x;
    const double dy = s.service_time - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    all_equal = all_equal && s.reading == samples.front().reading;
  }
  if (all_equal || sxx == 0.0) {
    throw Error(ErrorCode::kDegenerateSamples,
                "all " + std::string(to_string(resource)) + " readings are identical");
  }

  ResourceRegression out;
  out.resource = resource;
  out.slope = sxy / sxx;
  out.intercept = mean_y - out.slope * mean_x;
  // Constant service time: the reading explains nothing.
  out.weight = syy > 0.0 ? std::min(1.0, std::fabs(sxy) / std::sqrt(sxx * syy)) : 0.0;
  return out;
}

CombinedModel::CombinedModel(const std::array<ResourceRegression, kResourceCount>& regressions,
                             double floor)
    : regressions_(regressions) {
  if (!std::isfinite(floor) || floor <= 0.0) {
    throw Error(ErrorCode::kValidationError, "model floor must be a positive number of seconds");
  }
  double sum = 0.0;
  for (std::size_t r = 0; r < kResourceCount; ++r) {
    const auto& reg = regressions_[r];
    if (reg.resource != kResources[r]) {
      throw Error(ErrorCode::kValidationError, "regressions must be indexed by resource");
    }
    if (!std::isfinite(reg.weight) || reg.weight < 0.0 || !std::isfinite(reg.intercept) ||
        !std::isfinite(reg.slope)) {
      throw Error(ErrorCode::kValidationError,
                  "regression for " + std::string(to_string(reg.resource)) +
                      " has a negative or non-finite parameter");
    }
    coeffs_.weight[r] = reg.weight;
    coeffs_.intercept[r] = reg.intercept;
    coeffs_.slope[r] = reg.slope;
    sum += reg.weight;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::kZeroWeightSum, "sum of resource weights is zero");
  coeffs_.weight_sum = sum;
  coeffs_.floor = floor;
}

double CombinedModel::combine_unclamped(const ContentionVector& u) const {
  const ContentionVector c = u.clamped();
  double num = 0.0;
  for (std::size_t r = 0; r < kResourceCount; ++r) {
    num = num + coeffs_.weight[r] * regressions_[r].predict(c[kResources[r]]);
  }
  return num / coeffs_.weight_sum;
}

CombinedModel build_combined_model(std::span<const ResourceRegression> regressions,
                                   double floor) {
  if (regressions.size() != kResourceCount) {
    throw Error(ErrorCode::kValidationError, "expected exactly four per-resource regressions");
  }
  std::array<ResourceRegression, kResourceCount> by_resource{};
  std::array<bool, kResourceCount> seen{};
  for (const auto& reg : regressions) {
    const auto idx = static_cast<std::size_t>(reg.resource);
    if (idx >= kResourceCount || seen[idx]) {
      throw Error(ErrorCode::kValidationError,
                  "duplicate regression for " + std::string(to_string(reg.resource)));
    }
    seen[idx] = true;
    by_resource[idx] = reg;
  }
  return CombinedModel(by_resource, floor);
}

double predict_service_time(const CombinedModel& model, const ContentionVector& u) {
  return model.predict(u);
}

ServiceTimeStats service_time_stats(const CombinedModel& model, const SampleWindow& window,
                                    const ContentionVector& shift) {
  if (window.empty()) throw Error(ErrorCode::kEmptySamples, "no contention samples");
  const kernels::SampleColumns cols{window.core.data(), window.cache.data(), window.disk.data(),
                                    window.network.data(), window.size()};
  const double s[4] = {shift.core_usage, shift.cache_mpki, shift.disk_bw, shift.network_bw};
  const auto m = kernels::active().service_moments(model.coefficients(), cols, s);
  return {m.mean, m.variance};
}

ServiceTimeStats service_time_stats(const CombinedModel& model,
                                    std::span<const ContentionVector> samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptySamples, "no contention samples");
  return service_time_stats(model, SampleWindow(samples));
}

CombinedModel train_combined_model(std::span<const TrainingSample> samples, double floor) {
  std::array<ResourceRegression, kResourceCount> regs{};
  std::vector<ScalarSample> column(samples.size());
  for (std::size_t r = 0; r < kResourceCount; ++r) {
    const Resource res = kResources[r];
    double mean_y = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      column[i] = {samples[i].contention[res], samples[i].service_time};
      mean_y += samples[i].service_time;
    }
    try {
      regs[r] = train_resource_regression(column, res);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateSamples) throw;
      regs[r] = {res, mean_y / static_cast<double>(samples.size()), 0.0, 0.0};
    }
  }
  return CombinedModel(regs, floor);
}

namespace {

constexpr const char* kCsvHeader = "core_usage,cache_mpki,disk_bw,network_bw,service_time_s";

double parse_field(std::string_view text, std::size_t line_no) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": bad number '" +
                                            std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<TrainingSample> read_training_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw Error(ErrorCode::kParseError,
                "line 1: expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<TrainingSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::array<double, 5> f{};
    std::size_t start = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const auto comma = line.find(',', start);
      const bool last = k + 1 == f.size();
      if (last != (comma == std::string::npos)) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no) + ": expected 5 fields");
      }
      const auto end = last ? line.size() : comma;
      f[k] = parse_field(std::string_view(line).substr(start, end - start), line_no);
      start = end + 1;
    }
    TrainingSample s{{f[0], f[1], f[2], f[3]}, f[4]};
    if (!s.contention.valid() || s.service_time <= 0.0) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) +
                      ": readings must be non-negative and service time positive");
    }
    s.contention = s.contention.clamped();
    out.push_back(s);
  }
  return out;
}

void write_training_csv(std::ostream& out, std::span<const TrainingSample> samples) {
  out << kCsvHeader << '\n';
  out << std::setprecision(17);
  for (const auto& s : samples) {
    out << s.contention.core_usage << ',' << s.contention.cache_mpki << ',' << s.contention.disk_bw
        << ',' << s.contention.network_bw << ',' << s.service_time << '\n';
  }
}

}  // namespace pcs
