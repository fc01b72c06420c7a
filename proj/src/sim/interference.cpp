#include "pcs/sim/interference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "pcs/error.hpp"

namespace pcs::sim {

namespace {

void validate(const WorkloadClass& cls) {
  auto bad = [&](const std::string& what) {
    throw Error(ErrorCode::kBadConfig, "workload class '" + cls.name + "': " + what);
  };
  if (!std::isfinite(cls.rate) || cls.rate < 0.0) bad("rate must be >= 0");
  if (!(cls.min_duration > 0.0) || !(cls.max_duration >= cls.min_duration)) {
    bad("durations must satisfy 0 < min <= max");
  }
  if (!cls.footprint_at_full.valid()) bad("footprint must be finite and non-negative");
  if (cls.size_table.empty()) bad("size table is empty");
  for (std::size_t i = 0; i < cls.size_table.size(); ++i) {
    const auto& p = cls.size_table[i];
    if (!(p.size_gb > 0.0) || !(p.intensity >= 0.0) || !std::isfinite(p.intensity)) {
      bad("size table entries need size > 0 and intensity >= 0");
    }
    if (i > 0 && !(p.size_gb > cls.size_table[i - 1].size_gb)) bad("size table must ascend");
  }
}

}  // namespace

double intensity_for_size(const WorkloadClass& cls, double size_gb) {
  const auto& t = cls.size_table;
  if (size_gb <= t.front().size_gb) return t.front().intensity;
  if (size_gb >= t.back().size_gb) return t.back().intensity;
  std::size_t hi = 1;
  while (t[hi].size_gb < size_gb) ++hi;
  const auto& a = t[hi - 1];
  const auto& b = t[hi];
  const double f =
      (std::log(size_gb) - std::log(a.size_gb)) / (std::log(b.size_gb) - std::log(a.size_gb));
  return a.intensity + f * (b.intensity - a.intensity);
}

JobMix default_job_mix() {
  JobMix mix;
  WorkloadClass cpu;
  cpu.name = "cpu_heavy";
  cpu.rate = 0.004;
  cpu.footprint_at_full = {1.0, 8.0, 20e6, 10e6};
  cpu.size_table = {{0.5, 0.31}, {2.0, 0.61}, {8.0, 0.79}};
  mix.classes.push_back(cpu);

  WorkloadClass io;
  io.name = "io_heavy";
  io.rate = 0.003;
  io.footprint_at_full = {0.3, 4.0, 150e6, 40e6};
  io.size_table = {{0.05, 0.2}, {1.0, 0.5}, {4.0, 0.9}};
  io.sampling = SizeSampling::kLogUniform;
  mix.classes.push_back(io);

  WorkloadClass mixed;
  mixed.name = "mixed";
  mixed.rate = 0.003;
  mixed.footprint_at_full = {0.6, 12.0, 60e6, 60e6};
  mixed.size_table = {{0.2, 0.25}, {1.0, 0.5}, {7.0, 0.85}};
  mixed.sampling = SizeSampling::kLogUniform;
  mix.classes.push_back(mixed);
  return mix;
}

std::vector<BatchJobSpec> generate_interference_trace(std::size_t node_count, const JobMix& mix,
                                                      double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kBadConfig, "interference horizon must be > 0");
  }
  if (!mix.node_rate_scale.empty() && mix.node_rate_scale.size() != node_count) {
    throw Error(ErrorCode::kBadConfig, "node_rate_scale needs one entry per node");
  }
  for (double s : mix.node_rate_scale) {
    if (!std::isfinite(s) || s < 0.0) {
      throw Error(ErrorCode::kBadConfig, "node_rate_scale must be >= 0");
    }
  }
  for (const auto& cls : mix.classes) validate(cls);

  std::vector<BatchJobSpec> jobs;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (NodeId n = 0; n < node_count; ++n) {
    const double scale = mix.node_rate_scale.empty() ? 1.0 : mix.node_rate_scale[n];
    for (std::size_t k = 0; k < mix.classes.size(); ++k) {
      const auto& cls = mix.classes[k];
      const double rate = cls.rate * scale;
      if (rate <= 0.0) continue;
      // One stream per (node, class) so adding a class leaves others intact.
      const std::array<std::uint32_t, 5> words{
          static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
          static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(k), 0x1f7u};
      std::seed_seq seq(words.begin(), words.end());
      std::mt19937_64 rng(seq);
      std::exponential_distribution<double> gap(rate);
      const double log_lo_d = std::log(cls.min_duration), log_hi_d = std::log(cls.max_duration);
      const double log_lo_s = std::log(cls.size_table.front().size_gb);
      const double log_hi_s = std::log(cls.size_table.back().size_gb);
      for (double t = gap(rng); t < horizon; t += gap(rng)) {
        BatchJobSpec job;
        job.workload_class = cls.name;
        job.node = n;
        job.start = t;
        job.duration = std::exp(log_lo_d + unit(rng) * (log_hi_d - log_lo_d));
        if (cls.sampling == SizeSampling::kTable) {
          job.input_size_gb = cls.size_table[rng() % cls.size_table.size()].size_gb;
        } else {
          job.input_size_gb = std::exp(log_lo_s + unit(rng) * (log_hi_s - log_lo_s));
        }
        job.contention_footprint = cls.footprint_at_full * intensity_for_size(cls, job.input_size_gb);
        jobs.push_back(std::move(job));
      }
    }
  }
  std::stable_sort(jobs.begin(), jobs.end(),
                   [](const BatchJobSpec& a, const BatchJobSpec& b) { return a.start < b.start; });
  return jobs;
}

}  // namespace pcs::sim
