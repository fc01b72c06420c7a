#include "pcs/contention.hpp"

#include <cassert>
#include <cmath>

namespace pcs {

std::string_view to_string(Resource r) {
  switch (r) {
    case Resource::kCore: return "core";
    case Resource::kCache: return "cache";
    case Resource::kDiskBw: return "diskBW";
    case Resource::kNetworkBw: return "networkBW";
  }
  return "unknown";
}

double ContentionVector::operator[](Resource r) const {
  switch (r) {
    case Resource::kCore: return core_usage;
    case Resource::kCache: return cache_mpki;
    case Resource::kDiskBw: return disk_bw;
    case Resource::kNetworkBw: return network_bw;
  }
  return 0.0;
}

double& ContentionVector::operator[](Resource r) {
  switch (r) {
    case Resource::kCore: return core_usage;
    case Resource::kCache: return cache_mpki;
    case Resource::kDiskBw: return disk_bw;
    case Resource::kNetworkBw: break;
  }
  return network_bw;
}

ContentionVector& ContentionVector::operator+=(const ContentionVector& o) {
  core_usage += o.core_usage;
  cache_mpki += o.cache_mpki;
  disk_bw += o.disk_bw;
  network_bw += o.network_bw;
  return *this;
}

namespace {
// Written as a comparison so the result matches the SIMD max(x, 0) exactly.
inline double clamp_zero(double x) { return x > 0.0 ? x : 0.0; }
}  // namespace

ContentionVector& ContentionVector::operator-=(const ContentionVector& o) {
  core_usage = clamp_zero(core_usage - o.core_usage);
  cache_mpki = clamp_zero(cache_mpki - o.cache_mpki);
  disk_bw = clamp_zero(disk_bw - o.disk_bw);
  network_bw = clamp_zero(network_bw - o.network_bw);
  return *this;
}

ContentionVector ContentionVector::operator*(double factor) const {
  return {core_usage * factor, cache_mpki * factor, disk_bw * factor, network_bw * factor};
}

bool ContentionVector::valid() const {
  for (Resource r : kResources) {
    const double v = (*this)[r];
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return true;
}

ContentionVector ContentionVector::clamped() const {
  ContentionVector out{clamp_zero(core_usage), clamp_zero(cache_mpki), clamp_zero(disk_bw),
                       clamp_zero(network_bw)};
  out.core_usage = out.core_usage < 1.0 ? out.core_usage : 1.0;
  return out;
}

ContentionVector mean_of(std::span<const ContentionVector> samples) {
  assert(!samples.empty());
  ContentionVector sum;
  for (const auto& s : samples) sum += s;
  return sum * (1.0 / static_cast<double>(samples.size()));
}

SampleWindow::SampleWindow(std::span<const ContentionVector> samples) {
  core.reserve(samples.size());
  cache.reserve(samples.size());
  disk.reserve(samples.size());
  network.reserve(samples.size());
  for (const auto& s : samples) push_back(s);
}

void SampleWindow::push_back(const ContentionVector& v) {
  core.push_back(v.core_usage);
  cache.push_back(v.cache_mpki);
  disk.push_back(v.disk_bw);
  network.push_back(v.network_bw);
}

ContentionVector SampleWindow::at(std::size_t i) const {
  return {core[i], cache[i], disk[i], network[i]};
}

std::vector<ContentionVector> SampleWindow::to_vectors() const {
  std::vector<ContentionVector> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i));
  return out;
}

}  // namespace pcs
