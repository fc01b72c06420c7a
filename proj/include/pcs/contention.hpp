#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pcs {

// The four shared resources whose contention drives a component's service time.
enum class Resource : std::uint8_t { kCore = 0, kCache = 1, kDiskBw = 2, kNetworkBw = 3 };

inline constexpr std::size_t kResourceCount = 4;
inline constexpr std::array<Resource, kResourceCount> kResources = {
    Resource::kCore, Resource::kCache, Resource::kDiskBw, Resource::kNetworkBw};

std::string_view to_string(Resource r);

// Contention readings for one component on one node.
//   core_usage  fraction of time the cores run instructions, in [0, 1]
//   cache_mpki  shared-cache misses per kilo-instruction
//   disk_bw     bytes/second read + written
//   network_bw  bytes/second sent + received
//
// Addition is plain componentwise addition. Subtraction clamps every field at
// zero, since a negative contention reading has no meaning. core_usage is only
// clamped to 1 when a vector is turned into a model input (see clamped()); the
// raw sums are kept so that add/subtract pairs stay inverse of each other.
struct ContentionVector {
  double core_usage = 0.0;
  double cache_mpki = 0.0;
  double disk_bw = 0.0;
  double network_bw = 0.0;

  double operator[](Resource r) const;
  double& operator[](Resource r);

  ContentionVector& operator+=(const ContentionVector& other);
  ContentionVector& operator-=(const ContentionVector& other);

  friend ContentionVector operator+(ContentionVector a, const ContentionVector& b) {
    return a += b;
  }
  friend ContentionVector operator-(ContentionVector a, const ContentionVector& b) {
    return a -= b;
  }
  ContentionVector operator*(double factor) const;

  // All fields finite and non-negative.
  bool valid() const;

  // Non-negative fields with core_usage capped at 1.
  ContentionVector clamped() const;

  bool operator==(const ContentionVector&) const = default;
};

// Componentwise mean; the span must be non-empty.
ContentionVector mean_of(std::span<const ContentionVector> samples);

// Structure-of-arrays window of contention samples, the layout the batched
// kernels consume.
struct SampleWindow {
  std::vector<double> core;
  std::vector<double> cache;
  std::vector<double> disk;
  std::vector<double> network;

  SampleWindow() = default;
  explicit SampleWindow(std::span<const ContentionVector> samples);

  std::size_t size() const { return core.size(); }
  bool empty() const { return core.empty(); }

  void push_back(const ContentionVector& v);
  ContentionVector at(std::size_t i) const;
  std::vector<ContentionVector> to_vectors() const;

  bool operator==(const SampleWindow&) const = default;
};

}  // namespace pcs
