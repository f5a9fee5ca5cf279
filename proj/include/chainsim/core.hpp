// Basic types shared by all chainsim modules: simulated time, resource
// vectors, error classes and validation diagnostics.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace chainsim {

// Simulated time is integer nanoseconds throughout the engine.
using Ns = std::int64_t;

inline constexpr Ns kNsPerSecond = 1'000'000'000;

inline Ns seconds_to_ns(double s) { return static_cast<Ns>(std::llround(s * 1e9)); }
inline double ns_to_seconds(Ns t) { return static_cast<double>(t) / 1e9; }

// Smallest integer nanosecond count covering `seconds`, never less than 1.
// Events are quantized to 1 ns and never scheduled at "now".
inline Ns ceil_duration_ns(double seconds) {
  double ns = std::ceil(seconds * 1e9);
  if (!(ns > 0.0)) return 1;
  if (ns >= 9.0e18) return std::numeric_limits<Ns>::max() / 4;
  return static_cast<Ns>(ns);
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error { public: using Error::Error; };
class ReferenceError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class TopologyError : public Error { public: using Error::Error; };
class NoPathError : public Error { public: using Error::Error; };
class GraphError : public Error { public: using Error::Error; };
class UnschedulableError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class StalledTransferError : public Error { public: using Error::Error; };
class DeadlockError : public Error { public: using Error::Error; };
class DrainTimeoutError : public Error { public: using Error::Error; };

// Host-side resource dimensions. Service-side requests map onto these
// one to one (CPU requests -> millicores, mem requests -> mem, ...).
enum class Resource : int {
  Millicores = 0,
  Mem,
  InBw,
  OutBw,
  BlkioBw,
  BlkioSize,
};

inline constexpr int kResourceCount = 6;

inline const char* resource_name(Resource r) {
  switch (r) {
    case Resource::Millicores: return "millicores";
    case Resource::Mem: return "mem";
    case Resource::InBw: return "in_bw";
    case Resource::OutBw: return "out_bw";
    case Resource::BlkioBw: return "blkio_bw";
    case Resource::BlkioSize: return "blkio_size";
  }
  return "?";
}

inline const std::array<Resource, kResourceCount>& all_resources() {
  static const std::array<Resource, kResourceCount> r = {
      Resource::Millicores, Resource::Mem,     Resource::InBw,
      Resource::OutBw,      Resource::BlkioBw, Resource::BlkioSize};
  return r;
}

struct ResourceVector {
  std::array<double, kResourceCount> v{};

  double& operator[](Resource r) { return v[static_cast<int>(r)]; }
  double operator[](Resource r) const { return v[static_cast<int>(r)]; }

  ResourceVector& operator-=(const ResourceVector& o) {
    for (int i = 0; i < kResourceCount; ++i) v[i] -= o.v[i];
    return *this;
  }
  ResourceVector& operator+=(const ResourceVector& o) {
    for (int i = 0; i < kResourceCount; ++i) v[i] += o.v[i];
    return *this;
  }
  bool fits_within(const ResourceVector& capacity) const {
    for (int i = 0; i < kResourceCount; ++i)
      if (v[i] > capacity.v[i]) return false;
    return true;
  }
  bool operator==(const ResourceVector& o) const { return v == o.v; }
};

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string path;     // JSON path of the offending value
  std::string message;

  std::string str() const {
    std::string s = severity == Severity::Error ? "error: " : "warning: ";
    s += path;
    s += ": ";
    s += message;
    return s;
  }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

}  // namespace chainsim
