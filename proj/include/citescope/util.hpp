#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace citescope {

// ---------------------------------------------------------------------------
// Stable hashing. std::hash is not stable across builds, so artifact version
// hashes use 64-bit FNV-1a.
// ---------------------------------------------------------------------------
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes);
  Fnv1a& add(std::uint64_t v);
  Fnv1a& add(double v);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string to_hex(std::uint64_t v);

/// splitmix64 finalizer; used to derive independent seeds for parallel units.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic RNG. Distributions are implemented here rather than taken from
/// <random>, whose distribution algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);
  /// Uniform double in [0, 1).
  double uniform01();

 private:
  std::mt19937_64 engine_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

// ---------------------------------------------------------------------------
// Strings
// ---------------------------------------------------------------------------
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
std::vector<std::string> split_ws(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const float> a, std::span<const float> b);

/// Linear-interpolated quantile (type 7) of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace citescope
