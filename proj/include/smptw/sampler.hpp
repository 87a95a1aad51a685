#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "smptw/distribution.hpp"
#include "smptw/errors.hpp"

namespace smptw {

/// Stafford's "Mix13" 64-bit finalizer (the SplitMix64 output function).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive combination of 64-bit words into one stream key.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w + 0x9e3779b97f4a7c15ULL));
  return h;
}

template <class T>
concept UniformSource = requires(T& source) {
  { source.next_uniform() } -> std::convertible_to<double>;
};

/// Counter-based uniform stream. Output i of stream (seed, id) is a pure
/// function of (seed, id, i), so streams can be created anywhere, in any order,
/// on any thread, and reproduce bit for bit. Only integer arithmetic is used
/// before the final conversion to double.
class SeededStream {
 public:
  static constexpr double kMinUniform = 0x1.0p-53;
  static constexpr double kMaxUniform = 1.0 - 0x1.0p-53;

  SeededStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id), key_(hash_words({seed, stream_id})) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on the open interval, clamped to [2^-53, 1 - 2^-53].
  double next_uniform() noexcept {
    const double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return std::clamp(u, kMinUniform, kMaxUniform);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Inverse-transform draws Q(uᵢ) from any uniform source; advances the source.
template <UniformSource Source>
std::vector<double> sample_from(const SmptwParams& p, std::size_t n, Source& source) {
  if (n < 1) throw DomainError("sample: n must be >= 1");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::clamp(static_cast<double>(source.next_uniform()),
                                SeededStream::kMinUniform, SeededStream::kMaxUniform);
    out.push_back(quantile(p, u));
  }
  return out;
}

/// n draws from SMPtW(λ, φ) using a fresh copy of `stream`; the same stream
/// value always yields the same sample.
inline std::vector<double> sample(const SmptwParams& p, std::size_t n, SeededStream stream) {
  return sample_from(p, n, stream);
}

/// Kolmogorov-Smirnov distance sup_y |F_n(y) - F(y)|.
inline double empirical_ks_distance(std::span<const double> data, const SmptwParams& p) {
  if (data.empty()) throw DomainError("empirical_ks_distance: empty data");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i] >= 0.0)) throw DomainError("empirical_ks_distance: negative or NaN value");
    const double F = cdf(p, sorted[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

/// Asymptotic Kolmogorov-Smirnov critical value c/√n, with c = 1.63 (the
/// acceptance threshold used for sampler validation) unless overridden.
inline double ks_critical_value(std::size_t n, double c = 1.63) {
  return c / std::sqrt(static_cast<double>(n));
}

}  // namespace smptw
