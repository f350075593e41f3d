#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace impactlens {

// Deterministic random source. All transformations from raw bits to
// distributions live here, so a seed pins the exact draw sequence
// independently of the standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1); never returns 0 or 1.
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
  }

  // Standard normal via Box-Muller; caches the paired deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Gamma(shape, scale) via Marsaglia-Tsang squeeze.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  // InverseGamma(shape, scale): scale / Gamma(shape, 1).
  double inverse_gamma(double shape, double scale) {
    return scale / gamma(shape, 1.0);
  }

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer; used to mix seeds and tags into stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-task seed from a master seed and a textual tag,
// stable across platforms and thread schedules.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = mix_seed(master);
  for (const char c : tag) h = mix_seed(h ^ static_cast<unsigned char>(c));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ index);
}

}  // namespace impactlens
