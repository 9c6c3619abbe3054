#pragma once
// Seeded random localized fields: sums of a few Gaussian bumps with random
// centres, widths and signed amplitudes. Each field is a continuous function
// sampled on the grid, so the same seed gives the same field at every
// resolution.

#include "bhc/grid.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bhc {

struct Bump {
  std::array<double, 4> centre{};
  double width = 1.0;
  double amplitude = 1.0;
};

struct RandomFieldSpec {
  int min_bumps = 1;
  int max_bumps = 4;
  double min_width = 1.2;
  double max_width = 2.5;
  double centre_spread = 1.5;  // centres uniform in [-spread, spread]^4
  bool positive = false;       // all amplitudes > 0
};

inline std::vector<Bump> random_bumps(std::uint64_t seed, const RandomFieldSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(spec.min_bumps, spec.max_bumps);
  std::uniform_real_distribution<double> centre(-spec.centre_spread, spec.centre_spread);
  std::uniform_real_distribution<double> width(spec.min_width, spec.max_width);
  std::uniform_real_distribution<double> amp(spec.positive ? 0.2 : -1.0, 1.0);
  std::vector<Bump> bumps(count(rng));
  for (auto& b : bumps) {
    for (auto& x : b.centre) x = centre(rng);
    b.width = width(rng);
    b.amplitude = amp(rng);
  }
  return bumps;
}

inline Field sample_bumps(const Grid& grid, const std::vector<Bump>& bumps) {
  return sample(grid, [&](const std::array<double, 4>& x) {
    double v = 0.0;
    for (const auto& b : bumps) {
      double r2 = 0.0;
      for (int a = 0; a < 4; ++a) r2 += (x[a] - b.centre[a]) * (x[a] - b.centre[a]);
      v += b.amplitude * std::exp(-r2 / (2.0 * b.width * b.width));
    }
    return v;
  });
}

inline Field random_field(const Grid& grid, std::uint64_t seed, const RandomFieldSpec& spec = {}) {
  return sample_bumps(grid, random_bumps(seed, spec));
}

// Seed of the i-th field of a run, decorrelated from neighbouring indices.
inline std::uint64_t field_seed(std::uint64_t base, std::uint64_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace bhc
