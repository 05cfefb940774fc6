#pragma once

#include <cmath>
#include <random>

#include "elsim/fields.hpp"
#include "elsim/material.hpp"

namespace elsim::testing {

inline MaterialParams reference_params(double gamma = 0.0) {
  FrankConstants K{1.0, 0.8, 1.2};
  LeslieViscosities mu{0.5, -0.6, -0.1, 1.0, 0.8, 0.4};
  Susceptibilities chi{-0.1, -0.2};
  return build_params(K, mu, chi, gamma);
}

inline Grid slab(int n = 32, BoundaryMode mode = BoundaryMode::periodic) {
  const double L = 2.0 * M_PI;
  return make_grid(2, {n, n, 1}, {L, L, 1.0}, mode);
}

inline VectorField normalized(VectorField f) {
  for (std::size_t n = 0; n < f.size(); ++n) {
    Vec3 x = f.at(n);
    x *= 1.0 / norm(x);
    f.set(n, x);
  }
  return f;
}

/// Smooth unit director tilted away from e3 by low modes.
inline VectorField smooth_director(const Grid& g, double eps = 0.3) {
  return normalized(sample(g, [eps](const Vec3& p) {
    return Vec3{eps * std::sin(p[0]) * std::cos(p[1]), eps * std::cos(p[0] + 2.0 * p[1]),
                1.0 + 0.5 * eps * std::sin(p[1])};
  }));
}

inline VectorField smooth_velocity(const Grid& g, double eps = 0.2) {
  return sample(g, [eps](const Vec3& p) {
    return Vec3{eps * std::sin(p[1]), eps * std::sin(p[0]) * std::cos(p[1]),
                0.5 * eps * std::cos(p[0])};
  });
}

inline VectorField random_field(const Grid& g, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  VectorField f(g);
  for (auto& c : f.comp)
    for (double& x : c) x = nd(rng);
  return f;
}

/// Random smooth field: a few random low Fourier modes per component.
inline VectorField random_smooth_field(const Grid& g, std::uint64_t seed, int kmax = 2,
                                       double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  struct Mode { int kx, ky, kz; double a, b; };
  std::array<std::vector<Mode>, 3> modes;
  const int kz_max = g.dims == 3 ? kmax : 0;
  for (int c = 0; c < 3; ++c)
    for (int kx = -kmax; kx <= kmax; ++kx)
      for (int ky = -kmax; ky <= kmax; ++ky)
        for (int kz = -kz_max; kz <= kz_max; ++kz) modes[c].push_back({kx, ky, kz, nd(rng), nd(rng)});
  return sample(g, [&](const Vec3& p) {
    Vec3 out;
    for (int c = 0; c < 3; ++c)
      for (const auto& m : modes[c]) {
        const double ph = 2.0 * M_PI * (m.kx * p[0] / g.extent[0] + m.ky * p[1] / g.extent[1] +
                                        m.kz * p[2] / g.extent[2]);
        out[c] += (m.a * std::cos(ph) + m.b * std::sin(ph)) / (1.0 + m.kx * m.kx + m.ky * m.ky + m.kz * m.kz);
      }
    return out;
  });
}

inline VectorField random_unit_field(const Grid& g, std::uint64_t seed) {
  VectorField f = random_smooth_field(g, seed);
  for (std::size_t n = 0; n < f.size(); ++n) f.comp[2][n] += 2.0;
  return normalized(f);
}

}  // namespace elsim::testing
