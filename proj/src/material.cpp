#include "elsim/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "elsim/error.hpp"

namespace elsim {
namespace {

constexpr double delta(std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; }

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace

Rank4Tensor make_lambda_tensor(double k1, double k2) {
  Rank4Tensor L;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l)
          L(i, j, k, l) = k1 * delta(i, j) * delta(k, l) +
                          k2 * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k));
  return L;
}

Rank6Tensor make_theta_tensor(double k3, double k4, double k5) {
  Rank6Tensor T;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l)
          for (std::size_t m = 0; m < 3; ++m)
            for (std::size_t n = 0; n < 3; ++n) {
              const double t3 = delta(i, j) * delta(l, m) * delta(k, n);
              const double t5 = delta(i, l) * delta(m, n) * delta(j, k) -
                                delta(m, i) * delta(l, n) * delta(j, k) -
                                delta(l, j) * delta(m, n) * delta(i, k) +
                                delta(j, m) * delta(l, n) * delta(i, k);
              const double t4 = delta(k, n) * delta(j, m) * delta(i, l) +
                                delta(k, m) * delta(j, l) * delta(i, n) +
                                delta(k, l) * delta(j, n) * delta(i, m) -
                                delta(k, n) * delta(j, l) * delta(i, m) -
                                delta(k, m) * delta(j, n) * delta(i, l) -
                                delta(k, l) * delta(j, m) * delta(i, n);
              T(i, j, k, l, m, n) = k3 * t3 + k5 * t5 + k4 * t4;
            }
  return T;
}

MaterialParams build_params(const FrankConstants& frank, const LeslieViscosities& visc,
                            const Susceptibilities& chi, double gamma_shift) {
  const double inputs[] = {frank.K1, frank.K2,  frank.K3,      visc.mu1,     visc.mu2,
                           visc.mu3, visc.mu4,  visc.mu5,      visc.mu6,     chi.chi_par,
                           chi.chi_perp, gamma_shift};
  for (double x : inputs) require(std::isfinite(x), "non-finite material parameter");

  require(frank.K1 > 0.0 && frank.K2 > 0.0 && frank.K3 > 0.0,
          "Frank constants must be positive (K1, K2, K3 > 0)");

  MaterialParams p;
  p.frank = frank;
  p.visc = visc;
  p.chi = chi;
  p.gamma_shift = gamma_shift;
  p.lambda = visc.mu2 + visc.mu3;  // Parodi

  require(visc.mu4 > 0.0, "dissipativity violated: mu4 > 0 required");
  require(p.w_Dd() > 0.0, "dissipativity violated: mu5 + mu6 - lambda^2 > 0 required");
  require(p.w_dDd() > 0.0, "dissipativity violated: mu1 + lambda^2 > 0 required");

  require(chi.chi_par < 0.0 && chi.chi_perp < 0.0,
          "diamagnetic susceptibilities required: chi_par < 0 and chi_perp < 0");
  require(chi.chi_par > chi.chi_perp, "susceptibility ordering violated: chi_par > chi_perp");

  p.k1 = 0.5 * frank.K1;
  p.k3 = p.k1;
  p.k2 = 0.5 * std::min(frank.K2, frank.K3);
  p.k4 = frank.K2 - p.k2;
  p.k5 = frank.K3 - p.k2;
  require(p.k1 > 0.0 && p.k2 > 0.0, "reformulated constants must satisfy k1, k2 > 0");
  require(p.k3 >= 0.0 && p.k4 >= 0.0 && p.k5 >= 0.0,
          "reformulated constants must satisfy k3, k4, k5 >= 0");

  p.k_coercive = 0.5 * std::min(p.k1, p.k2);
  p.Lambda = make_lambda_tensor(p.k1, p.k2);
  p.Theta = make_theta_tensor(p.k3, p.k4, p.k5);
  return p;
}

double ellipticity_certificate(const MaterialParams& params, long samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&] {
    Vec3 a;
    double n = 0.0;
    while (n < 1e-8) {
      a = {gauss(rng), gauss(rng), gauss(rng)};
      n = norm(a);
    }
    return (1.0 / n) * a;
  };

  double best = std::numeric_limits<double>::infinity();
  for (long s = 0; s < samples; ++s) {
    const Vec3 a = random_unit();
    const Vec3 b = random_unit();
    const Mat3 ab = outer(a, b);
    best = std::min(best, frobenius(ab, rank4_double_contract(params.Lambda, ab)));
  }
  return best;
}

}  // namespace elsim
