#pragma once

#include <cstdint>

#include "elsim/tensor.hpp"

namespace elsim {

/// Frank elastic constants of the splay/twist/bend form.
struct FrankConstants {
  double K1 = 1.0;
  double K2 = 1.0;
  double K3 = 1.0;
};

/// Leslie viscosities mu_1 .. mu_6.
struct LeslieViscosities {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double mu4 = 1.0;
  double mu5 = 0.0;
  double mu6 = 0.0;
};

struct Susceptibilities {
  double chi_par = -0.1;
  double chi_perp = -0.2;
};

/// Immutable, validated material description. Construct through build_params().
struct MaterialParams {
  FrankConstants frank;
  LeslieViscosities visc;
  Susceptibilities chi;

  double lambda = 0.0;  // mu2 + mu3
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0, k5 = 0.0;
  double k_coercive = 0.0;  // min(k1, k2) / 2
  double gamma_shift = 0.0;

  Rank4Tensor Lambda;
  Rank6Tensor Theta;

  // Dissipation weights appearing in the Leslie stress and the energy balance.
  double w_dDd() const { return visc.mu1 + lambda * lambda; }
  double w_Dv() const { return visc.mu4; }
  double w_Dd() const { return visc.mu5 + visc.mu6 - lambda * lambda; }
};

/// Validates the inputs and assembles the elastic tensors. Throws ParameterError
/// naming the violated condition.
MaterialParams build_params(const FrankConstants& frank, const LeslieViscosities& visc,
                            const Susceptibilities& chi, double gamma_shift = 0.0);

Rank4Tensor make_lambda_tensor(double k1, double k2);
Rank6Tensor make_theta_tensor(double k3, double k4, double k5);

/// Minimum of a(x)b : Lambda : a(x)b over `samples` random unit pairs.
double ellipticity_certificate(const MaterialParams& params, long samples,
                               std::uint64_t seed = 12345);

}  // namespace elsim
