#pragma once

#include <optional>

#include "elsim/fields.hpp"
#include "elsim/material.hpp"

namespace elsim {

/// Which algebraic representation of the Oseen-Frank density to evaluate.
enum class EnergyForm {
  K,       // K1, K2, K3 on (div d)^2, (d . curl d)^2, |d x curl d|^2
  k,       // k1 .. k5 reformulation
  tensor,  // 1/2 [grad d : Lambda : grad d + (grad d (x) d) ::: Theta ::: (grad d (x) d)]
};

/// Integrated free-energy contributions. Elastic parts follow the k1..k5 split.
struct EnergyBreakdown {
  double splay = 0.0;       // k1/2 (div d)^2
  double twist_like = 0.0;  // k2/2 |curl d|^2
  double k3_term = 0.0;     // k3/2 |d|^2 (div d)^2
  double k4_term = 0.0;     // k4/2 (d . curl d)^2
  double k5_term = 0.0;     // k5/2 |d x curl d|^2
  double magnetic_par = 0.0;   // -chi_par/2 (d . H)^2
  double magnetic_perp = 0.0;  // -chi_perp/2 |d x H|^2
  double total = 0.0;

  double elastic() const { return splay + twist_like + k3_term + k4_term + k5_term; }
  double magnetic() const { return magnetic_par + magnetic_perp; }
};

// Pointwise densities. `g` is the gradient (g_ij = d_j d_i) at the node.
double density_K_form(const MaterialParams& p, const Vec3& d, const Mat3& g);
double density_k_form(const MaterialParams& p, const Vec3& d, const Mat3& g);
double density_tensor_form(const MaterialParams& p, const Vec3& d, const Mat3& g);
double magnetic_density(const MaterialParams& p, const Vec3& d, const Vec3& H);

/// dF/d(grad d) = Lambda : grad d + d . Theta ::: (grad d (x) d) at a node.
Mat3 elastic_stress(const MaterialParams& p, const Vec3& d, const Mat3& g);
/// Explicit part dF/dd = grad d : Theta ::: (grad d (x) d) at a node (no magnetic term).
Vec3 elastic_explicit_force(const MaterialParams& p, const Vec3& d, const Mat3& g);
/// dF_H/dd of the magnetic energy: -chi_par (d.H) H + chi_perp H x (H x d).
Vec3 magnetic_force(const MaterialParams& p, const Vec3& d, const Vec3& H);

ScalarField oseen_frank_density(const MaterialParams& p, const VectorField& d, EnergyForm form);

EnergyBreakdown total_free_energy(const MaterialParams& p, const VectorField& d,
                                  const VectorField& H);

/// Total discrete free energy F_H(d) (elastic + magnetic), tensor form.
double free_energy(const MaterialParams& p, const VectorField& d, const VectorField& H);

enum class DerivativeForm { tensor, explicit_curl };

/// Variational derivative q = delta F_H / delta d.
///
/// The tensor form is the exact gradient of the discrete functional with respect
/// to the discrete inner product on periodic grids.
VectorField variational_derivative(const MaterialParams& p, const VectorField& d,
                                   const VectorField& H,
                                   DerivativeForm form = DerivativeForm::tensor);

/// q_n = R_n(q) + gamma d, the projected variational derivative used by the scheme.
VectorField projected_variational_derivative(const MaterialParams& p, const VectorField& d,
                                             const VectorField& H,
                                             const std::optional<SpectralCutoff>& cutoff = {});

}  // namespace elsim
