#include "elsim/energy.hpp"

#include "elsim/error.hpp"

namespace elsim {

double density_K_form(const MaterialParams& p, const Vec3& d, const Mat3& g) {
  const double divd = trace(g);
  const Vec3 c = curl_of(g);
  return 0.5 * p.frank.K1 * divd * divd + 0.5 * p.frank.K2 * std::pow(dot(d, c), 2) +
         0.5 * p.frank.K3 * norm2(cross(d, c));
}

double density_k_form(const MaterialParams& p, const Vec3& d, const Mat3& g) {
  const double divd = trace(g);
  const Vec3 c = curl_of(g);
  return 0.5 * p.k1 * divd * divd + 0.5 * p.k2 * norm2(c) + 0.5 * p.k3 * norm2(d) * divd * divd +
         0.5 * p.k4 * std::pow(dot(d, c), 2) + 0.5 * p.k5 * norm2(cross(d, c));
}

double density_tensor_form(const MaterialParams& p, const Vec3& d, const Mat3& g) {
  const Rank3Tensor G = outer(g, d);
  return 0.5 * frobenius(g, rank4_double_contract(p.Lambda, g)) +
         0.5 * triple_dot(G, rank6_triple_contract(p.Theta, G));
}

double magnetic_density(const MaterialParams& p, const Vec3& d, const Vec3& H) {
  return -0.5 * p.chi.chi_par * std::pow(dot(d, H), 2) - 0.5 * p.chi.chi_perp * norm2(cross(d, H));
}

Mat3 elastic_stress(const MaterialParams& p, const Vec3& d, const Mat3& g) {
  const Rank3Tensor Y = rank6_triple_contract(p.Theta, outer(g, d));
  return rank4_double_contract(p.Lambda, g) + contract_last(Y, d);
}

Vec3 elastic_explicit_force(const MaterialParams& p, const Vec3& d, const Mat3& g) {
  const Rank3Tensor Y = rank6_triple_contract(p.Theta, outer(g, d));
  return contract_leading(g, Y);
}

Vec3 magnetic_force(const MaterialParams& p, const Vec3& d, const Vec3& H) {
  return -p.chi.chi_par * dot(d, H) * H + p.chi.chi_perp * cross(H, cross(H, d));
}

ScalarField oseen_frank_density(const MaterialParams& p, const VectorField& d, EnergyForm form) {
  const MatrixField g = grad(d);
  ScalarField out(d.grid);
  for (std::size_t n = 0; n < d.size(); ++n) {
    const Vec3 dn = d.at(n);
    const Mat3 gn = g.at(n);
    switch (form) {
      case EnergyForm::K: out.data[n] = density_K_form(p, dn, gn); break;
      case EnergyForm::k: out.data[n] = density_k_form(p, dn, gn); break;
      case EnergyForm::tensor: out.data[n] = density_tensor_form(p, dn, gn); break;
    }
  }
  return out;
}

EnergyBreakdown total_free_energy(const MaterialParams& p, const VectorField& d,
                                  const VectorField& H) {
  require_same_grid(d.grid, H.grid);
  const MatrixField g = grad(d);
  ScalarField splay(d.grid), twist(d.grid), t3(d.grid), t4(d.grid), t5(d.grid), mpar(d.grid),
      mperp(d.grid);
  for (std::size_t n = 0; n < d.size(); ++n) {
    const Vec3 dn = d.at(n);
    const Mat3 gn = g.at(n);
    const Vec3 hn = H.at(n);
    const double divd = trace(gn);
    const Vec3 c = curl_of(gn);
    splay.data[n] = 0.5 * p.k1 * divd * divd;
    twist.data[n] = 0.5 * p.k2 * norm2(c);
    t3.data[n] = 0.5 * p.k3 * norm2(dn) * divd * divd;
    t4.data[n] = 0.5 * p.k4 * std::pow(dot(dn, c), 2);
    t5.data[n] = 0.5 * p.k5 * norm2(cross(dn, c));
    mpar.data[n] = -0.5 * p.chi.chi_par * std::pow(dot(dn, hn), 2);
    mperp.data[n] = -0.5 * p.chi.chi_perp * norm2(cross(dn, hn));
  }
  const ScalarField one(d.grid, 1.0);
  EnergyBreakdown e;
  e.splay = inner(splay, one);
  e.twist_like = inner(twist, one);
  e.k3_term = inner(t3, one);
  e.k4_term = inner(t4, one);
  e.k5_term = inner(t5, one);
  e.magnetic_par = inner(mpar, one);
  e.magnetic_perp = inner(mperp, one);
  e.total = e.elastic() + e.magnetic();
  return e;
}

double free_energy(const MaterialParams& p, const VectorField& d, const VectorField& H) {
  require_same_grid(d.grid, H.grid);
  const MatrixField g = grad(d);
  ScalarField dens(d.grid);
  for (std::size_t n = 0; n < d.size(); ++n) {
    const Vec3 dn = d.at(n);
    dens.data[n] = density_tensor_form(p, dn, g.at(n)) + magnetic_density(p, dn, H.at(n));
  }
  return inner(dens, ScalarField(d.grid, 1.0));
}

namespace {

VectorField tensor_q(const MaterialParams& p, const VectorField& d, const VectorField& H) {
  const MatrixField g = grad(d);
  MatrixField stress(d.grid);
  VectorField q(d.grid);
  for (std::size_t n = 0; n < d.size(); ++n) {
    const Vec3 dn = d.at(n);
    const Mat3 gn = g.at(n);
    const Rank3Tensor Y = rank6_triple_contract(p.Theta, outer(gn, dn));
    stress.set(n, rank4_double_contract(p.Lambda, gn) + contract_last(Y, dn));
    q.set(n, contract_leading(gn, Y) + magnetic_force(p, dn, H.at(n)));
  }
  q -= div(stress);
  return q;
}

VectorField explicit_q(const MaterialParams& p, const VectorField& d, const VectorField& H) {
  const Grid& grid = d.grid;
  const MatrixField g = grad(d);
  const ScalarField divd = div(d);

  // Terms of the form div(matrix) or grad(scalar), assembled as one matrix field.
  ScalarField k3_scalar(grid);
  MatrixField flux(grid);  // k4 [d]_x (d . curl d) + 4 k5 ((grad d)_skw d (x) d)_skw
  VectorField local(grid);
  for (std::size_t n = 0; n < d.size(); ++n) {
    const Vec3 dn = d.at(n);
    const Mat3 gn = g.at(n);
    const Vec3 c = curl_of(gn);
    const double dc = dot(dn, c);
    const Mat3 W = skw(gn);
    const Vec3 Wd = W * dn;
    k3_scalar.data[n] = divd.data[n] * norm2(dn);
    flux.set(n, p.k4 * dc * cross_matrix(dn) + 4.0 * p.k5 * skw(outer(Wd, dn)));
    local.set(n, p.k3 * divd.data[n] * divd.data[n] * dn + p.k4 * dc * c +
                     4.0 * p.k5 * (transpose(W) * Wd) + magnetic_force(p, dn, H.at(n)));
  }

  VectorField q = local;
  q.axpy(-p.k1, grad(divd));
  q.axpy(p.k2, curl(curl(d)));
  q.axpy(-p.k3, grad(k3_scalar));
  q -= div(flux);
  return q;
}

}  // namespace

VectorField variational_derivative(const MaterialParams& p, const VectorField& d,
                                   const VectorField& H, DerivativeForm form) {
  require_same_grid(d.grid, H.grid);
  return form == DerivativeForm::tensor ? tensor_q(p, d, H) : explicit_q(p, d, H);
}

VectorField projected_variational_derivative(const MaterialParams& p, const VectorField& d,
                                             const VectorField& H,
                                             const std::optional<SpectralCutoff>& cutoff) {
  VectorField q = director_project(variational_derivative(p, d, H), cutoff);
  if (p.gamma_shift != 0.0) q.axpy(p.gamma_shift, d);
  return q;
}

}  // namespace elsim
