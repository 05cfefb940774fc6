#include <random>

#include "doctest.h"
#include "elsim/error.hpp"
#include "elsim/scheme.hpp"
#include "helpers.hpp"

using namespace elsim;
using testing::slab;

namespace {

// Leslie stress before eliminating the time derivative: e is supplied directly.
Mat3 leslie_with_e(const MaterialParams& p, const Vec3& d, const Mat3& D, const Vec3& e) {
  const Vec3 Dd = D * d;
  Mat3 T = (p.visc.mu1 * dot(d, Dd)) * outer(d, d);
  T += p.visc.mu4 * D;
  T += (p.visc.mu5 + p.visc.mu6) * sym(outer(d, Dd));
  T += (p.visc.mu2 + p.visc.mu3) * sym(outer(d, e));
  T += p.lambda * skw(outer(d, Dd));
  T += skw(outer(d, e));
  return T;
}

double max_diff(const Mat3& a, const Mat3& b) {
  double e = 0.0;
  for (int k = 0; k < 9; ++k) e = std::max(e, std::abs(a.m[k] - b.m[k]));
  return e;
}

SchemeConfig config_for(const Grid& g, double dt, double t_end, Vec3 H = {}) {
  SchemeConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.H = VectorField(g, H);
  return c;
}

}  // namespace

TEST_CASE("Leslie stress special cases") {
  const auto p = testing::reference_params();
  CHECK(max_diff(leslie_stress_at(p, {0, 0, 1}, Mat3{}, Vec3{}), Mat3{}) == 0.0);
  Mat3 D;
  D(0, 0) = 1.0;
  D(1, 1) = -1.0;
  CHECK(max_diff(leslie_stress_at(p, {0, 0, 1}, D, Vec3{}), p.visc.mu4 * D) <= 1e-15);
}

TEST_CASE("Leslie stress equals the form with the e vector substituted") {
  const auto p = testing::reference_params();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int s = 0; s < 500; ++s) {
    Vec3 d{nd(rng), nd(rng), nd(rng)};
    d *= 1.0 / norm(d);
    Mat3 A;
    for (double& x : A.m) x = nd(rng);
    const Mat3 D = sym(A);
    const Vec3 q{nd(rng), nd(rng), nd(rng)};
    Vec3 z = p.lambda * (D * d);
    z += q;
    const Vec3 e = -1.0 * (tangent_projector(d) * z);
    CHECK(max_diff(leslie_stress_at(p, d, D, q), leslie_with_e(p, d, D, e)) <= 1e-10);
  }
}

TEST_CASE("stress power expands into the dissipation terms") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  const VectorField v = leray_project(testing::random_smooth_field(g, 1));
  const VectorField d = testing::random_unit_field(g, 2);
  const VectorField q = testing::random_smooth_field(g, 3);
  const MatrixField T = leslie_stress(v, d, q, p);
  const MatrixField gv = grad(v);
  ScalarField rhs(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 dn = d.at(n), qn = q.at(n);
    const Mat3 D = sym(gv.at(n)), W = skw(gv.at(n));
    const Vec3 Dd = D * dn;
    rhs.data[n] = p.w_dDd() * std::pow(dot(dn, Dd), 2) + p.w_Dv() * frobenius(D, D) +
                  p.w_Dd() * norm2(Dd) - p.lambda * dot(tangent_projector(dn) * qn, Dd) +
                  norm2(dn) * dot(qn, W * dn);
  }
  const double lhs = inner(T, gv);
  const double ref = inner(rhs, ScalarField(g, 1.0));
  CHECK(std::abs(lhs - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
}

TEST_CASE("equilibrium has zero rates") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  FieldState s{VectorField(g), VectorField(g, {0, 0.6, 0.8}), 0.0};
  const Rates r = assemble_rhs(s, p, config_for(g, 1e-3, 1e-2));
  CHECK(max_abs(r.dv_dt) <= 1e-14);
  CHECK(max_abs(r.dd_dt) <= 1e-14);
}

TEST_CASE("constant director under a solenoidal flow") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  const Vec3 d0{0, 0.6, 0.8};
  FieldState s{leray_project(testing::random_smooth_field(g, 4)), VectorField(g, d0), 0.0};
  const Rates r = assemble_rhs(s, p, config_for(g, 1e-3, 1e-2));
  const MatrixField gv = grad(s.v);
  for (std::size_t n = 0; n < g.size(); ++n) {
    Vec3 x = p.lambda * (sym(gv.at(n)) * d0);
    x -= skw(gv.at(n)) * d0;
    const Vec3 ref = -1.0 * (tangent_projector(d0) * x);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r.dd_dt.at(n)[i] - ref[i]) <= 1e-12);
  }
}

TEST_CASE("Ericksen force and convection pairing cancel") {
  const Grid g = slab(16);
  const VectorField v = testing::random_field(g, 5);
  const VectorField d = testing::random_unit_field(g, 6);
  const VectorField q = testing::random_field(g, 7);
  const MatrixField gd = grad(d);
  VectorField a(g), b(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Mat3 P = tangent_projector(d.at(n));
    a.set(n, transpose(gd.at(n)) * (P * q.at(n)));
    b.set(n, P * (gd.at(n) * v.at(n)));
  }
  CHECK(std::abs(inner(a, v) - inner(b, q)) <= 1e-11 * std::max(1.0, std::abs(inner(a, v))));
}

TEST_CASE("instantaneous energy balance of the semi-discrete system") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  FieldState s{leray_project(testing::random_smooth_field(g, 8, 2, 0.3)),
               testing::random_unit_field(g, 9), 0.0};
  SchemeConfig c = config_for(g, 1e-3, 1e-2, {0.3, -0.2, 0.5});
  c.forcing.closed_form = [](const Vec3& x, double t) {
    return Vec3{std::sin(x[1]) * (1 + t), 0.5 * std::cos(x[0]), 0.2};
  };
  const Rates r = assemble_rhs(s, p, c);
  const VectorField q = variational_derivative(p, s.d, c.H);
  const double dEdt = inner(s.v, r.dv_dt) + inner(q, r.dd_dt);
  const double ref = r.dissipation.work - r.dissipation.total();
  CHECK(std::abs(dEdt - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  CHECK(r.dissipation.total() >= 0.0);
}

TEST_CASE("skew convection does no work") {
  // pure Stokes-free check: constant director, only mu4 viscosity acting
  const auto p = build_params({1, 1, 1}, {1e-3, 0, 0, 1.0, 1e-3, 0}, {-0.1, -0.2});
  const Grid g = slab(16);
  FieldState s{leray_project(testing::random_smooth_field(g, 10)), VectorField(g, {0, 0, 1}), 0.0};
  const Rates r = assemble_rhs(s, p, config_for(g, 1e-3, 1e-2));
  // (v, dv/dt) = -(T : grad v) exactly, so convection contributes nothing
  const double dKdt = inner(s.v, r.dv_dt);
  CHECK(std::abs(dKdt + r.dissipation.total()) <= 1e-11 * r.dissipation.total());
}

TEST_CASE("director rate is orthogonal to d nodewise") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  FieldState s{leray_project(testing::random_smooth_field(g, 11)),
               testing::random_unit_field(g, 12), 0.0};
  const Rates r = assemble_rhs(s, p, config_for(g, 1e-3, 1e-2, {0.1, 0.2, 0.3}));
  for (std::size_t n = 0; n < g.size(); ++n) {
    CHECK(std::abs(dot(s.d.at(n), r.dd_dt.at(n))) <= 1e-12);
    CHECK(std::abs(dot(cross(s.d.at(n), r.q.at(n)), s.d.at(n))) <= 1e-12);
  }
}

TEST_CASE("zero data stays constant") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  const FieldState s0{VectorField(g), VectorField(g, {0, 0, 1}), 0.0};
  const SchemeConfig c = config_for(g, 1e-2, 0.1);
  const SimulationTrace tr = integrate(s0, p, c);
  CHECK(tr.states.size() == 11);
  for (const auto& s : tr.states) {
    CHECK(max_abs(s.v) <= 1e-14);
    CHECK(max_abs(s.d - s0.d) <= 1e-14);
  }
  const EnergyReport rep = energy_report(tr, p, c);
  CHECK(rep.max_abs_residual <= 1e-14);
  CHECK(rep.coercivity_violations == 0);
  for (std::size_t i = 1; i < tr.states.size(); ++i) CHECK(tr.states[i].t > tr.states[i - 1].t);
}

TEST_CASE("configuration errors") {
  const auto p = testing::reference_params();
  const Grid g = slab(8);
  const FieldState s0{VectorField(g), VectorField(g, {0, 0, 1}), 0.0};
  CHECK_THROWS_AS(integrate(s0, p, config_for(g, 0.0, 0.1)), ParameterError);
  CHECK_THROWS_AS(integrate(s0, p, config_for(g, -1e-3, 0.1)), ParameterError);
  CHECK_THROWS_AS(integrate(s0, p, config_for(g, 0.2, 0.1)), ParameterError);
  CHECK_THROWS_AS(integrate(s0, p, config_for(slab(16), 1e-3, 0.1)), GridMismatch);
}

TEST_CASE("blow-up is detected and reported") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  const FieldState s0 = prepare_initial_state(testing::smooth_velocity(g), testing::smooth_director(g), p);
  SchemeConfig c = config_for(g, 0.5, 50.0);
  try {
    integrate(s0, p, c);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.step() > 0);
    CHECK(e.time() == doctest::Approx(e.step() * 0.5));
  }
}

TEST_CASE("energy residual converges at the integrator order") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  const FieldState s0 = prepare_initial_state(testing::smooth_velocity(g), testing::smooth_director(g), p);
  auto residual = [&](Integrator integ, double dt) {
    SchemeConfig c = config_for(g, dt, 0.2, {0.2, 0.0, 0.4});
    c.integrator = integ;
    return energy_report(integrate(s0, p, c), p, c).max_abs_residual;
  };
  SUBCASE("euler") {
    const double r1 = residual(Integrator::euler, 2e-3), r2 = residual(Integrator::euler, 1e-3);
    CHECK(std::log2(r1 / r2) == doctest::Approx(1.0).epsilon(0.15));
  }
  SUBCASE("rk4") {
    const double r1 = residual(Integrator::rk4, 1e-2), r2 = residual(Integrator::rk4, 5e-3);
    CHECK(std::log2(r1 / r2) > 3.5);
  }
}

TEST_CASE("trapezoid time quadrature is second order") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  const FieldState s0 = prepare_initial_state(testing::smooth_velocity(g), testing::smooth_director(g), p);
  auto residual = [&](double dt) {
    SchemeConfig c = config_for(g, dt, 0.2);
    return energy_report(integrate(s0, p, c), p, c, TimeQuadrature::trapezoid).max_abs_residual;
  };
  const double r1 = residual(1e-2), r2 = residual(5e-3);
  CHECK(std::log2(r1 / r2) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("a priori bounds and coercivity along a forced run") {
  const auto p = testing::reference_params(0.1);
  const Grid g = slab(16);
  const FieldState s0 = prepare_initial_state(testing::smooth_velocity(g), testing::smooth_director(g), p);
  SchemeConfig c = config_for(g, 5e-3, 0.3, {0.5, 0.1, 0.0});
  c.forcing.closed_form = [](const Vec3& x, double) { return Vec3{0.3 * std::sin(x[1]), 0, 0}; };
  c.record_every = 4;
  const SimulationTrace tr = integrate(s0, p, c);
  CHECK(tr.diagnostics.back().t == doctest::Approx(0.3));
  const EnergyReport rep = energy_report(tr, p, c);
  CHECK(rep.coercivity_violations == 0);
  CHECK(std::isfinite(rep.sup_velocity_l2));
  CHECK(std::isfinite(rep.sup_director_h1));
  const double e0 = rep.rows.front().kinetic + rep.rows.front().free_energy;
  for (const auto& row : rep.rows)
    CHECK(row.kinetic + row.free_energy <= e0 + row.work + 1e-6);
}

TEST_CASE("initial data preparation") {
  const auto p = testing::reference_params();
  const Grid g = slab(16);
  const FieldState s = prepare_initial_state(testing::random_smooth_field(g, 13),
                                             testing::random_unit_field(g, 14), p);
  CHECK(discrete_norm(div(s.v), NormKind::Linf) <= 1e-11);
  CHECK(max_abs(s.d - testing::random_unit_field(g, 14)) == 0.0);
}

TEST_CASE("dirichlet run keeps wall data") {
  const auto p = testing::reference_params();
  const Grid g = make_grid(2, {13, 13, 1}, {1.0, 1.0, 1.0}, BoundaryMode::dirichlet);
  const VectorField d_raw = testing::normalized(sample(g, [](const Vec3& x) {
    return Vec3{0.3 * std::sin(M_PI * x[0]), 0.2 * x[1], 1.0};
  }));
  const FieldState s0 = prepare_initial_state(testing::random_smooth_field(g, 15, 1, 0.1), d_raw, p);
  SchemeConfig c = config_for(g, 2e-4, 2e-3);
  const SimulationTrace tr = integrate(s0, p, c);
  const FieldState& s = tr.states.back();
  for (std::size_t n = 0; n < g.size(); ++n)
    if (g.is_boundary(n)) {
      CHECK(norm(s.v.at(n)) == 0.0);
      CHECK(norm(s.d.at(n) - d_raw.at(n)) <= 1e-14);
    }
  const EnergyReport rep = energy_report(tr, p, c);
  CHECK(rep.rows.size() == tr.states.size());
  CHECK(rep.coercivity_violations == 0);
}
