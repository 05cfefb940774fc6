#include <cmath>
#include <limits>

#include "doctest.h"
#include "elsim/control.hpp"
#include "elsim/error.hpp"
#include "helpers.hpp"

using namespace elsim;
using namespace elsim::testing;

namespace {

VectorField uniform_field(const Grid& g, const Vec3& h) {
  return sample(g, [&](const Vec3&) { return h; });
}

ControlProblem base_problem(int n = 16) {
  const Grid g = slab(n);
  ControlProblem p;
  p.grid = g;
  p.params = reference_params();
  p.scheme.dt = 2e-3;
  p.scheme.t_end = 0.3;
  p.scheme.record_every = 1000;
  p.initial = prepare_initial_state(smooth_velocity(g), smooth_director(g, 0.3), p.params, {});
  p.v_target = p.initial.v;
  p.d_target = p.initial.d;
  return p;
}

// Targets reached by the scheme itself under the field H.
void set_targets(ControlProblem& p, const VectorField& H) {
  SchemeConfig cfg = p.scheme;
  cfg.H = H;
  const SimulationTrace tr = integrate(p.initial, p.params, cfg);
  p.v_target = tr.states.back().v;
  p.d_target = tr.states.back().d;
}

}  // namespace

TEST_CASE("cost J on exact matches") {
  ControlProblem p = base_problem(8);
  const Grid& g = p.grid;
  const double V = g.volume();
  CHECK(cost_J(p.initial, VectorField(g), p) == 0.0);
  const double h = 0.7;
  CHECK(cost_J(p.initial, uniform_field(g, {h, 0, 0}), p) ==
        doctest::Approx(p.gamma * h * h * V).epsilon(1e-13));

  // mismatch adds ||dv||^2 + ||dd||_{H1}^2
  FieldState s = p.initial;
  s.v.comp[0][0] += 1.0;
  CHECK(cost_J(s, VectorField(g), p) == doctest::Approx(g.weight(0)).epsilon(1e-12));
}

TEST_CASE("L3 projection") {
  const Grid g = slab(8);
  const VectorField H = random_smooth_field(g, 3, 2, 1.0);
  const double n3 = discrete_norm(H, NormKind::L3);

  const VectorField inside = project_control(H, 2.0 * n3);
  CHECK(max_abs(inside - H) == 0.0);

  const VectorField half = project_control(H, 0.5 * n3);
  CHECK(discrete_norm(half, NormKind::L3) == doctest::Approx(0.5 * n3).epsilon(1e-12));
  CHECK(max_abs(half - 0.5 * H) <= 1e-14 * max_abs(H));

  const VectorField twice = project_control(half, 0.5 * n3);
  CHECK(max_abs(twice - half) <= 1e-15 * max_abs(H));
}

TEST_CASE("control parametrizations") {
  const Grid g = slab(16);
  const ControlParametrization uni(g, ControlBasis::uniform);
  CHECK(uni.dimension() == 3);
  const VectorField H = uni.field({0.1, -0.2, 0.3});
  CHECK(H.at(17)[1] == -0.2);

  // kmax = 2 in 2-D: (5^2 - 1) / 2 half-space modes
  const ControlParametrization four(g, ControlBasis::fourier, 2);
  CHECK(four.dimension() == 3 + 4 * 12);
  std::vector<double> x(four.dimension());
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (double& xi : x) xi = nd(rng);
  const VectorField F = four.field(x);
  CHECK(max_abs(F) > 0.5);
  CHECK(discrete_norm(div(F), NormKind::Linf) <= 1e-12 * max_abs(F));

  // linear in the parameters
  std::vector<double> x2 = x;
  for (double& xi : x2) xi *= -2.5;
  CHECK(max_abs(four.field(x2) + 2.5 * F) <= 1e-13);

  const Grid dirichlet = slab(16, BoundaryMode::dirichlet);
  CHECK_THROWS_AS(ControlParametrization(dirichlet, ControlBasis::fourier), Error);
  CHECK_THROWS_AS(ControlParametrization(slab(4), ControlBasis::fourier, 2), ParameterError);
  CHECK(control_basis_from_string("fourier") == ControlBasis::fourier);
  CHECK_THROWS_AS(control_basis_from_string("wavelet"), Error);
}

TEST_CASE("problem validation") {
  ControlProblem p = base_problem(8);
  p.gamma = 0.0;
  CHECK_THROWS_AS(validate(p), ParameterError);
  p.gamma = 1e-3;
  p.c_H = -1.0;
  CHECK_THROWS_AS(validate(p), ParameterError);
  p.c_H = 1.0;
  p.basis = ControlBasis::fourier;
  p.kmax = 3;  // 99 parameters
  CHECK_THROWS_AS(validate(p), ParameterError);
  p.kmax = 1;
  CHECK_NOTHROW(validate(p));
  p.initial_params = {1.0, 2.0};
  CHECK_THROWS_AS(validate(p), ParameterError);
  p.initial_params.clear();
  p.v_target = VectorField(slab(16));
  CHECK_THROWS_AS(validate(p), GridMismatch);
}

TEST_CASE("reduced cost is even in H and finite differences are consistent") {
  ControlProblem p = base_problem(8);
  p.scheme.t_end = 0.1;
  set_targets(p, uniform_field(p.grid, {0.4, 0.0, 0.4}));
  ReducedCost J(p);
  const std::vector<double> x{0.2, 0.1, 0.3};
  CHECK(J(x) == doctest::Approx(J({-0.2, -0.1, -0.3})).epsilon(1e-12));

  // central differences at two steps agree to O(h^2)
  auto dJ = [&](double h) {
    return (J({0.2 + h, 0.1, 0.3}) - J({0.2 - h, 0.1, 0.3})) / (2.0 * h);
  };
  const double g1 = dJ(1e-3), g2 = dJ(5e-4);
  CHECK(std::abs(g1) > 1e-6);
  CHECK(std::abs(g1 - g2) <= 1e-3 * std::abs(g1));
  CHECK(J.evaluations() == 6);
}

TEST_CASE("blow-up is assigned infinite cost") {
  ControlProblem p = base_problem(8);
  p.scheme.dt = 0.5;
  p.scheme.t_end = 50.0;
  ReducedCost J(p);
  CHECK(J({0.0, 0.0, 0.0}) == std::numeric_limits<double>::infinity());
}

TEST_CASE("targets from the uncontrolled run give an immediate exit") {
  ControlProblem p = base_problem(8);
  p.scheme.t_end = 0.1;
  set_targets(p, VectorField(p.grid));
  const ControlResult r = optimize(p);
  CHECK(r.J_history.size() == 1);
  CHECK(r.J_history[0] == 0.0);
  CHECK(r.stop_reason == "zero cost");
  CHECK(r.evaluations == 1);
  CHECK(max_abs(r.H_opt) == 0.0);
}

TEST_CASE("manufactured recovery of a uniform field") {
  ControlProblem p = base_problem(16);
  p.gamma = 1e-5;
  p.c_H = 3.0;
  const VectorField H_star = uniform_field(p.grid, {0.5, 0.0, 0.5});
  REQUIRE(discrete_norm(H_star, NormKind::L3) <= p.c_H);
  set_targets(p, H_star);
  const double J_star = p.gamma * inner(H_star, H_star);

  const ControlResult r = optimize(p);
  REQUIRE(!r.J_history.empty());
  CHECK(r.J_history.front() > 5.0 * J_star);
  CHECK(r.J_history.back() <= J_star * (1.0 + 1e-2));
  CHECK(r.evaluations <= p.max_state_solves);
  for (std::size_t i = 1; i < r.J_history.size(); ++i)
    CHECK(r.J_history[i] <= r.J_history[i - 1]);
  for (const auto& row : r.log) CHECK(row.H_L3 <= p.c_H * (1.0 + 1e-12));
  CHECK(r.log.size() == r.J_history.size());

  // the trace belongs to the returned control
  CHECK(cost_J(r.final_trace.states.back(), r.H_opt, p) ==
        doctest::Approx(r.J_history.back()).epsilon(1e-12));

  // determinism
  const ControlResult again = optimize(p);
  CHECK(again.params == r.params);
}

TEST_CASE("a tight constraint is respected") {
  ControlProblem p = base_problem(8);
  p.scheme.t_end = 0.2;
  p.gamma = 1e-5;
  p.c_H = 0.5;
  p.max_state_solves = 60;
  set_targets(p, uniform_field(p.grid, {0.8, 0.0, 0.8}));
  const ControlResult r = optimize(p);
  CHECK(r.evaluations <= 60);
  CHECK(r.J_history.back() < r.J_history.front());
  for (const auto& row : r.log) CHECK(row.H_L3 <= 0.5 * (1.0 + 1e-12));
  CHECK(discrete_norm(r.H_opt, NormKind::L3) <= 0.5 * (1.0 + 1e-12));
}
