#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "elsim/error.hpp"
#include "elsim/fields.hpp"
#include "helpers.hpp"

using namespace elsim;
using testing::slab;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(make_grid(2, {3, 8, 1}, {1, 1, 1}, BoundaryMode::periodic), Error);
  CHECK_THROWS_AS(make_grid(4, {8, 8, 8}, {1, 1, 1}, BoundaryMode::periodic), Error);
  CHECK_THROWS_AS(make_grid(2, {8, 8, 1}, {-1, 1, 1}, BoundaryMode::periodic), Error);
  const Grid g = make_grid(3, {8, 6, 4}, {1, 2, 3}, BoundaryMode::periodic);
  CHECK(g.size() == 192);
  CHECK(g.volume() == doctest::Approx(6.0));
  CHECK(boundary_mode_from_string("dirichlet") == BoundaryMode::dirichlet);
  CHECK_THROWS(boundary_mode_from_string("neumann"));
}

TEST_CASE("mismatched grids are rejected") {
  VectorField a(slab(8)), b(slab(16));
  CHECK_THROWS_AS(a += b, GridMismatch);
  CHECK_THROWS_AS(inner(a, b), GridMismatch);
}

TEST_CASE("L2 norm of sin on a periodic line") {
  const Grid g = make_grid(2, {64, 4, 1}, {2.0 * M_PI, 1.0, 1.0}, BoundaryMode::periodic);
  const VectorField f = sample(g, [](const Vec3& p) { return Vec3{std::sin(p[0]), 0, 0}; });
  // integral over [0,2pi) x [0,1) of sin^2 = pi
  CHECK(std::abs(discrete_norm(f, NormKind::L2) - std::sqrt(M_PI)) <= 1e-10);
}

TEST_CASE("norms of constants and zero") {
  const Grid g = slab(16);
  const double V = g.volume();
  const VectorField c(g, {0.0, 3.0, 4.0});
  CHECK(discrete_norm(c, NormKind::L2) == doctest::Approx(5.0 * std::sqrt(V)).epsilon(1e-13));
  CHECK(discrete_norm(c, NormKind::L3) == doctest::Approx(5.0 * std::cbrt(V)).epsilon(1e-13));
  CHECK(discrete_norm(c, NormKind::Linf) == doctest::Approx(5.0));
  CHECK(discrete_norm(c, NormKind::H1) == doctest::Approx(5.0 * std::sqrt(V)).epsilon(1e-12));
  const VectorField z(g);
  for (auto k : {NormKind::L2, NormKind::L3, NormKind::L6, NormKind::Linf, NormKind::H1})
    CHECK(discrete_norm(z, k) == 0.0);

  const Grid gd = slab(9, BoundaryMode::dirichlet);
  CHECK(discrete_norm(VectorField(gd, {1, 0, 0}), NormKind::L2) ==
        doctest::Approx(std::sqrt(gd.volume())).epsilon(1e-13));
}

TEST_CASE("spectral derivatives are exact on trigonometric polynomials") {
  const Grid g = slab(16);
  const VectorField f = sample(g, [](const Vec3& p) {
    return Vec3{std::sin(2 * p[0]) * std::cos(p[1]), std::cos(3 * p[1]), 0.0};
  });
  const MatrixField G = grad(f);
  double err = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 p = g.position(n);
    err = std::max(err, std::abs(G.at(n)(0, 0) - 2 * std::cos(2 * p[0]) * std::cos(p[1])));
    err = std::max(err, std::abs(G.at(n)(0, 1) + std::sin(2 * p[0]) * std::sin(p[1])));
    err = std::max(err, std::abs(G.at(n)(1, 1) + 3 * std::sin(3 * p[1])));
  }
  CHECK(err <= 1e-12);
}

TEST_CASE("spectral convergence on an analytic field") {
  auto error_at = [](int n) {
    const Grid g = slab(n);
    ScalarField f(g);
    for (std::size_t i = 0; i < g.size(); ++i) f.data[i] = std::exp(std::sin(g.position(i)[0]));
    const ScalarField df = derivative(f, 0);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.position(i)[0];
      e = std::max(e, std::abs(df.data[i] - std::cos(x) * std::exp(std::sin(x))));
    }
    return e;
  };
  const double e8 = error_at(8), e16 = error_at(16);
  // far faster than any fixed algebraic order
  CHECK(e16 < e8 * 1e-4);
}

TEST_CASE("summation by parts is exact on periodic grids") {
  const Grid g = slab(16);
  const VectorField w = testing::random_field(g, 11);
  MatrixField A(g);
  const VectorField r1 = testing::random_field(g, 12), r2 = testing::random_field(g, 13),
                    r3 = testing::random_field(g, 14);
  for (std::size_t n = 0; n < g.size(); ++n)
    for (int j = 0; j < 3; ++j) {
      A.comp[0 * 3 + j][n] = r1.comp[j][n];
      A.comp[1 * 3 + j][n] = r2.comp[j][n];
      A.comp[2 * 3 + j][n] = r3.comp[j][n];
    }
  const double lhs = inner(div(A), w);
  const double rhs = -inner(A, grad(w));
  CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("Leray projection") {
  const Grid g = slab(16);
  SUBCASE("solenoidal field unchanged") {
    const VectorField v = sample(g, [](const Vec3& p) {
      return Vec3{std::cos(p[1]), std::sin(p[0]), 0.3};
    });
    const VectorField Pv = leray_project(v);
    CHECK(max_abs(Pv - v) <= 1e-12);
  }
  SUBCASE("gradient field removed") {
    ScalarField phi(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
      const Vec3 p = g.position(n);
      phi.data[n] = std::sin(p[0]) * std::cos(2 * p[1]);
    }
    CHECK(max_abs(leray_project(grad(phi))) <= 1e-12);
  }
  SUBCASE("idempotent and self-adjoint") {
    const VectorField v = testing::random_field(g, 21);
    const VectorField Pv = leray_project(v);
    CHECK(max_abs(leray_project(Pv) - Pv) <= 1e-12);
    const VectorField w = leray_project(testing::random_field(g, 22));
    CHECK(std::abs(inner(Pv, w) - inner(v, leray_project(w))) <= 1e-11);
    CHECK(discrete_norm(div(Pv), NormKind::Linf) <= 1e-11);
  }
}

TEST_CASE("Leray projection with a cutoff truncates") {
  const Grid g = slab(16);
  const VectorField v = testing::random_field(g, 23);
  const VectorField Pv = leray_project(v, SpectralCutoff{{3, 3, 0}});
  CHECK(discrete_norm(Pv, NormKind::L2) <= discrete_norm(v, NormKind::L2));
  CHECK(max_abs(leray_project(Pv, SpectralCutoff{{3, 3, 0}}) - Pv) <= 1e-12);
}

TEST_CASE("director projection") {
  const Grid g = slab(16);
  const VectorField z = testing::random_field(g, 31);
  CHECK(max_abs(director_project(z) - z) == 0.0);
  const SpectralCutoff cut{{4, 4, 0}};
  const VectorField Rz = director_project(z, cut);
  CHECK(discrete_norm(Rz, NormKind::L2) <= discrete_norm(z, NormKind::L2));
  CHECK(max_abs(director_project(Rz, cut) - Rz) <= 1e-12);
  CHECK_THROWS(validate_cutoff(g, SpectralCutoff{{9, 4, 0}}));
}

TEST_CASE("harmonic part is the mean on well-resolved fields") {
  const Grid g = slab(16);
  const VectorField f = sample(g, [](const Vec3& p) {
    return Vec3{1.5 + std::sin(p[0]), -0.5 + std::cos(p[1]), 2.0};
  });
  const VectorField S = harmonic_part(f);
  CHECK(max_abs(S - VectorField(g, {1.5, -0.5, 2.0})) <= 1e-12);
}

TEST_CASE("dirichlet differences are second order") {
  auto err = [](int n) {
    const Grid g = make_grid(2, {n, n, 1}, {1.0, 1.0, 1.0}, BoundaryMode::dirichlet);
    ScalarField f(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 p = g.position(i);
      f.data[i] = std::sin(2 * p[0]) * std::exp(p[1]);
    }
    const ScalarField dx = derivative(f, 0);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 p = g.position(i);
      e = std::max(e, std::abs(dx.data[i] - 2 * std::cos(2 * p[0]) * std::exp(p[1])));
    }
    return e;
  };
  const double rate = std::log2(err(17) / err(33));
  CHECK(rate > 1.8);
}

TEST_CASE("extension operator") {
  const Grid g = make_grid(2, {17, 17, 1}, {1.0, 1.0, 1.0}, BoundaryMode::dirichlet);
  const double k1 = 0.5, k2 = 0.3;
  SUBCASE("constant data") {
    const VectorField wall(g, {0.0, 0.6, 0.8});
    CHECK(max_abs(extension_operator(wall, k1, k2) - wall) <= 1e-10);
  }
  SUBCASE("affine data") {
    const VectorField affine = sample(g, [](const Vec3& p) {
      return Vec3{0.2 + p[0] - 0.5 * p[1], 1.0 + 2.0 * p[1], 0.3 * p[0] + 0.7 * p[1]};
    });
    VectorField wall = affine;
    for (std::size_t n = 0; n < g.size(); ++n)
      if (!g.is_boundary(n)) wall.set(n, Vec3{9, 9, 9});  // interior values ignored
    CHECK(max_abs(extension_operator(wall, k1, k2) - affine) <= 1e-10);
  }
  SUBCASE("interior residual and linearity") {
    const VectorField a = testing::random_smooth_field(g, 41);
    const VectorField b = testing::random_smooth_field(g, 42);
    const VectorField Sa = extension_operator(a, k1, k2);
    const VectorField Sb = extension_operator(b, k1, k2);
    CHECK(max_abs(lambda_laplacian(Sa, k1, k2)) <= 1e-9);
    const VectorField Sab = extension_operator(a + 2.0 * b, k1, k2);
    CHECK(max_abs(Sab - (Sa + 2.0 * Sb)) <= 1e-9);
  }
  CHECK_THROWS(extension_operator(VectorField(slab(8)), k1, k2));
}

TEST_CASE("dirichlet Leray projection") {
  const Grid g = make_grid(2, {17, 17, 1}, {1.0, 1.0, 1.0}, BoundaryMode::dirichlet);
  const VectorField v = testing::random_smooth_field(g, 51);
  const VectorField Pv = leray_project(v);
  for (std::size_t n = 0; n < g.size(); ++n)
    if (g.is_boundary(n)) CHECK(norm(Pv.at(n)) == 0.0);
  CHECK(max_abs(leray_project(Pv) - Pv) <= 1e-8);
}

TEST_CASE("snapshot round trip") {
  const Grid g = make_grid(3, {4, 5, 6}, {1, 2, 3}, BoundaryMode::periodic);
  const VectorField a = testing::random_field(g, 61), b = testing::random_field(g, 62);
  const auto path = (std::filesystem::temp_directory_path() / "elsim_snap_test.bin").string();
  write_snapshot(path, {a, b});
  const auto back = read_snapshot(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].grid == g);
  CHECK(max_abs(back[0] - a) == 0.0);
  CHECK(max_abs(back[1] - b) == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS(read_snapshot(path));
}
