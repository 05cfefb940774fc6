#include <random>

#include "doctest.h"
#include "elsim/tensor.hpp"

using namespace elsim;

namespace {

Vec3 rand_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return {nd(rng), nd(rng), nd(rng)};
}

Mat3 rand_mat(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat3 m;
  for (double& x : m.m) x = nd(rng);
  return m;
}

double max_diff(const Mat3& a, const Mat3& b) {
  double e = 0.0;
  for (int k = 0; k < 9; ++k) e = std::max(e, std::abs(a.m[k] - b.m[k]));
  return e;
}

}  // namespace

TEST_CASE("cross matrix acts as the cross product") {
  std::mt19937_64 rng(1);
  for (int s = 0; s < 100; ++s) {
    const Vec3 a = rand_vec(rng), b = rand_vec(rng);
    const Vec3 x = cross_matrix(a) * b;
    const Vec3 y = cross(a, b);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-14));
  }
}

TEST_CASE("cross matrix product identity") {
  std::mt19937_64 rng(2);
  for (int s = 0; s < 1000; ++s) {
    const Vec3 a = rand_vec(rng), b = rand_vec(rng);
    const Mat3 lhs = transpose(cross_matrix(a)) * cross_matrix(b);
    const Mat3 rhs = dot(a, b) * Mat3::identity() - outer(b, a);
    CHECK(max_diff(lhs, rhs) <= 1e-12);
  }
}

TEST_CASE("a(x)a : A equals a . A_sym a") {
  std::mt19937_64 rng(3);
  for (int s = 0; s < 1000; ++s) {
    const Vec3 a = rand_vec(rng);
    const Mat3 A = rand_mat(rng);
    CHECK(std::abs(frobenius(outer(a, a), A) - dot(a, sym(A) * a)) <= 1e-12);
  }
}

TEST_CASE("sym and skw split a matrix") {
  std::mt19937_64 rng(4);
  const Mat3 A = rand_mat(rng);
  CHECK(max_diff(sym(A) + skw(A), A) <= 1e-15);
  CHECK(max_diff(transpose(sym(A)), sym(A)) == 0.0);
  CHECK(max_diff(transpose(skw(A)), -1.0 * skw(A)) == 0.0);
  CHECK(std::abs(frobenius(sym(A), skw(A))) <= 1e-14);
}

TEST_CASE("tangent projector annihilates d") {
  std::mt19937_64 rng(5);
  const Vec3 d = rand_vec(rng), z = rand_vec(rng);
  const Vec3 pd = tangent_projector(d) * d;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(pd[i]) <= 1e-13);
  // (|d|^2 I - d(x)d) z = -d x (d x z)
  const Vec3 pz = tangent_projector(d) * z;
  const Vec3 ref = -1.0 * cross(d, cross(d, z));
  for (int i = 0; i < 3; ++i) CHECK(pz[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("curl from a gradient matrix") {
  // v = (-y, x, 0): grad v = [[0,-1,0],[1,0,0],[0,0,0]], curl v = (0,0,2)
  Mat3 g;
  g(0, 1) = -1.0;
  g(1, 0) = 1.0;
  const Vec3 c = curl_of(g);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.0);
  CHECK(c[2] == 2.0);
}

TEST_CASE("tensor contractions match explicit sums") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  Rank6Tensor T;
  for (double& x : T.t) x = nd(rng);
  Rank3Tensor G, H;
  for (double& x : G.t) x = nd(rng);
  for (double& x : H.t) x = nd(rng);
  const Rank3Tensor TG = rank6_triple_contract(T, G);
  double lhs = triple_dot(H, TG);
  double ref = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) ref += H(i, j, k) * T(i, j, k, l, m, n) * G(l, m, n);
  CHECK(lhs == doctest::Approx(ref).epsilon(1e-12));

  const Mat3 A = rand_mat(rng);
  const Vec3 a = rand_vec(rng);
  const Mat3 Ya = contract_last(TG, a);
  const Vec3 AY = contract_leading(A, TG);
  for (int i = 0; i < 3; ++i) {
    double r = 0.0;
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r += A(j, k) * TG(j, k, i);
    CHECK(AY[i] == doctest::Approx(r).epsilon(1e-12));
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += TG(i, j, k) * a[k];
      CHECK(Ya(i, j) == doctest::Approx(s).epsilon(1e-12));
    }
  }
}
