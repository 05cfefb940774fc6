#pragma once

// Small dense tensor algebra over R^3.
//
// Index conventions:
//   (grad f)_{ij} = d f_i / d x_j
//   (A (x) a)_{ijk} = A_{ij} a_k
//   (L : A)_{ij}    = sum_{kl} L_{ijkl} A_{kl}
//   (T ::: G)_{ijk} = sum_{lmn} T_{ijklmn} G_{lmn}
//   (a . T)_{ijlmn} = sum_k a_k T_{ijklmn}
//   (A : T)_{klmn}  = sum_{ij} A_{ij} T_{ijklmn}
//   (A : Y)_k       = sum_{ij} A_{ij} Y_{ijk}   (matrix against the leading pair of a rank-3)

#include <array>
#include <cmath>
#include <cstddef>

namespace elsim {

struct Vec3 {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double x, double y, double z) : c{x, y, z} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr Vec3& operator+=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }

  static constexpr Vec3 unit(std::size_t i) {
    Vec3 e;
    e.c[i] = 1.0;
    return e;
  }
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(Vec3 a) { return a *= -1.0; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3& a) { return dot(a, a); }

struct Mat3 {
  std::array<double, 9> m{};  // row-major

  constexpr double& operator()(std::size_t i, std::size_t j) { return m[3 * i + j]; }
  constexpr double operator()(std::size_t i, std::size_t j) const { return m[3 * i + j]; }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) m[i] += o.m[i];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) m[i] -= o.m[i];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& x : m) x *= s;
    return *this;
  }

  static constexpr Mat3 identity() {
    Mat3 I;
    I(0, 0) = I(1, 1) = I(2, 2) = 1.0;
    return I;
  }
};

constexpr Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
constexpr Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
constexpr Mat3 operator*(double s, Mat3 a) { return a *= s; }
constexpr Mat3 operator*(Mat3 a, double s) { return a *= s; }

constexpr Mat3 transpose(const Mat3& a) {
  Mat3 t;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) t(i, j) = a(j, i);
  return t;
}

constexpr Vec3 operator*(const Mat3& a, const Vec3& x) {
  Vec3 y;
  for (std::size_t i = 0; i < 3; ++i) y[i] = a(i, 0) * x[0] + a(i, 1) * x[1] + a(i, 2) * x[2];
  return y;
}

constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t j = 0; j < 3; ++j) c(i, k) += a(i, j) * b(j, k);
  return c;
}

/// Frobenius product A : B.
constexpr double frobenius(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
  return s;
}

constexpr double trace(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

constexpr Mat3 outer(const Vec3& a, const Vec3& b) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
  return r;
}

constexpr Mat3 sym(const Mat3& a) { return 0.5 * (a + transpose(a)); }
constexpr Mat3 skw(const Mat3& a) { return 0.5 * (a - transpose(a)); }

struct SymSkw {
  Mat3 sym;
  Mat3 skw;
};

constexpr SymSkw sym_skw_split(const Mat3& a) { return {sym(a), skw(a)}; }

/// [a]_x, the matrix with [a]_x b = a x b.
constexpr Mat3 cross_matrix(const Vec3& a) {
  Mat3 r;
  r(0, 1) = -a[2];
  r(0, 2) = a[1];
  r(1, 0) = a[2];
  r(1, 2) = -a[0];
  r(2, 0) = -a[1];
  r(2, 1) = a[0];
  return r;
}

/// Projector |d|^2 I - d (x) d, equal to [d]_x^T [d]_x.
constexpr Mat3 tangent_projector(const Vec3& d) {
  return norm2(d) * Mat3::identity() - outer(d, d);
}

/// Curl recovered from a gradient matrix: (curl f)_i = eps_ijk d_j f_k.
constexpr Vec3 curl_of(const Mat3& grad) {
  return {grad(2, 1) - grad(1, 2), grad(0, 2) - grad(2, 0), grad(1, 0) - grad(0, 1)};
}

// Dense tensors of rank R over R^3, stored with the last index fastest.
template <std::size_t R>
struct Tensor {
  static constexpr std::size_t rank = R;
  static constexpr std::size_t size = [] {
    std::size_t s = 1;
    for (std::size_t i = 0; i < R; ++i) s *= 3;
    return s;
  }();

  std::array<double, size> t{};

  template <typename... I>
  static constexpr std::size_t index(I... idx) {
    static_assert(sizeof...(I) == R);
    std::size_t k = 0;
    ((k = 3 * k + static_cast<std::size_t>(idx)), ...);
    return k;
  }

  template <typename... I>
  constexpr double& operator()(I... idx) {
    return t[index(idx...)];
  }
  template <typename... I>
  constexpr double operator()(I... idx) const {
    return t[index(idx...)];
  }

  constexpr Tensor& operator+=(const Tensor& o) {
    for (std::size_t i = 0; i < size; ++i) t[i] += o.t[i];
    return *this;
  }
  constexpr Tensor& operator-=(const Tensor& o) {
    for (std::size_t i = 0; i < size; ++i) t[i] -= o.t[i];
    return *this;
  }
  constexpr Tensor& operator*=(double s) {
    for (auto& x : t) x *= s;
    return *this;
  }
};

using Rank3Tensor = Tensor<3>;
using Rank4Tensor = Tensor<4>;
using Rank5Tensor = Tensor<5>;
using Rank6Tensor = Tensor<6>;

template <std::size_t R>
constexpr Tensor<R> operator+(Tensor<R> a, const Tensor<R>& b) {
  return a += b;
}
template <std::size_t R>
constexpr Tensor<R> operator-(Tensor<R> a, const Tensor<R>& b) {
  return a -= b;
}
template <std::size_t R>
constexpr Tensor<R> operator*(double s, Tensor<R> a) {
  return a *= s;
}

/// A (x) a.
constexpr Rank3Tensor outer(const Mat3& a, const Vec3& b) {
  Rank3Tensor r;
  for (std::size_t ij = 0; ij < 9; ++ij)
    for (std::size_t k = 0; k < 3; ++k) r.t[3 * ij + k] = a.m[ij] * b[k];
  return r;
}

/// Triple-dot scalar product of two rank-3 tensors.
constexpr double triple_dot(const Rank3Tensor& a, const Rank3Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < Rank3Tensor::size; ++i) s += a.t[i] * b.t[i];
  return s;
}

constexpr Mat3 rank4_double_contract(const Rank4Tensor& L, const Mat3& A) {
  Mat3 r;
  for (std::size_t ij = 0; ij < 9; ++ij) {
    double s = 0.0;
    for (std::size_t kl = 0; kl < 9; ++kl) s += L.t[9 * ij + kl] * A.m[kl];
    r.m[ij] = s;
  }
  return r;
}

constexpr Rank3Tensor rank6_triple_contract(const Rank6Tensor& T, const Rank3Tensor& G) {
  Rank3Tensor r;
  for (std::size_t ijk = 0; ijk < 27; ++ijk) {
    double s = 0.0;
    const double* row = &T.t[27 * ijk];
    for (std::size_t lmn = 0; lmn < 27; ++lmn) s += row[lmn] * G.t[lmn];
    r.t[ijk] = s;
  }
  return r;
}

/// a . T, contracting the third index of T.
constexpr Rank5Tensor rank6_left_contract(const Vec3& a, const Rank6Tensor& T) {
  Rank5Tensor r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t lmn = 0; lmn < 27; ++lmn)
          r.t[27 * (3 * i + j) + lmn] += a[k] * T.t[27 * (9 * i + 3 * j + k) + lmn];
  return r;
}

/// A : T, contracting the two leading indices of T.
constexpr Rank4Tensor rank6_left_contract(const Mat3& A, const Rank6Tensor& T) {
  Rank4Tensor r;
  for (std::size_t ij = 0; ij < 9; ++ij)
    for (std::size_t klmn = 0; klmn < 81; ++klmn) r.t[klmn] += A.m[ij] * T.t[81 * ij + klmn];
  return r;
}

/// (a . T) ::: G, a rank-5 tensor applied to a rank-3 over its trailing indices.
constexpr Mat3 rank5_triple_contract(const Rank5Tensor& P, const Rank3Tensor& G) {
  Mat3 r;
  for (std::size_t ij = 0; ij < 9; ++ij) {
    double s = 0.0;
    for (std::size_t lmn = 0; lmn < 27; ++lmn) s += P.t[27 * ij + lmn] * G.t[lmn];
    r.m[ij] = s;
  }
  return r;
}

/// Contract a . Y over the last index of a rank-3: (Y . a)_{ij} = sum_k Y_{ijk} a_k.
constexpr Mat3 contract_last(const Rank3Tensor& Y, const Vec3& a) {
  Mat3 r;
  for (std::size_t ij = 0; ij < 9; ++ij)
    r.m[ij] = Y.t[3 * ij] * a[0] + Y.t[3 * ij + 1] * a[1] + Y.t[3 * ij + 2] * a[2];
  return r;
}

/// A : Y over the leading pair: (A : Y)_k = sum_{ij} A_{ij} Y_{ijk}.
constexpr Vec3 contract_leading(const Mat3& A, const Rank3Tensor& Y) {
  Vec3 r;
  for (std::size_t ij = 0; ij < 9; ++ij)
    for (std::size_t k = 0; k < 3; ++k) r[k] += A.m[ij] * Y.t[3 * ij + k];
  return r;
}

}  // namespace elsim
