#include "elsim/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "elsim/error.hpp"
#include "sparse.hpp"
#include "spectral.hpp"

namespace elsim {

using detail::cplx;
using detail::SpectralEngine;
using detail::Spectrum;

// ---------------------------------------------------------------------------
// Grid

const char* to_string(BoundaryMode mode) {
  return mode == BoundaryMode::periodic ? "periodic" : "dirichlet";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "periodic") return BoundaryMode::periodic;
  if (s == "dirichlet") return BoundaryMode::dirichlet;
  throw Error("unknown boundary mode '" + s + "' (expected periodic or dirichlet)");
}

double Grid::spacing(int axis) const {
  if (axis >= dims) return extent[axis];
  return mode == BoundaryMode::periodic ? extent[axis] / n[axis] : extent[axis] / (n[axis] - 1);
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dims; ++a) v *= extent[a];
  return v;
}

std::array<int, 3> Grid::coords(std::size_t node) const {
  const int iz = static_cast<int>(node % n[2]);
  const std::size_t rest = node / n[2];
  const int iy = static_cast<int>(rest % n[1]);
  const int ix = static_cast<int>(rest / n[1]);
  return {ix, iy, iz};
}

Vec3 Grid::position(std::size_t node) const {
  const auto c = coords(node);
  Vec3 x;
  for (int a = 0; a < dims; ++a) x[a] = c[a] * spacing(a);
  return x;
}

bool Grid::is_boundary(std::size_t node) const {
  if (mode == BoundaryMode::periodic) return false;
  const auto c = coords(node);
  for (int a = 0; a < dims; ++a)
    if (c[a] == 0 || c[a] == n[a] - 1) return true;
  return false;
}

double Grid::weight(std::size_t node) const {
  double w = 1.0;
  if (mode == BoundaryMode::periodic) {
    for (int a = 0; a < dims; ++a) w *= spacing(a);
    return w;
  }
  const auto c = coords(node);
  for (int a = 0; a < dims; ++a) {
    const bool wall = c[a] == 0 || c[a] == n[a] - 1;
    w *= wall ? 0.5 * spacing(a) : spacing(a);
  }
  return w;
}

Grid make_grid(int dims, std::array<int, 3> points, std::array<double, 3> extent,
               BoundaryMode mode) {
  if (dims != 2 && dims != 3) throw Error("grid dims must be 2 or 3");
  Grid g;
  g.dims = dims;
  g.mode = mode;
  for (int a = 0; a < 3; ++a) {
    if (a < dims) {
      if (points[a] < 4) throw Error("grid requires at least 4 points per axis");
      if (!(extent[a] > 0.0) || !std::isfinite(extent[a]))
        throw Error("grid extents must be positive and finite");
      g.n[a] = points[a];
      g.extent[a] = extent[a];
    } else {
      g.n[a] = 1;
      g.extent[a] = 1.0;
    }
  }
  return g;
}

void validate_cutoff(const Grid& grid, const SpectralCutoff& cutoff) {
  if (grid.mode != BoundaryMode::periodic)
    throw Error("spectral cutoff requires a periodic grid");
  for (int a = 0; a < grid.dims; ++a)
    if (cutoff.kmax[a] < 0 || cutoff.kmax[a] > grid.n[a] / 2)
      throw Error("spectral cutoff exceeds the Nyquist limit of the grid");
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}

// ---------------------------------------------------------------------------
// Field arithmetic

VectorField& VectorField::operator+=(const VectorField& o) { return axpy(1.0, o); }
VectorField& VectorField::operator-=(const VectorField& o) { return axpy(-1.0, o); }

VectorField& VectorField::operator*=(double s) {
  for (auto& c : comp)
    for (auto& x : c) x *= s;
  return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& o) {
  require_same_grid(grid, o.grid);
  for (int c = 0; c < 3; ++c) {
    auto& a = comp[c];
    const auto& b = o.comp[c];
    for (std::size_t n = 0; n < a.size(); ++n) a[n] += s * b[n];
  }
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

// ---------------------------------------------------------------------------
// Finite differences (dirichlet grids)

namespace {

std::size_t stride(const Grid& g, int axis) {
  if (axis == 2) return 1;
  if (axis == 1) return static_cast<std::size_t>(g.n[2]);
  return static_cast<std::size_t>(g.n[1]) * g.n[2];
}

void fd_derivative(const Grid& g, const std::vector<double>& f, int axis, std::vector<double>& out) {
  out.assign(g.size(), 0.0);
  const std::size_t s = stride(g, axis);
  const int N = g.n[axis];
  const double inv2h = 1.0 / (2.0 * g.spacing(axis));
  for (std::size_t node = 0; node < g.size(); ++node) {
    const int i = g.coords(node)[axis];
    if (i == 0)
      out[node] = (-3.0 * f[node] + 4.0 * f[node + s] - f[node + 2 * s]) * inv2h;
    else if (i == N - 1)
      out[node] = (3.0 * f[node] - 4.0 * f[node - s] + f[node - 2 * s]) * inv2h;
    else
      out[node] = (f[node + s] - f[node - s]) * inv2h;
  }
}

detail::CsrMatrix fd_derivative_matrix(const Grid& g, int axis) {
  std::vector<detail::Triplet> t;
  const std::size_t s = stride(g, axis);
  const int N = g.n[axis];
  const double inv2h = 1.0 / (2.0 * g.spacing(axis));
  for (std::size_t node = 0; node < g.size(); ++node) {
    const int i = g.coords(node)[axis];
    if (i == 0) {
      t.push_back({node, node, -3.0 * inv2h});
      t.push_back({node, node + s, 4.0 * inv2h});
      t.push_back({node, node + 2 * s, -inv2h});
    } else if (i == N - 1) {
      t.push_back({node, node, 3.0 * inv2h});
      t.push_back({node, node - s, -4.0 * inv2h});
      t.push_back({node, node - 2 * s, inv2h});
    } else {
      t.push_back({node, node + s, inv2h});
      t.push_back({node, node - s, -inv2h});
    }
  }
  return detail::CsrMatrix(g.size(), g.size(), std::move(t));
}

void spectral_derivative(const SpectralEngine& eng, const Spectrum& fhat, int axis,
                         std::vector<double>& out) {
  Spectrum tmp(eng.spectral_size());
  const auto& k = eng.k(axis);
  for (std::size_t s = 0; s < eng.spectral_size(); ++s) tmp[s] = cplx(0.0, k[s]) * fhat[s];
  eng.inverse(tmp, out);
}

void derivative_into(const Grid& g, const std::vector<double>& f, int axis,
                     std::vector<double>& out) {
  if (axis >= g.dims) {
    out.assign(g.size(), 0.0);
    return;
  }
  if (g.mode == BoundaryMode::dirichlet) {
    fd_derivative(g, f, axis, out);
    return;
  }
  const auto& eng = SpectralEngine::get(g);
  spectral_derivative(eng, eng.forward(f), axis, out);
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis) {
  ScalarField out(f.grid);
  derivative_into(f.grid, f.data, axis, out.data);
  return out;
}

VectorField grad(const ScalarField& f) {
  VectorField out(f.grid);
  const Grid& g = f.grid;
  if (g.mode == BoundaryMode::periodic) {
    const auto& eng = SpectralEngine::get(g);
    const Spectrum fhat = eng.forward(f.data);
    for (int a = 0; a < g.dims; ++a) spectral_derivative(eng, fhat, a, out.comp[a]);
  } else {
    for (int a = 0; a < g.dims; ++a) fd_derivative(g, f.data, a, out.comp[a]);
  }
  return out;
}

MatrixField grad(const VectorField& f) {
  MatrixField out(f.grid);
  const Grid& g = f.grid;
  if (g.mode == BoundaryMode::periodic) {
    const auto& eng = SpectralEngine::get(g);
    for (int c = 0; c < 3; ++c) {
      const Spectrum fhat = eng.forward(f.comp[c]);
      for (int a = 0; a < g.dims; ++a) spectral_derivative(eng, fhat, a, out.comp[3 * c + a]);
    }
  } else {
    for (int c = 0; c < 3; ++c)
      for (int a = 0; a < g.dims; ++a) fd_derivative(g, f.comp[c], a, out.comp[3 * c + a]);
  }
  return out;
}

ScalarField div(const VectorField& f) {
  ScalarField out(f.grid);
  const Grid& g = f.grid;
  if (g.mode == BoundaryMode::periodic) {
    const auto& eng = SpectralEngine::get(g);
    Spectrum acc(eng.spectral_size());
    std::fill(acc.data(), acc.data() + acc.size(), cplx(0.0, 0.0));
    for (int a = 0; a < g.dims; ++a) {
      const Spectrum fhat = eng.forward(f.comp[a]);
      const auto& k = eng.k(a);
      for (std::size_t s = 0; s < eng.spectral_size(); ++s) acc[s] += cplx(0.0, k[s]) * fhat[s];
    }
    eng.inverse(acc, out.data);
  } else {
    std::vector<double> tmp;
    for (int a = 0; a < g.dims; ++a) {
      fd_derivative(g, f.comp[a], a, tmp);
      for (std::size_t n = 0; n < g.size(); ++n) out.data[n] += tmp[n];
    }
  }
  return out;
}

VectorField div(const MatrixField& A) {
  VectorField out(A.grid);
  const Grid& g = A.grid;
  if (g.mode == BoundaryMode::periodic) {
    const auto& eng = SpectralEngine::get(g);
    for (int i = 0; i < 3; ++i) {
      Spectrum acc(eng.spectral_size());
      std::fill(acc.data(), acc.data() + acc.size(), cplx(0.0, 0.0));
      for (int a = 0; a < g.dims; ++a) {
        const Spectrum fhat = eng.forward(A.comp[3 * i + a]);
        const auto& k = eng.k(a);
        for (std::size_t s = 0; s < eng.spectral_size(); ++s) acc[s] += cplx(0.0, k[s]) * fhat[s];
      }
      eng.inverse(acc, out.comp[i]);
    }
  } else {
    std::vector<double> tmp;
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < g.dims; ++a) {
        fd_derivative(g, A.comp[3 * i + a], a, tmp);
        for (std::size_t n = 0; n < g.size(); ++n) out.comp[i][n] += tmp[n];
      }
  }
  return out;
}

VectorField curl(const VectorField& f) {
  const MatrixField G = grad(f);
  VectorField out(f.grid);
  for (std::size_t n = 0; n < f.size(); ++n) out.set(n, curl_of(G.at(n)));
  return out;
}

// ---------------------------------------------------------------------------
// Projections

namespace {

bool retained(const SpectralEngine& eng, std::size_t s, int dims,
              const std::optional<SpectralCutoff>& cutoff) {
  if (!cutoff) return true;
  for (int a = 0; a < dims; ++a)
    if (std::abs(eng.mode(a)[s]) > cutoff->kmax[a]) return false;
  return true;
}

double cgls_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

VectorField leray_dirichlet(const VectorField& v) {
  const Grid& g = v.grid;
  const std::size_t N = g.size();
  std::vector<detail::CsrMatrix> D;
  for (int a = 0; a < g.dims; ++a) D.push_back(fd_derivative_matrix(g, a));
  std::vector<double> interior(N);
  for (std::size_t n = 0; n < N; ++n) interior[n] = g.is_boundary(n) ? 0.0 : 1.0;

  // B p = I_int sum_a D_a M D_a p, with M the interior mask.
  std::vector<double> t1, t2;
  auto apply = [&](const std::vector<double>& p, std::vector<double>& out) {
    out.assign(N, 0.0);
    for (int a = 0; a < g.dims; ++a) {
      D[a].multiply(p, t1);
      for (std::size_t n = 0; n < N; ++n) t1[n] *= interior[n];
      D[a].multiply(t1, t2);
      for (std::size_t n = 0; n < N; ++n) out[n] += interior[n] * t2[n];
    }
  };
  auto apply_t = [&](const std::vector<double>& r, std::vector<double>& out) {
    out.assign(N, 0.0);
    std::vector<double> masked(N);
    for (std::size_t n = 0; n < N; ++n) masked[n] = interior[n] * r[n];
    for (int a = 0; a < g.dims; ++a) {
      D[a].multiply_transpose(masked, t1);
      for (std::size_t n = 0; n < N; ++n) t1[n] *= interior[n];
      D[a].multiply_transpose(t1, t2);
      for (std::size_t n = 0; n < N; ++n) out[n] += t2[n];
    }
  };

  VectorField vm = v;
  for (int c = 0; c < 3; ++c)
    for (std::size_t n = 0; n < N; ++n) vm.comp[c][n] *= interior[n];
  const ScalarField dv = div(vm);
  std::vector<double> b(N);
  for (std::size_t n = 0; n < N; ++n) b[n] = interior[n] * dv.data[n];

  // CGLS on min |B p - b|.
  std::vector<double> p(N, 0.0), r = b, s, q, dir;
  apply_t(r, s);
  dir = s;
  double gamma = 0.0;
  for (double x : s) gamma += x * x;
  // The system is a least-squares problem (b need not lie in the range of B), so the
  // stopping test is on the normal-equation residual B^T r, scaled by a bound on |B|.
  double bound = 0.0;
  for (int a = 0; a < g.dims; ++a) bound += std::pow(4.0 / g.spacing(a), 2);
  const double bnorm = cgls_norm(b);
  const double tol = 1e-11 * bound * bnorm;
  const int max_it = 20 * static_cast<int>(N);
  int it = 0;
  while (std::sqrt(gamma) > tol && it < max_it) {
    apply(dir, q);
    double qq = 0.0;
    for (double x : q) qq += x * x;
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    for (std::size_t n = 0; n < N; ++n) {
      p[n] += alpha * dir[n];
      r[n] -= alpha * q[n];
    }
    apply_t(r, s);
    double gnew = 0.0;
    for (double x : s) gnew += x * x;
    const double beta = gnew / gamma;
    gamma = gnew;
    for (std::size_t n = 0; n < N; ++n) dir[n] = s[n] + beta * dir[n];
    ++it;
  }
  if (std::sqrt(gamma) > tol)
    throw SolverError("pressure projection did not converge", it, std::sqrt(gamma) / (bound * bnorm));

  VectorField out(g);
  for (int a = 0; a < g.dims; ++a) {
    D[a].multiply(p, t1);
    for (std::size_t n = 0; n < N; ++n) out.comp[a][n] = interior[n] * (vm.comp[a][n] - t1[n]);
  }
  for (int a = g.dims; a < 3; ++a) out.comp[a] = vm.comp[a];
  return out;
}

}  // namespace

VectorField leray_project(const VectorField& v, const std::optional<SpectralCutoff>& cutoff) {
  const Grid& g = v.grid;
  if (g.mode == BoundaryMode::dirichlet) {
    if (cutoff) throw Error("spectral cutoff requires a periodic grid");
    return leray_dirichlet(v);
  }
  if (cutoff) validate_cutoff(g, *cutoff);
  const auto& eng = SpectralEngine::get(g);
  std::array<Spectrum, 3> vh{eng.forward(v.comp[0]), eng.forward(v.comp[1]),
                             eng.forward(v.comp[2])};
  for (std::size_t s = 0; s < eng.spectral_size(); ++s) {
    if (!retained(eng, s, g.dims, cutoff)) {
      for (auto& c : vh) c[s] = 0.0;
      continue;
    }
    const double k[3] = {eng.k(0)[s], eng.k(1)[s], eng.k(2)[s]};
    const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if (kk == 0.0) continue;
    const cplx kv = k[0] * vh[0][s] + k[1] * vh[1][s] + k[2] * vh[2][s];
    for (int c = 0; c < 3; ++c) vh[c][s] -= k[c] * kv / kk;
  }
  VectorField out(g);
  for (int c = 0; c < 3; ++c) eng.inverse(vh[c], out.comp[c]);
  return out;
}

VectorField director_project(const VectorField& z, const std::optional<SpectralCutoff>& cutoff) {
  if (!cutoff) return z;
  const Grid& g = z.grid;
  validate_cutoff(g, *cutoff);
  const auto& eng = SpectralEngine::get(g);
  VectorField out(g);
  for (int c = 0; c < 3; ++c) {
    Spectrum h = eng.forward(z.comp[c]);
    for (std::size_t s = 0; s < eng.spectral_size(); ++s)
      if (!retained(eng, s, g.dims, cutoff)) h[s] = 0.0;
    eng.inverse(h, out.comp[c]);
  }
  return out;
}

VectorField harmonic_part(const VectorField& f) {
  const Grid& g = f.grid;
  if (g.mode != BoundaryMode::periodic)
    throw Error("harmonic_part is defined for periodic grids; use extension_operator");
  const auto& eng = SpectralEngine::get(g);
  VectorField out(g);
  for (int c = 0; c < 3; ++c) {
    Spectrum h = eng.forward(f.comp[c]);
    for (std::size_t s = 0; s < eng.spectral_size(); ++s) {
      const double kk = eng.k(0)[s] * eng.k(0)[s] + eng.k(1)[s] * eng.k(1)[s] +
                        eng.k(2)[s] * eng.k(2)[s];
      if (kk != 0.0) h[s] = 0.0;
    }
    eng.inverse(h, out.comp[c]);
  }
  return out;
}

double poincare_constant(const Grid& grid) {
  double L = 0.0;
  for (int a = 0; a < grid.dims; ++a) L = std::max(L, grid.extent[a]);
  return grid.mode == BoundaryMode::periodic ? L / (2.0 * std::numbers::pi)
                                             : L / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Extension operator

VectorField lambda_laplacian(const VectorField& d, double k1, double k2) {
  const Grid& g = d.grid;
  if (g.mode != BoundaryMode::dirichlet)
    throw Error("lambda_laplacian is defined on dirichlet grids");
  VectorField out(g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.is_boundary(node)) continue;
    for (int i = 0; i < 3; ++i) {
      double lap = 0.0;
      for (int a = 0; a < g.dims; ++a) {
        const std::size_t s = stride(g, a);
        const double h = g.spacing(a);
        lap += (d.comp[i][node + s] - 2.0 * d.comp[i][node] + d.comp[i][node - s]) / (h * h);
      }
      // grad div d, component i
      double gd = 0.0;
      if (i < g.dims) {
        for (int j = 0; j < g.dims; ++j) {
          const std::size_t si = stride(g, i);
          const double hi = g.spacing(i);
          if (j == i) {
            gd += (d.comp[i][node + si] - 2.0 * d.comp[i][node] + d.comp[i][node - si]) / (hi * hi);
          } else {
            const std::size_t sj = stride(g, j);
            const double hj = g.spacing(j);
            const auto& f = d.comp[j];
            gd += (f[node + si + sj] - f[node + si - sj] - f[node - si + sj] + f[node - si - sj]) /
                  (4.0 * hi * hj);
          }
        }
      }
      out.comp[i][node] = k2 * lap + (k1 - k2) * gd;
    }
  }
  return out;
}

VectorField extension_operator(const VectorField& wall_data, double k1, double k2,
                               const ExtensionOptions& options) {
  const Grid& g = wall_data.grid;
  if (g.mode != BoundaryMode::dirichlet)
    throw Error("extension_operator requires a dirichlet grid");
  const std::size_t N = g.size();

  VectorField lifted(g);
  for (std::size_t n = 0; n < N; ++n)
    if (g.is_boundary(n)) lifted.set(n, wall_data.at(n));

  // Interior unknowns u, A u = b with A = -L restricted to zero-wall fields.
  auto apply = [&](const VectorField& u) {
    VectorField r = lambda_laplacian(u, k1, k2);
    r *= -1.0;
    return r;
  };
  auto dotp = [&](const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
      for (std::size_t n = 0; n < N; ++n) s += a.comp[c][n] * b.comp[c][n];
    return s;
  };

  VectorField b = lambda_laplacian(lifted, k1, k2);  // b = L(lifted) = -A(lifted)
  auto max_norm = [&](const VectorField& a) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c)
      for (std::size_t n = 0; n < N; ++n) m = std::max(m, std::abs(a.comp[c][n]));
    return m;
  };
  // absolute max-norm residual, scaled by the wall data
  const double stop = options.tolerance * std::max(max_norm(lifted), 1.0);
  VectorField u(g);
  VectorField r = b;
  int it = 0;
  // CG restarted from the true residual until it meets the tolerance
  for (int restart = 0; restart < 10 && max_norm(r) > stop; ++restart) {
    VectorField p = r;
    double rr = dotp(r, r);
    while (max_norm(r) > 0.25 * stop && it < options.max_iterations) {
      const VectorField Ap = apply(p);
      const double alpha = rr / dotp(p, Ap);
      u.axpy(alpha, p);
      r.axpy(-alpha, Ap);
      const double rr_new = dotp(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (int c = 0; c < 3; ++c)
        for (std::size_t n = 0; n < N; ++n) p.comp[c][n] = r.comp[c][n] + beta * p.comp[c][n];
      ++it;
    }
    r = b - apply(u);
  }
  if (max_norm(r) > stop)
    throw SolverError("extension solve did not converge", it, max_norm(r));
  return lifted + u;
}

// ---------------------------------------------------------------------------
// Norms

namespace {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <typename PointValue>
double quadrature(const Grid& g, PointValue&& f) {
  CompensatedSum s;
  for (std::size_t n = 0; n < g.size(); ++n) s.add(g.weight(n) * f(n));
  return s.value();
}

double magnitude(const VectorField& f, std::size_t n) { return norm(f.at(n)); }
double magnitude(const MatrixField& f, std::size_t n) {
  const Mat3 m = f.at(n);
  return std::sqrt(frobenius(m, m));
}
double magnitude(const ScalarField& f, std::size_t n) { return std::abs(f.data[n]); }

template <typename Field>
double generic_lp(const Field& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t n = 0; n < f.grid.size(); ++n) m = std::max(m, magnitude(f, n));
    return m;
  }
  const double s = quadrature(f.grid, [&](std::size_t n) { return std::pow(magnitude(f, n), p); });
  return std::pow(s, 1.0 / p);
}

double p_of(NormKind kind) {
  switch (kind) {
    case NormKind::L2: return 2.0;
    case NormKind::L3: return 3.0;
    case NormKind::L6: return 6.0;
    case NormKind::Linf: return std::numeric_limits<double>::infinity();
    case NormKind::H1: break;
  }
  return 2.0;
}

}  // namespace

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid);
  return quadrature(a.grid, [&](std::size_t n) { return a.data[n] * b.data[n]; });
}

double inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid, b.grid);
  return quadrature(a.grid, [&](std::size_t n) { return dot(a.at(n), b.at(n)); });
}

double inner(const MatrixField& a, const MatrixField& b) {
  require_same_grid(a.grid, b.grid);
  return quadrature(a.grid, [&](std::size_t n) { return frobenius(a.at(n), b.at(n)); });
}

double discrete_norm(const ScalarField& f, NormKind kind) {
  if (kind == NormKind::H1) {
    const double l2 = generic_lp(f, 2.0);
    const double g2 = generic_lp(grad(f), 2.0);
    return std::sqrt(l2 * l2 + g2 * g2);
  }
  return generic_lp(f, p_of(kind));
}

double discrete_norm(const VectorField& f, NormKind kind) {
  if (kind == NormKind::H1) {
    const double l2 = generic_lp(f, 2.0);
    const double g2 = generic_lp(grad(f), 2.0);
    return std::sqrt(l2 * l2 + g2 * g2);
  }
  return generic_lp(f, p_of(kind));
}

double discrete_norm(const MatrixField& f, NormKind kind) {
  if (kind == NormKind::H1) throw Error("H1 norm of a matrix field is not provided");
  return generic_lp(f, p_of(kind));
}

double lp_norm(const VectorField& f, double p) { return generic_lp(f, p); }
double lp_norm(const MatrixField& f, double p) { return generic_lp(f, p); }

double w1p_norm(const VectorField& f, double p) {
  const double a = generic_lp(f, p);
  const double b = generic_lp(grad(f), p);
  return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

double max_abs(const VectorField& f) { return generic_lp(f, std::numeric_limits<double>::infinity()); }

// ---------------------------------------------------------------------------
// Snapshots

namespace {

constexpr char kMagic[8] = {'E', 'L', 'S', 'N', 'A', 'P', '0', '1'};

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) throw Error("truncated snapshot file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(const std::string& path, const std::vector<VectorField>& fields) {
  if (fields.empty()) throw Error("snapshot needs at least one field");
  const Grid& g = fields.front().grid;
  for (const auto& f : fields) require_same_grid(g, f.grid);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open snapshot for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put_le<std::int32_t>(os, g.dims);
  for (int a = 0; a < 3; ++a) put_le<std::int32_t>(os, g.n[a]);
  for (int a = 0; a < 3; ++a) put_le<double>(os, g.extent[a]);
  put_le<std::int32_t>(os, g.mode == BoundaryMode::periodic ? 0 : 1);
  put_le<std::int32_t>(os, static_cast<std::int32_t>(3 * fields.size()));
  for (std::size_t n = 0; n < g.size(); ++n)
    for (const auto& f : fields)
      for (int c = 0; c < 3; ++c) put_le<double>(os, f.comp[c][n]);
  if (!os) throw Error("failed writing snapshot: " + path);
}

std::vector<VectorField> read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open snapshot: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error("not a field snapshot: " + path);
  const int dims = get_le<std::int32_t>(is);
  std::array<int, 3> n{};
  for (int a = 0; a < 3; ++a) n[a] = get_le<std::int32_t>(is);
  std::array<double, 3> ext{};
  for (int a = 0; a < 3; ++a) ext[a] = get_le<double>(is);
  const int mode = get_le<std::int32_t>(is);
  const int ncomp = get_le<std::int32_t>(is);
  if (ncomp <= 0 || ncomp % 3 != 0) throw Error("snapshot component count must be a multiple of 3");
  const Grid g = make_grid(dims, n, ext, mode == 0 ? BoundaryMode::periodic : BoundaryMode::dirichlet);
  std::vector<VectorField> fields(static_cast<std::size_t>(ncomp / 3), VectorField(g));
  for (std::size_t node = 0; node < g.size(); ++node)
    for (auto& f : fields)
      for (int c = 0; c < 3; ++c) f.comp[c][node] = get_le<double>(is);
  return fields;
}

}  // namespace elsim
