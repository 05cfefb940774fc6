#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "elsim/tensor.hpp"

namespace elsim {

enum class BoundaryMode { periodic, dirichlet };

const char* to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& s);

/// Uniform structured grid on a box.
///
/// Periodic grids place N nodes at x_i = i L / N; dirichlet grids place N nodes at
/// x_i = i L / (N - 1) including both walls. A 2-D grid is a slab: z is absent
/// (one node) but fields still carry three components.
struct Grid {
  int dims = 2;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  BoundaryMode mode = BoundaryMode::periodic;

  std::size_t size() const {
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) *
           static_cast<std::size_t>(n[2]);
  }
  double spacing(int axis) const;
  double volume() const;
  std::size_t index(int ix, int iy, int iz = 0) const {
    return (static_cast<std::size_t>(ix) * n[1] + iy) * n[2] + iz;
  }
  std::array<int, 3> coords(std::size_t node) const;
  Vec3 position(std::size_t node) const;
  bool is_boundary(std::size_t node) const;
  /// Quadrature weight of a node (rectangle rule periodic, trapezoid dirichlet).
  double weight(std::size_t node) const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Validates and returns a grid. Requires at least 4 points per active axis.
Grid make_grid(int dims, std::array<int, 3> points, std::array<double, 3> extent,
               BoundaryMode mode);

/// Retained Fourier modes per axis: |m_a| <= kmax[a]. Periodic grids only.
struct SpectralCutoff {
  std::array<int, 3> kmax{0, 0, 0};
};

void validate_cutoff(const Grid& grid, const SpectralCutoff& cutoff);

struct ScalarField {
  Grid grid;
  std::vector<double> data;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double value = 0.0) : grid(g), data(g.size(), value) {}
};

struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 3> comp;

  VectorField() = default;
  explicit VectorField(const Grid& g, const Vec3& value = {}) : grid(g) {
    for (int c = 0; c < 3; ++c) comp[c].assign(g.size(), value[c]);
  }

  std::size_t size() const { return comp[0].size(); }
  Vec3 at(std::size_t n) const { return {comp[0][n], comp[1][n], comp[2][n]}; }
  void set(std::size_t n, const Vec3& x) {
    comp[0][n] = x[0];
    comp[1][n] = x[1];
    comp[2][n] = x[2];
  }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  /// this += s * o
  VectorField& axpy(double s, const VectorField& o);
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

struct MatrixField {
  Grid grid;
  std::array<std::vector<double>, 9> comp;

  MatrixField() = default;
  explicit MatrixField(const Grid& g) : grid(g) {
    for (auto& c : comp) c.assign(g.size(), 0.0);
  }

  std::size_t size() const { return comp[0].size(); }
  Mat3 at(std::size_t n) const {
    Mat3 m;
    for (int k = 0; k < 9; ++k) m.m[k] = comp[k][n];
    return m;
  }
  void set(std::size_t n, const Mat3& m) {
    for (int k = 0; k < 9; ++k) comp[k][n] = m.m[k];
  }
};

/// Samples a closed-form vector function at every node.
template <typename F>
VectorField sample(const Grid& grid, F&& f) {
  VectorField out(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) out.set(n, f(grid.position(n)));
  return out;
}

void require_same_grid(const Grid& a, const Grid& b);

// ---------------------------------------------------------------------------
// Differential operators. Periodic grids differentiate the trigonometric
// interpolant exactly (Nyquist mode dropped, which keeps the operator
// skew-adjoint); dirichlet grids use second-order centered differences with
// one-sided closures on the walls.

ScalarField derivative(const ScalarField& f, int axis);
VectorField grad(const ScalarField& f);
MatrixField grad(const VectorField& f);
ScalarField div(const VectorField& f);
/// Row-wise divergence (div A)_i = sum_j d_j A_ij.
VectorField div(const MatrixField& a);
VectorField curl(const VectorField& f);

// ---------------------------------------------------------------------------
// Projections.

/// Orthogonal projection onto discretely solenoidal fields (P_n).
///
/// Periodic: Fourier-space Helmholtz projection, optionally truncated at `cutoff`.
/// Dirichlet: v - grad p with zero wall velocity, p from an iterative pressure solve;
/// throws SolverError if the solve stalls.
VectorField leray_project(const VectorField& v, const std::optional<SpectralCutoff>& cutoff = {});

/// Director-space projection R_n: identity on nodal values (collocation) or Fourier
/// truncation when a cutoff is given.
VectorField director_project(const VectorField& z, const std::optional<SpectralCutoff>& cutoff = {});

/// Discretely Lambda-harmonic part of a periodic field: its projection onto the
/// kernel of the discrete gradient (mean plus any unresolved Nyquist content).
VectorField harmonic_part(const VectorField& f);

/// Poincare constant of the grid for fields orthogonal to the discrete kernel
/// (periodic) or vanishing on the walls (dirichlet).
double poincare_constant(const Grid& grid);

// ---------------------------------------------------------------------------
// Extension operator: Lambda-harmonic lift of wall data (dirichlet grids).

struct ExtensionOptions {
  double tolerance = 1e-11;  // max-norm interior residual, relative to max(1, max wall value)
  int max_iterations = 20000;
};

/// Compact second-order discretisation of div(Lambda : grad d) at interior nodes,
/// zero on the walls.
VectorField lambda_laplacian(const VectorField& d, double k1, double k2);

/// Solves div(Lambda : grad d) = 0 in the interior with d equal to `wall_data` on the
/// walls (interior values of `wall_data` are ignored). Throws SolverError on stall.
VectorField extension_operator(const VectorField& wall_data, double k1, double k2,
                               const ExtensionOptions& options = {});

// ---------------------------------------------------------------------------
// Discrete inner products and norms (nodal quadrature, compensated sums).

double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double inner(const MatrixField& a, const MatrixField& b);

enum class NormKind { L2, L3, L6, Linf, H1 };

double discrete_norm(const ScalarField& f, NormKind kind);
double discrete_norm(const VectorField& f, NormKind kind);
double discrete_norm(const MatrixField& f, NormKind kind);
/// Lp norm of the pointwise Euclidean magnitude for arbitrary p >= 1.
double lp_norm(const VectorField& f, double p);
double lp_norm(const MatrixField& f, double p);
/// W^{1,p} norm: (||f||_p^p + ||grad f||_p^p)^{1/p}.
double w1p_norm(const VectorField& f, double p);

double max_abs(const VectorField& f);

// ---------------------------------------------------------------------------
// Snapshot files.
//
// Layout (little-endian): 8-byte magic "ELSNAP01", int32 dims, int32 n[3],
// float64 extent[3], int32 boundary_mode (0 periodic, 1 dirichlet),
// int32 ncomp, then float64 data in row-major node order with the component
// index fastest. Vector fields contribute three consecutive components each.

void write_snapshot(const std::string& path, const std::vector<VectorField>& fields);
std::vector<VectorField> read_snapshot(const std::string& path);

}  // namespace elsim
