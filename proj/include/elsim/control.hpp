#pragma once

#include <limits>
#include <string>
#include <vector>

#include "elsim/fields.hpp"
#include "elsim/material.hpp"
#include "elsim/scheme.hpp"

namespace elsim {

enum class ControlBasis {
  uniform,  // H constant in space: 3 parameters
  fourier,  // uniform part plus solenoidal Fourier modes with |m_a| <= kmax
};

const char* to_string(ControlBasis basis);
ControlBasis control_basis_from_string(const std::string& s);

/// Linear map from a parameter vector to a discretely divergence-free static field.
class ControlParametrization {
 public:
  ControlParametrization(const Grid& grid, ControlBasis basis, int kmax = 1);

  std::size_t dimension() const { return 3 + 4 * modes_.size(); }
  ControlBasis basis() const { return basis_; }
  const Grid& grid() const { return grid_; }
  VectorField field(const std::vector<double>& params) const;

 private:
  struct Mode {
    Vec3 k;       // physical wavevector
    Vec3 e1, e2;  // orthonormal, orthogonal to k
  };
  Grid grid_;
  ControlBasis basis_;
  std::vector<Mode> modes_;
};

struct ControlProblem {
  Grid grid;
  MaterialParams params;
  SchemeConfig scheme;  // its H is replaced by each candidate control
  FieldState initial;
  VectorField v_target, d_target;
  double gamma = 1e-3;
  double c_H = 1.0;
  ControlBasis basis = ControlBasis::uniform;
  int kmax = 1;
  std::vector<double> initial_params;  // empty: zeros

  // optimizer settings
  double fd_step = -1.0;  // negative: 1e-4 c_H
  double grad_tol = 1e-10;
  double stagnation_tol = 1e-12;  // relative change in J
  int max_iterations = 100;
  int max_state_solves = 200;
  double probe_step = -1.0;  // negative: 0.1 c_H
};

/// Validates gamma > 0, c_H > 0, grids, and the parametrization size.
void validate(const ControlProblem& problem);

/// J = ||v(T) - v_T||^2 + ||d(T) - d_T||_{H1}^2 + gamma ||H||^2.
double cost_J(const FieldState& final_state, const VectorField& H, const ControlProblem& problem);

/// Radial projection onto the L3 ball of radius c_H.
VectorField project_control(const VectorField& H, double c_H);

struct OptimizationLogRow {
  int iteration = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  double H_L2 = 0.0;
  double H_L3 = 0.0;
};

struct ControlResult {
  VectorField H_opt;
  std::vector<double> params;
  std::vector<double> J_history;
  std::vector<OptimizationLogRow> log;
  SimulationTrace final_trace;
  int evaluations = 0;  // state solves
  std::string stop_reason;
};

/// Reduced cost H(params) -> J(state(H), H); +infinity if the state equation blows up.
class ReducedCost {
 public:
  explicit ReducedCost(const ControlProblem& problem);

  const ControlParametrization& parametrization() const { return param_; }
  /// Parameters scaled onto the constraint set.
  std::vector<double> project(std::vector<double> x) const;
  double operator()(const std::vector<double>& x, SimulationTrace* trace = nullptr);
  int evaluations() const { return evaluations_; }

 private:
  const ControlProblem& problem_;
  ControlParametrization param_;
  int evaluations_ = 0;
};

ControlResult optimize(const ControlProblem& problem);

}  // namespace elsim
