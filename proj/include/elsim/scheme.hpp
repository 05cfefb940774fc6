#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "elsim/energy.hpp"
#include "elsim/fields.hpp"
#include "elsim/material.hpp"

namespace elsim {

struct FieldState {
  VectorField v;
  VectorField d;
  double t = 0.0;
};

enum class Integrator { euler, rk4 };

/// External body force g(x, t). Empty means zero forcing.
struct Forcing {
  std::function<Vec3(const Vec3&, double)> closed_form;
  std::optional<VectorField> sampled;  // static field, used when closed_form is empty

  bool is_zero() const { return !closed_form && !sampled; }
  VectorField at(const Grid& grid, double t) const;
};

struct SchemeConfig {
  double dt = 1e-3;
  double t_end = 0.1;
  Integrator integrator = Integrator::rk4;
  Forcing forcing;
  VectorField H;  // static magnetic field; must live on the state grid
  std::optional<SpectralCutoff> cutoff;
  int record_every = 1;  // keep every n-th step in the trace
  double blowup_threshold = 1e8;
};

/// Validates dt > 0, t_end >= dt, record_every >= 1.
void validate(const SchemeConfig& config);

/// Explicit stability heuristic dt <= safety * h^2 / max(k1, k2, mu4).
double suggested_dt(const Grid& grid, const MaterialParams& params, double safety = 0.5);

/// Instantaneous integrands of the dissipation identity plus the forcing work.
struct DissipationRates {
  double mu1 = 0.0;   // (mu1 + lambda^2) ||d . Dv d||^2
  double mu4 = 0.0;   // mu4 ||Dv||^2
  double mu56 = 0.0;  // (mu5 + mu6 - lambda^2) ||Dv d||^2
  double dxq = 0.0;   // ||d x q_n||^2
  double work = 0.0;  // <g, v>

  double total() const { return mu1 + mu4 + mu56 + dxq; }
};

/// Leslie stress at one node for director d, symmetric gradient Dv, and q.
Mat3 leslie_stress_at(const MaterialParams& p, const Vec3& d, const Mat3& Dv, const Vec3& q);

/// Nodewise approximate Leslie stress T^L_n.
MatrixField leslie_stress(const VectorField& v, const VectorField& d, const VectorField& q,
                          const MaterialParams& params);

struct Rates {
  VectorField dv_dt;
  VectorField dd_dt;
  VectorField q;  // projected variational derivative used in the assembly
  DissipationRates dissipation;
  double max_speed = 0.0;   // max nodal |v|
  double max_grad_d = 0.0;  // max nodal |grad d| (Frobenius)
};

/// Right-hand side of the semi-discrete system for a state.
Rates assemble_rhs(const FieldState& state, const MaterialParams& params,
                   const SchemeConfig& config);

/// Initial data: v0 = P_n v_raw, d0 = S d1 + R_n (d_raw - S d1). On dirichlet grids the wall
/// values of d_raw are taken as d1.
FieldState prepare_initial_state(const VectorField& v_raw, const VectorField& d_raw,
                                 const MaterialParams& params,
                                 const std::optional<SpectralCutoff>& cutoff = {});

struct StepDiagnostics {
  double t = 0.0;
  long step = 0;
  double kinetic = 0.0;
  EnergyBreakdown energy;
  DissipationRates rates;       // instantaneous
  DissipationRates integrated;  // accumulated over [0, t] alongside the state
  double max_norm_deviation = 0.0;  // max_x ||d(x,t)| - |d(x,0)||
  double max_speed = 0.0;
  double max_grad_d = 0.0;
};

struct SimulationTrace {
  std::vector<FieldState> states;
  std::vector<StepDiagnostics> diagnostics;
  double dt = 0.0;
  Integrator integrator = Integrator::rk4;

  bool empty() const { return states.empty(); }
  std::vector<double> times() const;
};

/// Advances state0 to t_end at fixed dt. Throws BlowUpError naming the offending step.
SimulationTrace integrate(const FieldState& state0, const MaterialParams& params,
                          const SchemeConfig& config);

enum class TimeQuadrature {
  stage,      // dissipation integrals accumulated by the integrator itself
  trapezoid,  // trapezoid rule over the recorded samples
};

struct EnergyReportRow {
  double t = 0.0;
  double kinetic = 0.0;
  double elastic = 0.0;
  double magnetic = 0.0;
  double diss_mu1 = 0.0;  // integrated over [0, t]
  double diss_mu4 = 0.0;
  double diss_mu56 = 0.0;
  double diss_dxq = 0.0;
  double work = 0.0;
  double energy_residual = 0.0;
  double max_norm_deviation = 0.0;
  // Coercivity: F(d) >= eta ||d||_{H1}^2 - c ||S||^2
  double free_energy = 0.0;
  double coercivity_bound = 0.0;
  bool coercivity_ok = true;
};

struct EnergyReport {
  std::vector<EnergyReportRow> rows;
  double eta = 0.0;
  double boundary_constant = 0.0;
  double max_abs_residual = 0.0;
  double sup_velocity_l2 = 0.0;
  double sup_director_h1 = 0.0;
  int coercivity_violations = 0;
};

EnergyReport energy_report(const SimulationTrace& trace, const MaterialParams& params,
                           const SchemeConfig& config,
                           TimeQuadrature quadrature = TimeQuadrature::stage);

}  // namespace elsim
