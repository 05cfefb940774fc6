#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elsim/energy.hpp"
#include "elsim/fields.hpp"
#include "elsim/material.hpp"
#include "elsim/scheme.hpp"

namespace elsim {

/// Comparison trajectory (v~, d~) with its time derivatives and a static field H~.
class TestTrajectory {
 public:
  virtual ~TestTrajectory() = default;
  virtual const Grid& grid() const = 0;
  virtual VectorField velocity(double t) const = 0;
  virtual VectorField director(double t) const = 0;
  virtual VectorField velocity_rate(double t) const = 0;
  virtual VectorField director_rate(double t) const = 0;
  virtual const VectorField& magnetic_field() const = 0;
};

using SpaceTimeFunction = std::function<Vec3(const Vec3&, double)>;

/// Closed-form trajectory sampled on a grid. The director must have unit length at the
/// nodes; this is checked at t = 0 on construction and again whenever it is sampled.
class ClosedFormTrajectory : public TestTrajectory {
 public:
  ClosedFormTrajectory(Grid grid, SpaceTimeFunction v, SpaceTimeFunction d,
                       SpaceTimeFunction dv_dt, SpaceTimeFunction dd_dt, VectorField H);

  const Grid& grid() const override { return grid_; }
  VectorField velocity(double t) const override;
  VectorField director(double t) const override;
  VectorField velocity_rate(double t) const override;
  VectorField director_rate(double t) const override;
  const VectorField& magnetic_field() const override { return H_; }

 private:
  Grid grid_;
  SpaceTimeFunction v_, d_, dv_, dd_;
  VectorField H_;
};

/// v~ = 0, d~ = constant unit vector, H~ = 0.
std::unique_ptr<ClosedFormTrajectory> equilibrium_trajectory(const Grid& grid, const Vec3& d);

/// A recorded trace used as test data. Only the recorded sample times are available;
/// time derivatives come from the scheme's right-hand side.
class TraceTrajectory : public TestTrajectory {
 public:
  TraceTrajectory(const SimulationTrace& trace, const MaterialParams& params,
                  const SchemeConfig& config);

  const Grid& grid() const override;
  VectorField velocity(double t) const override;
  VectorField director(double t) const override;
  VectorField velocity_rate(double t) const override;
  VectorField director_rate(double t) const override;
  const VectorField& magnetic_field() const override { return config_.H; }

 private:
  std::size_t sample(double t) const;

  const SimulationTrace& trace_;
  const MaterialParams& params_;
  SchemeConfig config_;
};

/// Snapshot of a trajectory at one time.
struct TestState {
  VectorField v, d, dv_dt, dd_dt, H;
};

TestState evaluate(const TestTrajectory& traj, double t);

// ---------------------------------------------------------------------------

struct RelativeEnergyTerms {
  double kinetic = 0.0;
  double lambda_part = 0.0;  // 1/2 (grad d - grad d~ ; Lambda : (...))
  double theta_part = 0.0;   // 1/2 (G - G~) ::: Theta ::: (G - G~)
  double magnetic_par = 0.0;
  double magnetic_perp = 0.0;

  double total() const {
    return kinetic + lambda_part + theta_part + magnetic_par + magnetic_perp;
  }
};

/// Relative energy E(v, d, H | v~, d~, H~) in tensor form.
RelativeEnergyTerms rel_energy_terms(const VectorField& v, const VectorField& d,
                                     const VectorField& H, const VectorField& vt,
                                     const VectorField& dt, const VectorField& Ht,
                                     const MaterialParams& params);

double rel_energy(const VectorField& v, const VectorField& d, const VectorField& H,
                  const VectorField& vt, const VectorField& dt, const VectorField& Ht,
                  const MaterialParams& params);

/// Same quantity written with k1..k5, div, skew gradients and curls.
double rel_energy_expanded(const VectorField& v, const VectorField& d, const VectorField& H,
                           const VectorField& vt, const VectorField& dt, const VectorField& Ht,
                           const MaterialParams& params);

struct RelativeDissipationTerms {
  double mu1 = 0.0, mu4 = 0.0, mu56 = 0.0, dxq = 0.0;
  double total() const { return mu1 + mu4 + mu56 + dxq; }
};

RelativeDissipationTerms rel_dissipation_terms(const VectorField& v, const VectorField& d,
                                               const VectorField& q, const VectorField& vt,
                                               const VectorField& dt, const VectorField& qt,
                                               const MaterialParams& params);

double rel_dissipation(const VectorField& v, const VectorField& d, const VectorField& q,
                       const VectorField& vt, const VectorField& dt, const VectorField& qt,
                       const MaterialParams& params);

/// K / C: the regularity measure of the test state with unit constant.
double regularity_weight(const TestState& test, const MaterialParams& params, double C = 1.0);

double initial_distance(const VectorField& v, const VectorField& d, const VectorField& H,
                        const VectorField& vt, const VectorField& dt, const VectorField& Ht,
                        const MaterialParams& params);

/// Correction vector a(d, H | d~, H~).
VectorField correction_a(const VectorField& d, const VectorField& H, const VectorField& dt,
                         const VectorField& Ht, const MaterialParams& params);

enum class PairingForm {
  continuous,  // A, q, q~ unprojected
  discrete,    // A_n, q_n, q~_n = R_n q~
};

const char* to_string(PairingForm form);

struct EquationResidual {
  VectorField momentum;  // first component of A
  VectorField director;  // second component of A
};

EquationResidual equation_residual(const TestState& test, const MaterialParams& params,
                                   const VectorField& g, PairingForm form = PairingForm::continuous,
                                   const std::optional<SpectralCutoff>& cutoff = {});

// ---------------------------------------------------------------------------

struct CertificateOptions {
  std::optional<double> C;  // unset: search for the minimal admissible C
  double tol = 1e-6;
  double C_max = 1e6;
  PairingForm form = PairingForm::continuous;
  bool discrete_terms = false;  // extra projection terms of the semi-discrete inequality
};

struct CertificateReport {
  std::vector<double> times, lhs, rhs, slack;
  std::vector<double> rel_energy, rel_dissipation, weight, pairing;
  double initial_distance = 0.0;
  double field_mismatch = 0.0;  // ||H - H~||^2
  double C = 0.0;               // constant used for lhs/rhs; infinity if none admissible
  bool pass = false;
  PairingForm form = PairingForm::continuous;
  bool discrete_terms = false;
  std::vector<std::string> warnings;
};

/// Evaluates the relative energy inequality along `trace` against `test`.
CertificateReport certificate(const SimulationTrace& trace, const SchemeConfig& config,
                              const TestTrajectory& test, const MaterialParams& params,
                              const CertificateOptions& options = {});

}  // namespace elsim
