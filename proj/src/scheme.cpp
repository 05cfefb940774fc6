#include "elsim/scheme.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "elsim/error.hpp"

namespace elsim {

VectorField Forcing::at(const Grid& grid, double t) const {
  if (closed_form) return sample(grid, [&](const Vec3& x) { return closed_form(x, t); });
  if (sampled) {
    require_same_grid(grid, sampled->grid);
    return *sampled;
  }
  return VectorField(grid);
}

void validate(const SchemeConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt))
    throw ParameterError("dt must be positive and finite");
  if (!(config.t_end >= config.dt)) throw ParameterError("t_end must be at least dt");
  if (config.record_every < 1) throw ParameterError("record_every must be >= 1");
  if (!(config.blowup_threshold > 0.0)) throw ParameterError("blowup_threshold must be positive");
}

double suggested_dt(const Grid& grid, const MaterialParams& params, double safety) {
  double h = grid.spacing(0);
  for (int a = 1; a < grid.dims; ++a) h = std::min(h, grid.spacing(a));
  const double stiff = std::max({params.k1, params.k2, params.visc.mu4});
  return safety * h * h / stiff;
}

Mat3 leslie_stress_at(const MaterialParams& p, const Vec3& d, const Mat3& Dv, const Vec3& q) {
  const Vec3 Dd = Dv * d;
  const double dDd = dot(d, Dd);
  const double dd = norm2(d);
  const Vec3 Pq = tangent_projector(d) * q;
  Mat3 T = (p.w_dDd() * dDd) * outer(d, d);
  T += p.w_Dv() * Dv;
  T += p.w_Dd() * sym(outer(d, Dd));
  T -= p.lambda * sym(outer(d, Pq));
  T -= dd * skw(outer(d, q));
  return T;
}

MatrixField leslie_stress(const VectorField& v, const VectorField& d, const VectorField& q,
                          const MaterialParams& params) {
  require_same_grid(v.grid, d.grid);
  require_same_grid(v.grid, q.grid);
  const MatrixField gv = grad(v);
  MatrixField T(v.grid);
  for (std::size_t n = 0; n < v.size(); ++n)
    T.set(n, leslie_stress_at(params, d.at(n), sym(gv.at(n)), q.at(n)));
  return T;
}

Rates assemble_rhs(const FieldState& state, const MaterialParams& params,
                   const SchemeConfig& config) {
  const Grid& grid = state.v.grid;
  require_same_grid(grid, state.d.grid);
  require_same_grid(grid, config.H.grid);
  const VectorField& v = state.v;
  const VectorField& d = state.d;

  Rates r;
  r.q = projected_variational_derivative(params, d, config.H, config.cutoff);
  const MatrixField gv = grad(v);
  const MatrixField gd = grad(d);
  const VectorField g = config.forcing.at(grid, state.t);

  VectorField bracket(grid);  // (|d|^2 I - d (x) d)((v.grad)d - W d + lambda D d + q_n)
  VectorField local(grid);    // g - 1/2 (v.grad)v + grad d^T P_d q_n
  MatrixField flux(grid);     // T^L - 1/2 v (x) v, differentiated weakly below
  ScalarField s_mu1(grid), s_mu4(grid), s_mu56(grid), s_dxq(grid), s_work(grid);

  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Vec3 vn = v.at(n);
    const Vec3 dn = d.at(n);
    const Vec3 qn = r.q.at(n);
    const Mat3 gvn = gv.at(n);
    const Mat3 gdn = gd.at(n);
    const Mat3 D = sym(gvn);
    const Mat3 W = skw(gvn);
    const Mat3 P = tangent_projector(dn);
    const Vec3 Dd = D * dn;

    Vec3 x = gdn * vn;
    x -= W * dn;
    x += params.lambda * Dd;
    x += qn;
    bracket.set(n, P * x);

    Vec3 f = g.at(n);
    f -= 0.5 * (gvn * vn);
    f += transpose(gdn) * (P * qn);
    local.set(n, f);

    Mat3 T = leslie_stress_at(params, dn, D, qn);
    T -= 0.5 * outer(vn, vn);
    flux.set(n, T);

    s_mu1.data[n] = params.w_dDd() * std::pow(dot(dn, Dd), 2);
    s_mu4.data[n] = params.w_Dv() * frobenius(D, D);
    s_mu56.data[n] = params.w_Dd() * norm2(Dd);
    s_dxq.data[n] = norm2(cross(dn, qn));
    s_work.data[n] = dot(g.at(n), vn);

    r.max_speed = std::max(r.max_speed, norm(vn));
    r.max_grad_d = std::max(r.max_grad_d, std::sqrt(frobenius(gdn, gdn)));
  }

  local += div(flux);
  r.dv_dt = leray_project(local, config.cutoff);
  r.dd_dt = director_project(bracket, config.cutoff);
  r.dd_dt *= -1.0;
  if (grid.mode == BoundaryMode::dirichlet) {
    for (std::size_t n = 0; n < grid.size(); ++n)
      if (grid.is_boundary(n)) r.dd_dt.set(n, Vec3{});
  }

  const ScalarField one(grid, 1.0);
  r.dissipation.mu1 = inner(s_mu1, one);
  r.dissipation.mu4 = inner(s_mu4, one);
  r.dissipation.mu56 = inner(s_mu56, one);
  r.dissipation.dxq = inner(s_dxq, one);
  r.dissipation.work = inner(s_work, one);
  return r;
}

FieldState prepare_initial_state(const VectorField& v_raw, const VectorField& d_raw,
                                 const MaterialParams& params,
                                 const std::optional<SpectralCutoff>& cutoff) {
  require_same_grid(v_raw.grid, d_raw.grid);
  FieldState s;
  s.v = leray_project(v_raw, cutoff);
  if (d_raw.grid.mode == BoundaryMode::dirichlet) {
    const VectorField S = extension_operator(d_raw, params.k1, params.k2);
    s.d = S + director_project(d_raw - S, cutoff);
  } else {
    s.d = director_project(d_raw, cutoff);
  }
  s.t = 0.0;
  return s;
}

std::vector<double> SimulationTrace::times() const {
  std::vector<double> t;
  t.reserve(states.size());
  for (const auto& s : states) t.push_back(s.t);
  return t;
}

namespace {

constexpr int kAux = 5;
using Aux = std::array<double, kAux>;

Aux aux_of(const DissipationRates& r) { return {r.mu1, r.mu4, r.mu56, r.dxq, r.work}; }

DissipationRates rates_of(const Aux& a) {
  DissipationRates r;
  r.mu1 = a[0];
  r.mu4 = a[1];
  r.mu56 = a[2];
  r.dxq = a[3];
  r.work = a[4];
  return r;
}

bool all_finite(const VectorField& f) {
  for (const auto& c : f.comp)
    for (double x : c)
      if (!std::isfinite(x)) return false;
  return true;
}

FieldState advance(const FieldState& s, double h, const Rates& k) {
  FieldState out = s;
  out.v.axpy(h, k.dv_dt);
  out.d.axpy(h, k.dd_dt);
  out.t = s.t + h;
  return out;
}

[[noreturn]] void blow_up(const std::string& why, long step, double t) {
  std::ostringstream os;
  os << "blow-up at step " << step << " (t = " << t << "): " << why;
  throw BlowUpError(os.str(), step, t);
}

}  // namespace

SimulationTrace integrate(const FieldState& state0, const MaterialParams& params,
                          const SchemeConfig& config) {
  validate(config);
  const Grid& grid = state0.v.grid;
  require_same_grid(grid, state0.d.grid);
  require_same_grid(grid, config.H.grid);

  const long steps = static_cast<long>(std::ceil(config.t_end / config.dt - 1e-9));
  const double h = config.t_end / static_cast<double>(steps);

  std::vector<double> norm0(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) norm0[n] = norm(state0.d.at(n));

  SimulationTrace trace;
  trace.dt = h;
  trace.integrator = config.integrator;

  auto record = [&](const FieldState& s, long step, const Rates& k, const Aux& Q) {
    StepDiagnostics diag;
    diag.t = s.t;
    diag.step = step;
    diag.kinetic = 0.5 * inner(s.v, s.v);
    diag.energy = total_free_energy(params, s.d, config.H);
    diag.rates = k.dissipation;
    diag.integrated = rates_of(Q);
    for (std::size_t n = 0; n < grid.size(); ++n)
      diag.max_norm_deviation =
          std::max(diag.max_norm_deviation, std::abs(norm(s.d.at(n)) - norm0[n]));
    diag.max_speed = k.max_speed;
    diag.max_grad_d = k.max_grad_d;
    trace.states.push_back(s);
    trace.diagnostics.push_back(diag);
  };

  auto checked_rhs = [&](const FieldState& s, long step) {
    Rates k = assemble_rhs(s, params, config);
    if (!std::isfinite(k.max_speed) || !std::isfinite(k.max_grad_d))
      blow_up("non-finite state", step, s.t);
    if (k.max_speed > config.blowup_threshold) blow_up("|v| exceeds threshold", step, s.t);
    if (k.max_grad_d > config.blowup_threshold) blow_up("|grad d| exceeds threshold", step, s.t);
    return k;
  };

  FieldState y = state0;
  y.t = 0.0;
  Aux Q{};
  for (long n = 0; n < steps; ++n) {
    const Rates k1 = checked_rhs(y, n);
    if (n % config.record_every == 0) record(y, n, k1, Q);

    if (config.integrator == Integrator::euler) {
      const Aux a1 = aux_of(k1.dissipation);
      y = advance(y, h, k1);
      for (int i = 0; i < kAux; ++i) Q[i] += h * a1[i];
    } else {
      const Rates k2 = assemble_rhs(advance(y, 0.5 * h, k1), params, config);
      const Rates k3 = assemble_rhs(advance(y, 0.5 * h, k2), params, config);
      const Rates k4 = assemble_rhs(advance(y, h, k3), params, config);
      const Aux a1 = aux_of(k1.dissipation), a2 = aux_of(k2.dissipation),
                a3 = aux_of(k3.dissipation), a4 = aux_of(k4.dissipation);
      FieldState next = y;
      const double w = h / 6.0;
      next.v.axpy(w, k1.dv_dt).axpy(2.0 * w, k2.dv_dt).axpy(2.0 * w, k3.dv_dt).axpy(w, k4.dv_dt);
      next.d.axpy(w, k1.dd_dt).axpy(2.0 * w, k2.dd_dt).axpy(2.0 * w, k3.dd_dt).axpy(w, k4.dd_dt);
      for (int i = 0; i < kAux; ++i) Q[i] += w * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
      y = std::move(next);
    }
    y.t = static_cast<double>(n + 1) * h;
    if (!all_finite(y.v) || !all_finite(y.d)) blow_up("non-finite state", n + 1, y.t);
  }
  record(y, steps, checked_rhs(y, steps), Q);
  return trace;
}

EnergyReport energy_report(const SimulationTrace& trace, const MaterialParams& params,
                           const SchemeConfig& config, TimeQuadrature quadrature) {
  if (trace.empty()) throw Error("energy_report needs a nonempty trace");
  const auto& diags = trace.diagnostics;
  const Grid& grid = trace.states.front().d.grid;
  const double k = params.k_coercive;
  const double cp = poincare_constant(grid);

  EnergyReport rep;
  // Periodic: ||d||^2 <= ||S||^2 + C_P^2 ||grad d||^2 with S the discrete kernel part.
  // Dirichlet: d - S vanishes on the walls, S the extension of the wall data.
  std::optional<VectorField> lift;
  double lift_h1_sq = 0.0;
  if (grid.mode == BoundaryMode::periodic) {
    rep.eta = k / (1.0 + cp * cp);
    rep.boundary_constant = rep.eta;
  } else {
    rep.eta = k / (1.0 + 4.0 * cp * cp);
    rep.boundary_constant = rep.eta * std::max(2.0, 4.0 * cp * cp);
    lift = extension_operator(trace.states.front().d, params.k1, params.k2);
    lift_h1_sq = std::pow(discrete_norm(*lift, NormKind::H1), 2);
  }

  const DissipationRates& first = diags.front().integrated;
  const double e0 = diags.front().kinetic + diags.front().energy.total;
  DissipationRates acc;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    const auto& dg = diags[i];
    const FieldState& s = trace.states[i];
    DissipationRates integ;
    if (quadrature == TimeQuadrature::stage) {
      integ = dg.integrated;
      integ.mu1 -= first.mu1;
      integ.mu4 -= first.mu4;
      integ.mu56 -= first.mu56;
      integ.dxq -= first.dxq;
      integ.work -= first.work;
    } else {
      if (i > 0) {
        const auto& a = diags[i - 1].rates;
        const auto& b = dg.rates;
        const double w = 0.5 * (dg.t - diags[i - 1].t);
        acc.mu1 += w * (a.mu1 + b.mu1);
        acc.mu4 += w * (a.mu4 + b.mu4);
        acc.mu56 += w * (a.mu56 + b.mu56);
        acc.dxq += w * (a.dxq + b.dxq);
        acc.work += w * (a.work + b.work);
      }
      integ = acc;
    }

    EnergyReportRow row;
    row.t = dg.t;
    row.kinetic = dg.kinetic;
    row.elastic = dg.energy.elastic();
    row.magnetic = dg.energy.magnetic();
    row.diss_mu1 = integ.mu1;
    row.diss_mu4 = integ.mu4;
    row.diss_mu56 = integ.mu56;
    row.diss_dxq = integ.dxq;
    row.work = integ.work;
    row.energy_residual =
        (dg.kinetic + dg.energy.total + integ.total()) - (e0 + integ.work);
    row.max_norm_deviation = dg.max_norm_deviation;

    const double h1 = discrete_norm(s.d, NormKind::H1);
    double s_sq = 0.0;
    if (grid.mode == BoundaryMode::periodic) {
      const VectorField S = harmonic_part(s.d);
      s_sq = inner(S, S);
    } else {
      s_sq = lift_h1_sq;
    }
    row.free_energy = dg.energy.total;
    row.coercivity_bound = rep.eta * h1 * h1 - rep.boundary_constant * s_sq;
    const double slack_tol = 1e-10 * std::max(1.0, std::abs(row.free_energy));
    row.coercivity_ok = row.free_energy >= row.coercivity_bound - slack_tol;
    if (!row.coercivity_ok) ++rep.coercivity_violations;

    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(row.energy_residual));
    rep.sup_velocity_l2 = std::max(rep.sup_velocity_l2, std::sqrt(2.0 * dg.kinetic));
    rep.sup_director_h1 = std::max(rep.sup_director_h1, h1);
    rep.rows.push_back(row);
  }
  (void)config;
  return rep;
}

}  // namespace elsim
