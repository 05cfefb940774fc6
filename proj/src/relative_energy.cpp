#include "elsim/relative_energy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "elsim/error.hpp"

namespace elsim {

namespace {

double integrate_nodes(const Grid& g, const std::vector<double>& f) {
  ScalarField s(g);
  s.data = f;
  return inner(s, ScalarField(g, 1.0));
}

void check_unit(const VectorField& d, double t, double tol) {
  double dev = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n) dev = std::max(dev, std::abs(norm(d.at(n)) - 1.0));
  if (dev > tol) {
    std::ostringstream os;
    os << "test director is not unit length at t = " << t << " (deviation " << dev << ")";
    throw Error(os.str());
  }
}

Rank3Tensor theta_of(const MaterialParams& p, const Mat3& g, const Vec3& d) {
  return rank6_triple_contract(p.Theta, outer(g, d));
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectories

ClosedFormTrajectory::ClosedFormTrajectory(Grid grid, SpaceTimeFunction v, SpaceTimeFunction d,
                                           SpaceTimeFunction dv_dt, SpaceTimeFunction dd_dt,
                                           VectorField H)
    : grid_(std::move(grid)),
      v_(std::move(v)),
      d_(std::move(d)),
      dv_(std::move(dv_dt)),
      dd_(std::move(dd_dt)),
      H_(std::move(H)) {
  require_same_grid(grid_, H_.grid);
  if (!v_ || !d_ || !dv_ || !dd_) throw Error("closed-form trajectory needs all four functions");
  check_unit(director(0.0), 0.0, 1e-10);
}

VectorField ClosedFormTrajectory::velocity(double t) const {
  return sample(grid_, [&](const Vec3& x) { return v_(x, t); });
}

VectorField ClosedFormTrajectory::director(double t) const {
  VectorField d = sample(grid_, [&](const Vec3& x) { return d_(x, t); });
  check_unit(d, t, 1e-10);
  return d;
}

VectorField ClosedFormTrajectory::velocity_rate(double t) const {
  return sample(grid_, [&](const Vec3& x) { return dv_(x, t); });
}

VectorField ClosedFormTrajectory::director_rate(double t) const {
  return sample(grid_, [&](const Vec3& x) { return dd_(x, t); });
}

std::unique_ptr<ClosedFormTrajectory> equilibrium_trajectory(const Grid& grid, const Vec3& d) {
  auto zero = [](const Vec3&, double) { return Vec3{}; };
  return std::make_unique<ClosedFormTrajectory>(
      grid, zero, [d](const Vec3&, double) { return d; }, zero, zero, VectorField(grid));
}

TraceTrajectory::TraceTrajectory(const SimulationTrace& trace, const MaterialParams& params,
                                 const SchemeConfig& config)
    : trace_(trace), params_(params), config_(config) {
  if (trace.empty()) throw Error("trace trajectory needs a nonempty trace");
}

const Grid& TraceTrajectory::grid() const { return trace_.states.front().v.grid; }

std::size_t TraceTrajectory::sample(double t) const {
  for (std::size_t i = 0; i < trace_.states.size(); ++i)
    if (std::abs(trace_.states[i].t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
  std::ostringstream os;
  os << "time " << t << " is not a recorded sample of the trace";
  throw Error(os.str());
}

VectorField TraceTrajectory::velocity(double t) const { return trace_.states[sample(t)].v; }
VectorField TraceTrajectory::director(double t) const { return trace_.states[sample(t)].d; }

VectorField TraceTrajectory::velocity_rate(double t) const {
  return assemble_rhs(trace_.states[sample(t)], params_, config_).dv_dt;
}

VectorField TraceTrajectory::director_rate(double t) const {
  return assemble_rhs(trace_.states[sample(t)], params_, config_).dd_dt;
}

TestState evaluate(const TestTrajectory& traj, double t) {
  return {traj.velocity(t), traj.director(t), traj.velocity_rate(t), traj.director_rate(t),
          traj.magnetic_field()};
}

// ---------------------------------------------------------------------------
// Relative energy and dissipation

RelativeEnergyTerms rel_energy_terms(const VectorField& v, const VectorField& d,
                                     const VectorField& H, const VectorField& vt,
                                     const VectorField& dt, const VectorField& Ht,
                                     const MaterialParams& p) {
  const Grid& g = v.grid;
  for (const VectorField* f : {&d, &H, &vt, &dt, &Ht}) require_same_grid(g, f->grid);
  const MatrixField gd = grad(d), gdt = grad(dt);
  std::vector<double> kin(g.size()), lam(g.size()), th(g.size()), mpar(g.size()), mperp(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 dv = v.at(n) - vt.at(n);
    const Mat3 dg = gd.at(n) - gdt.at(n);
    Rank3Tensor G = outer(gd.at(n), d.at(n));
    G -= outer(gdt.at(n), dt.at(n));
    kin[n] = 0.5 * norm2(dv);
    lam[n] = 0.5 * frobenius(dg, rank4_double_contract(p.Lambda, dg));
    th[n] = 0.5 * triple_dot(G, rank6_triple_contract(p.Theta, G));
    mpar[n] = -0.5 * p.chi.chi_par * std::pow(dot(d.at(n), H.at(n)) - dot(dt.at(n), Ht.at(n)), 2);
    mperp[n] = -0.5 * p.chi.chi_perp * norm2(cross(d.at(n), H.at(n)) - cross(dt.at(n), Ht.at(n)));
  }
  RelativeEnergyTerms e;
  e.kinetic = integrate_nodes(g, kin);
  e.lambda_part = integrate_nodes(g, lam);
  e.theta_part = integrate_nodes(g, th);
  e.magnetic_par = integrate_nodes(g, mpar);
  e.magnetic_perp = integrate_nodes(g, mperp);
  return e;
}

double rel_energy(const VectorField& v, const VectorField& d, const VectorField& H,
                  const VectorField& vt, const VectorField& dt, const VectorField& Ht,
                  const MaterialParams& params) {
  return rel_energy_terms(v, d, H, vt, dt, Ht, params).total();
}

double rel_energy_expanded(const VectorField& v, const VectorField& d, const VectorField& H,
                           const VectorField& vt, const VectorField& dt, const VectorField& Ht,
                           const MaterialParams& p) {
  const Grid& g = v.grid;
  for (const VectorField* f : {&d, &H, &vt, &dt, &Ht}) require_same_grid(g, f->grid);
  const MatrixField gd = grad(d), gdt = grad(dt);
  std::vector<double> dens(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 a = d.at(n), b = dt.at(n);
    const Mat3 ga = gd.at(n), gb = gdt.at(n);
    const double diva = trace(ga), divb = trace(gb);
    const Vec3 ca = curl_of(ga), cb = curl_of(gb);
    const Mat3 Wa = skw(ga), Wb = skw(gb);
    const Mat3 dW = Wa - Wb;
    double e = 0.5 * p.k1 * std::pow(diva - divb, 2);
    e += p.k2 * frobenius(dW, dW);
    e += 0.5 * p.k3 * norm2(diva * a - divb * b);
    e += 0.5 * p.k4 * std::pow(dot(a, ca) - dot(b, cb), 2);
    e += 2.0 * p.k5 * norm2(Wa * a - Wb * b);
    e += 0.5 * norm2(v.at(n) - vt.at(n));
    e -= 0.5 * p.chi.chi_par * std::pow(dot(a, H.at(n)) - dot(b, Ht.at(n)), 2);
    e -= 0.5 * p.chi.chi_perp * norm2(cross(a, H.at(n)) - cross(b, Ht.at(n)));
    dens[n] = e;
  }
  return integrate_nodes(g, dens);
}

RelativeDissipationTerms rel_dissipation_terms(const VectorField& v, const VectorField& d,
                                               const VectorField& q, const VectorField& vt,
                                               const VectorField& dt, const VectorField& qt,
                                               const MaterialParams& p) {
  const Grid& g = v.grid;
  for (const VectorField* f : {&d, &q, &vt, &dt, &qt}) require_same_grid(g, f->grid);
  const MatrixField gv = grad(v), gvt = grad(vt);
  std::vector<double> t1(g.size()), t4(g.size()), t56(g.size()), tq(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 a = d.at(n), b = dt.at(n);
    const Mat3 Da = sym(gv.at(n)), Db = sym(gvt.at(n));
    const Vec3 Dda = Da * a, Ddb = Db * b;
    const Mat3 dD = Da - Db;
    t1[n] = p.w_dDd() * std::pow(dot(a, Dda) - dot(b, Ddb), 2);
    t4[n] = p.w_Dv() * frobenius(dD, dD);
    t56[n] = p.w_Dd() * norm2(Dda - Ddb);
    tq[n] = norm2(cross(a, q.at(n)) - cross(b, qt.at(n)));
  }
  RelativeDissipationTerms w;
  w.mu1 = integrate_nodes(g, t1);
  w.mu4 = integrate_nodes(g, t4);
  w.mu56 = integrate_nodes(g, t56);
  w.dxq = integrate_nodes(g, tq);
  return w;
}

double rel_dissipation(const VectorField& v, const VectorField& d, const VectorField& q,
                       const VectorField& vt, const VectorField& dt, const VectorField& qt,
                       const MaterialParams& params) {
  return rel_dissipation_terms(v, d, q, vt, dt, qt, params).total();
}

double regularity_weight(const TestState& s, const MaterialParams& params, double C) {
  if (C < 0.0) throw ParameterError("regularity weight constant must be nonnegative");
  const VectorField qt = variational_derivative(params, s.d, s.H);
  const double vinf = discrete_norm(s.v, NormKind::Linf);
  const double gv3 = lp_norm(grad(s.v), 3.0);
  const double q3 = lp_norm(qt, 3.0);
  const double dinf = discrete_norm(s.dd_dt, NormKind::Linf);
  const double dw13 = w1p_norm(s.dd_dt, 3.0);
  const double d3 = lp_norm(s.dd_dt, 3.0);
  return C * (vinf * vinf + gv3 * gv3 + q3 * q3 + dinf + dw13 + d3 * d3);
}

double initial_distance(const VectorField& v, const VectorField& d, const VectorField& H,
                        const VectorField& vt, const VectorField& dt, const VectorField& Ht,
                        const MaterialParams& p) {
  const Grid& g = v.grid;
  const double E = rel_energy(v, d, H, vt, dt, Ht, p);
  const MatrixField gd = grad(d), gdt = grad(dt);
  std::vector<double> young(g.size()), cross_term(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Rank3Tensor Y = theta_of(p, gdt.at(n), dt.at(n));
    const Vec3 dd = d.at(n) - dt.at(n);
    const Mat3 M = contract_last(Y, dd);
    young[n] = frobenius(M, M) / (2.0 * p.k_coercive);
    cross_term[n] = triple_dot(outer(gd.at(n) - gdt.at(n), dd), Y);
  }
  return E + integrate_nodes(g, young) + integrate_nodes(g, cross_term);
}

VectorField correction_a(const VectorField& d, const VectorField& H, const VectorField& dt,
                         const VectorField& Ht, const MaterialParams& p) {
  const Grid& g = d.grid;
  for (const VectorField* f : {&H, &dt, &Ht}) require_same_grid(g, f->grid);
  const MatrixField gdt = grad(dt);
  VectorField a(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Rank3Tensor Y = theta_of(p, gdt.at(n), dt.at(n));
    const Vec3 b = dt.at(n), hb = Ht.at(n);
    const Vec3 dH = hb - H.at(n);
    Vec3 x = (1.0 / p.k_coercive) * contract_leading(contract_last(Y, b - d.at(n)), Y);
    x += (p.chi.chi_par * dot(b, hb)) * dH;
    x -= p.chi.chi_perp * cross(dH, cross(hb, b));
    a.set(n, x);
  }
  return a;
}

const char* to_string(PairingForm form) {
  return form == PairingForm::continuous ? "continuous" : "discrete";
}

EquationResidual equation_residual(const TestState& s, const MaterialParams& p,
                                   const VectorField& g, PairingForm form,
                                   const std::optional<SpectralCutoff>& cutoff) {
  const Grid& grid = s.v.grid;
  for (const VectorField* f : {&s.d, &s.dv_dt, &s.dd_dt, &s.H, &g}) require_same_grid(grid, f->grid);
  VectorField qt = variational_derivative(p, s.d, s.H);
  if (form == PairingForm::discrete) qt = director_project(qt, cutoff);
  const MatrixField gv = grad(s.v), gd = grad(s.d);

  EquationResidual r{VectorField(grid), VectorField(grid)};
  MatrixField flux(grid);  // continuous: grad d^T dF/d(grad d) - T^L ; discrete: -T^L_n
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Vec3 vn = s.v.at(n), dn = s.d.at(n), qn = qt.at(n);
    const Mat3 G = gd.at(n), D = sym(gv.at(n)), W = skw(gv.at(n));
    Vec3 m = s.dv_dt.at(n);
    m += gv.at(n) * vn;
    m -= g.at(n);
    Mat3 T = -1.0 * leslie_stress_at(p, dn, D, qn);
    if (form == PairingForm::continuous)
      T += transpose(G) * elastic_stress(p, dn, G);
    else
      m -= transpose(G) * (tangent_projector(dn) * qn);
    r.momentum.set(n, m);
    flux.set(n, T);

    Vec3 x = s.dd_dt.at(n);
    x += G * vn;
    x -= W * dn;
    x += p.lambda * (D * dn);
    x += qn;
    r.director.set(n, cross(dn, x));
  }
  r.momentum += div(flux);
  return r;
}

// ---------------------------------------------------------------------------
// Certificate

namespace {

// <l, q(h)> in weak form with the magnetic field H.
double weak_pairing(const VectorField& l, const VectorField& h, const VectorField& H,
                    const MaterialParams& p) {
  const MatrixField gh = grad(h);
  MatrixField S(h.grid);
  VectorField loc(h.grid);
  for (std::size_t n = 0; n < h.size(); ++n) {
    S.set(n, elastic_stress(p, h.at(n), gh.at(n)));
    loc.set(n, elastic_explicit_force(p, h.at(n), gh.at(n)) + magnetic_force(p, h.at(n), H.at(n)));
  }
  return inner(grad(l), S) + inner(l, loc);
}

struct Sample {
  double E = 0.0, W = 0.0, K = 0.0, P = 0.0;
};

}  // namespace

CertificateReport certificate(const SimulationTrace& trace, const SchemeConfig& config,
                              const TestTrajectory& test, const MaterialParams& p,
                              const CertificateOptions& opt) {
  if (trace.empty()) throw Error("certificate needs a nonempty trace");
  if (opt.C && *opt.C < 0.0) throw ParameterError("certificate constant C must be nonnegative");
  if (!(opt.tol >= 0.0)) throw ParameterError("certificate tolerance must be nonnegative");
  const Grid& grid = trace.states.front().v.grid;
  require_same_grid(grid, test.grid());
  const bool discrete = opt.form == PairingForm::discrete;

  CertificateReport rep;
  rep.form = opt.form;
  rep.discrete_terms = opt.discrete_terms;
  if (trace.states.size() < 8)
    rep.warnings.push_back("fewer than 8 time samples; time quadrature is coarse");

  const VectorField& H = config.H;
  const VectorField& Ht = test.magnetic_field();
  rep.field_mismatch = inner(H - Ht, H - Ht);

  std::vector<Sample> smp(trace.states.size());
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const FieldState& s = trace.states[i];
    const TestState ts = evaluate(test, s.t);
    rep.times.push_back(s.t);

    VectorField q = discrete ? projected_variational_derivative(p, s.d, H, config.cutoff)
                             : variational_derivative(p, s.d, H);
    VectorField qt = variational_derivative(p, ts.d, Ht);
    if (discrete) qt = director_project(qt, config.cutoff);

    smp[i].E = rel_energy(s.v, s.d, H, ts.v, ts.d, Ht, p);
    smp[i].W = rel_dissipation(s.v, s.d, q, ts.v, ts.d, qt, p);
    smp[i].K = regularity_weight(ts, p, 1.0);
    if (i == 0) rep.initial_distance = initial_distance(s.v, s.d, H, ts.v, ts.d, Ht, p);

    const VectorField g = config.forcing.at(grid, s.t);
    const EquationResidual A = equation_residual(ts, p, g, opt.form, config.cutoff);
    const VectorField a = correction_a(s.d, H, ts.d, Ht, p);
    VectorField z = qt - q + a;
    for (std::size_t n = 0; n < grid.size(); ++n) z.set(n, cross(s.d.at(n), z.at(n)));
    double P = inner(A.momentum, ts.v - s.v) + inner(A.director, z);

    if (opt.discrete_terms) {
      // <(I - R_n) dt d~, q(d~) - q(d_n)>
      const VectorField l = ts.dd_dt - director_project(ts.dd_dt, config.cutoff);
      P += weak_pairing(l, ts.d, Ht, p) - weak_pairing(l, s.d, H, p);
      // (A_n(v_n, d_n), (P_n v~ - v~, d_n x (R_n a - a)))
      const Rates rates = assemble_rhs(s, p, config);
      const TestState self{s.v, s.d, rates.dv_dt, rates.dd_dt, H};
      const EquationResidual An = equation_residual(self, p, g, PairingForm::discrete, config.cutoff);
      const VectorField Ra = director_project(a, config.cutoff) - a;
      VectorField dRa(grid), stretch(grid), unit_defect(grid);
      for (std::size_t n = 0; n < grid.size(); ++n) {
        const Vec3 dn = s.d.at(n), b = ts.d.at(n), bt = ts.dd_dt.at(n);
        dRa.set(n, cross(dn, Ra.at(n)));
        stretch.set(n, (norm2(dn) - 1.0) * rates.dd_dt.at(n));
        unit_defect.set(n, (1.0 - norm2(b)) * bt + dot(b, bt) * b);
      }
      P += inner(An.momentum, leray_project(ts.v, config.cutoff) - ts.v) + inner(An.director, dRa);
      P += inner(stretch, Ra);
      P += inner(unit_defect, qt - q + a);
    }
    smp[i].P = P;
    rep.rel_energy.push_back(smp[i].E);
    rep.rel_dissipation.push_back(smp[i].W);
    rep.pairing.push_back(P);
  }

  // cumulative trapezoid of the unit-constant weight
  const std::size_t m = smp.size();
  std::vector<double> kint(m, 0.0);
  for (std::size_t i = 1; i < m; ++i)
    kint[i] = kint[i - 1] + 0.5 * (rep.times[i] - rep.times[i - 1]) * (smp[i].K + smp[i - 1].K);

  auto evaluate_at = [&](double C, std::vector<double>* lhs, std::vector<double>* rhs) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      double wint = 0.0, pint = 0.0;
      for (std::size_t j = 1; j <= i; ++j) {
        const double h = 0.5 * (rep.times[j] - rep.times[j - 1]);
        const double ej = std::exp(C * (kint[i] - kint[j]));
        const double ej1 = std::exp(C * (kint[i] - kint[j - 1]));
        wint += h * (smp[j].W * ej + smp[j - 1].W * ej1);
        pint += h * (smp[j].P * ej + smp[j - 1].P * ej1);
      }
      const double L = 0.5 * smp[i].E + rep.field_mismatch + 0.5 * wint;
      const double R = rep.initial_distance * std::exp(C * kint[i]) + pint;
      if (lhs) lhs->push_back(L);
      if (rhs) rhs->push_back(R);
      worst = std::min(worst, R - L);
    }
    return worst;
  };
  auto feasible = [&](double C) { return evaluate_at(C, nullptr, nullptr) >= -opt.tol; };

  double C = 0.0;
  if (opt.C) {
    C = *opt.C;
  } else if (!feasible(0.0)) {
    // geometric scan for a feasible bracket, then bisection inside it
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int k = -40; k <= 0; ++k) {
      const double c = opt.C_max * std::ldexp(1.0, k);
      if (feasible(c)) {
        hi = c;
        break;
      }
      lo = c;
    }
    if (std::isfinite(hi)) {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
          hi = mid;
        else
          lo = mid;
      }
    }
    C = hi;
  }
  rep.C = C;
  if (std::isfinite(C)) {
    evaluate_at(C, &rep.lhs, &rep.rhs);
    for (std::size_t i = 0; i < m; ++i) {
      rep.weight.push_back(C * smp[i].K);
      rep.slack.push_back(rep.rhs[i] - rep.lhs[i]);
    }
    rep.pass = std::all_of(rep.slack.begin(), rep.slack.end(),
                           [&](double s) { return s >= -opt.tol; });
  } else {
    // no admissible constant: report the C = 0 evaluation
    evaluate_at(0.0, &rep.lhs, &rep.rhs);
    for (std::size_t i = 0; i < m; ++i) {
      rep.weight.push_back(0.0);
      rep.slack.push_back(rep.rhs[i] - rep.lhs[i]);
    }
    rep.pass = false;
    rep.warnings.push_back("no admissible C up to C_max");
  }
  return rep;
}

}  // namespace elsim
