#include "elsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "elsim/error.hpp"

namespace elsim {

const char* to_string(ControlBasis basis) {
  return basis == ControlBasis::uniform ? "uniform" : "fourier";
}

ControlBasis control_basis_from_string(const std::string& s) {
  if (s == "uniform") return ControlBasis::uniform;
  if (s == "fourier") return ControlBasis::fourier;
  throw Error("unknown control basis '" + s + "' (expected uniform or fourier)");
}

ControlParametrization::ControlParametrization(const Grid& grid, ControlBasis basis, int kmax)
    : grid_(grid), basis_(basis) {
  if (basis == ControlBasis::uniform) return;
  if (grid.mode != BoundaryMode::periodic)
    throw Error("fourier control basis requires a periodic grid");
  if (kmax < 1) throw ParameterError("control kmax must be >= 1");
  for (int a = 0; a < grid.dims; ++a)
    if (2 * kmax >= grid.n[a]) throw ParameterError("control kmax must stay below the Nyquist mode");
  const int kz = grid.dims == 3 ? kmax : 0;
  for (int mx = -kmax; mx <= kmax; ++mx)
    for (int my = -kmax; my <= kmax; ++my)
      for (int mz = -kz; mz <= kz; ++mz) {
        // one representative of each +-m pair
        const int first = mx != 0 ? mx : (my != 0 ? my : mz);
        if (first <= 0) continue;
        Mode m;
        m.k = Vec3{2.0 * std::numbers::pi * mx / grid.extent[0],
                   2.0 * std::numbers::pi * my / grid.extent[1],
                   2.0 * std::numbers::pi * mz / grid.extent[2]};
        const Vec3 khat = (1.0 / norm(m.k)) * m.k;
        Vec3 seed = std::abs(khat[2]) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        seed -= dot(seed, khat) * khat;
        m.e1 = (1.0 / norm(seed)) * seed;
        m.e2 = cross(khat, m.e1);
        modes_.push_back(m);
      }
}

VectorField ControlParametrization::field(const std::vector<double>& x) const {
  if (x.size() != dimension()) throw Error("control parameter vector has the wrong length");
  const Vec3 uniform{x[0], x[1], x[2]};
  return sample(grid_, [&](const Vec3& p) {
    Vec3 h = uniform;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const Mode& m = modes_[i];
      const double* c = &x[3 + 4 * i];
      const double ph = dot(m.k, p);
      h += (c[0] * std::cos(ph) + c[2] * std::sin(ph)) * m.e1;
      h += (c[1] * std::cos(ph) + c[3] * std::sin(ph)) * m.e2;
    }
    return h;
  });
}

void validate(const ControlProblem& p) {
  if (!(p.gamma > 0.0)) throw ParameterError("control gamma must be positive");
  if (!(p.c_H > 0.0)) throw ParameterError("control bound c_H must be positive");
  for (const VectorField* f : {&p.initial.v, &p.initial.d, &p.v_target, &p.d_target})
    require_same_grid(p.grid, f->grid);
  if (p.max_state_solves < 1) throw ParameterError("max_state_solves must be >= 1");
  if (p.max_iterations < 0) throw ParameterError("max_iterations must be >= 0");
  const ControlParametrization param(p.grid, p.basis, p.kmax);
  if (param.dimension() > 64) throw ParameterError("control parametrization exceeds 64 parameters");
  if (!p.initial_params.empty() && p.initial_params.size() != param.dimension())
    throw ParameterError("initial control parameters have the wrong length");
  validate(p.scheme);
}

double cost_J(const FieldState& s, const VectorField& H, const ControlProblem& p) {
  const VectorField dv = s.v - p.v_target;
  const double dd = discrete_norm(s.d - p.d_target, NormKind::H1);
  return inner(dv, dv) + dd * dd + p.gamma * inner(H, H);
}

VectorField project_control(const VectorField& H, double c_H) {
  const double n3 = discrete_norm(H, NormKind::L3);
  if (n3 <= c_H) return H;
  VectorField out = H;
  out *= c_H / n3;
  return out;
}

ReducedCost::ReducedCost(const ControlProblem& problem)
    : problem_(problem), param_(problem.grid, problem.basis, problem.kmax) {}

std::vector<double> ReducedCost::project(std::vector<double> x) const {
  const double n3 = discrete_norm(param_.field(x), NormKind::L3);
  if (n3 > problem_.c_H)
    for (double& xi : x) xi *= problem_.c_H / n3;
  return x;
}

double ReducedCost::operator()(const std::vector<double>& x, SimulationTrace* trace) {
  ++evaluations_;
  SchemeConfig cfg = problem_.scheme;
  cfg.H = param_.field(x);
  try {
    SimulationTrace tr = integrate(problem_.initial, problem_.params, cfg);
    const double J = cost_J(tr.states.back(), cfg.H, problem_);
    if (trace) *trace = std::move(tr);
    return J;
  } catch (const BlowUpError&) {
    return std::numeric_limits<double>::infinity();
  }
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec axpy(const Vec& x, double a, const Vec& y) {
  Vec out = x;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += a * y[i];
  return out;
}

struct InverseHessian {
  std::size_t n;
  std::vector<double> m;

  void reset(double scale) {
    m.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = scale;
  }
  Vec apply(const Vec& g) const {
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i] += m[i * n + j] * g[j];
    return out;
  }
  // H+ = (I - r s y^T) H (I - r y s^T) + r s s^T
  void update(const Vec& s, const Vec& y) {
    const double sy = dot(s, y);
    if (!(sy > 1e-12 * norm(s) * norm(y))) return;
    const double r = 1.0 / sy;
    const Vec Hy = apply(y);
    const double yHy = dot(y, Hy);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m[i * n + j] += -r * (Hy[i] * s[j] + s[i] * Hy[j]) + (r * r * yHy + r) * s[i] * s[j];
  }
};

}  // namespace

ControlResult optimize(const ControlProblem& problem) {
  validate(problem);
  ReducedCost J(problem);
  const auto& param = J.parametrization();
  const std::size_t n = param.dimension();
  const double h = problem.fd_step > 0.0 ? problem.fd_step : 1e-4 * problem.c_H;
  const double probe = problem.probe_step > 0.0 ? problem.probe_step : 0.1 * problem.c_H;
  const int budget = problem.max_state_solves;

  ControlResult res;
  Vec x = J.project(problem.initial_params.empty() ? Vec(n, 0.0) : problem.initial_params);
  double f = J(x, &res.final_trace);
  if (!std::isfinite(f)) throw Error("state equation blows up for the initial control");

  auto log_row = [&](int it, double gn, double step) {
    const VectorField H = param.field(x);
    res.J_history.push_back(f);
    res.log.push_back({it, f, gn, step, discrete_norm(H, NormKind::L2),
                       discrete_norm(H, NormKind::L3)});
  };
  log_row(0, std::numeric_limits<double>::quiet_NaN(), 0.0);

  InverseHessian B{n, {}};
  bool fresh = true;  // B is a scaled identity
  Vec g_prev, s_prev;
  res.stop_reason = "max iterations";

  for (int it = 1; it <= problem.max_iterations; ++it) {
    if (f == 0.0) {
      res.stop_reason = "zero cost";
      break;
    }
    if (J.evaluations() + static_cast<int>(2 * n) > budget) {
      res.stop_reason = "state solve budget";
      break;
    }
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (J(xp) - J(xm)) / (2.0 * h);
    }
    const double gn = norm(g);
    if (!std::isfinite(gn)) {
      res.stop_reason = "non-finite gradient";
      break;
    }

    if (!g_prev.empty() && !fresh) B.update(s_prev, axpy(g, -1.0, g_prev));
    if (!g_prev.empty() && fresh) {
      B.reset(probe / std::max(gn, 1e-300));
      B.update(s_prev, axpy(g, -1.0, g_prev));
      fresh = false;
    }

    Vec xn;
    double fn = f;
    SimulationTrace tn;
    bool accepted = false;

    if (gn < problem.grad_tol) {
      // stationary point of the even cost: probe coordinate directions and, within
      // the uniform block, the diagonals (H enters the state quadratically)
      std::vector<Vec> dirs;
      for (std::size_t i = 0; i < n; ++i) {
        Vec e(n, 0.0);
        e[i] = 1.0;
        dirs.push_back(e);
      }
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
          for (double sj : {1.0, -1.0}) {
            Vec e(n, 0.0);
            e[i] = std::sqrt(0.5);
            e[j] = sj * std::sqrt(0.5);
            dirs.push_back(e);
          }
      double best = f;
      for (const Vec& e : dirs)
        for (double sgn : {1.0, -1.0}) {
          if (J.evaluations() >= budget) break;
          const Vec xp = J.project(axpy(x, sgn * probe, e));
          SimulationTrace tp;
          const double fp = J(xp, &tp);
          if (fp < best) {
            best = fp;
            xn = xp;
            tn = std::move(tp);
          }
        }
      if (best < f) {
        fn = best;
        accepted = true;
        B.reset(probe / std::max(gn, 1e-300));
        fresh = true;
        g_prev.clear();
      } else {
        res.stop_reason = "stationary point";
        break;
      }
    } else {
      if (g_prev.empty()) {
        B.reset(probe / gn);
        fresh = true;
      }
      for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
        Vec p = B.apply(g);
        for (double& pi : p) pi = -pi;
        if (dot(p, g) >= 0.0) {
          B.reset(probe / gn);
          fresh = true;
          continue;
        }
        double alpha = 1.0;
        for (int ls = 0; ls < 30 && J.evaluations() < budget; ++ls, alpha *= 0.5) {
          const Vec cand = J.project(axpy(x, alpha, p));
          SimulationTrace tc;
          const double fc = J(cand, &tc);
          const Vec d = axpy(cand, -1.0, x);
          if (std::isfinite(fc) && fc <= f && fc <= f + 1e-4 * dot(g, d)) {
            xn = cand;
            fn = fc;
            tn = std::move(tc);
            accepted = true;
            break;
          }
        }
        if (!accepted && !fresh) {
          B.reset(probe / gn);
          fresh = true;
        } else {
          break;
        }
      }
      if (!accepted) {
        res.stop_reason = J.evaluations() >= budget ? "state solve budget" : "line search failed";
        break;
      }
      g_prev = g;
      s_prev = axpy(xn, -1.0, x);
    }

    const double step = norm(axpy(xn, -1.0, x));
    const double change = f - fn;
    x = xn;
    f = fn;
    res.final_trace = std::move(tn);
    log_row(it, gn, step);
    if (change <= problem.stagnation_tol * std::max(1.0, std::abs(f)) && gn >= problem.grad_tol) {
      res.stop_reason = "stagnation";
      break;
    }
  }

  res.params = x;
  res.H_opt = param.field(x);
  res.evaluations = J.evaluations();
  return res;
}

}  // namespace elsim
