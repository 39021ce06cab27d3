#include "katlas/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "integrator.hpp"
#include "katlas/error.hpp"
#include "katlas/kernels.hpp"

namespace katlas {

namespace {

using detail::State;
using detail::StepControl;

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::Precondition, msg);
}

// Inverse length scale of the core: steps and the Taylor start are measured in it.
double core_scale(const PowerNonlinearity& nl, double zeta0) {
  return std::sqrt(std::max({nl.omega(), std::fabs(nl.df(zeta0)), std::fabs(nl.f(zeta0) / zeta0)}));
}

double radial_pow(double r, int N) { return N == 1 ? 1.0 : std::pow(r, N - 1); }

// Decay constant of v ~ r^{-(N-1)/2} e^{-kappa r} read off the last node.
double last_node_kappa(const RadialProfile& p) {
  const double vL = p.v.back(), dL = p.dv.back(), rL = p.r.back();
  if (vL == 0.0 || rL <= 0.0) return 0.0;
  return -dL / vL - 0.5 * (p.N - 1) / rL;
}

// Offset of zeta0 from the decaying trajectory, from the growing-mode
// content of v and of w = dv/dzeta0.
double growing_mode_offset(const PowerNonlinearity& nl, int N, double r, const State<4>& x) {
  const double v = x[0];
  const double lin = v != 0.0 ? -nl.f(v) / v : nl.omega();
  const double kappa = std::sqrt(std::max(lin, 0.25 * nl.omega())) + 0.5 * (N - 1) / r;
  const double num = x[1] + kappa * x[0];
  const double den = x[3] + kappa * x[2];
  return den != 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

struct TailShot {
  std::vector<double> rho, y, dy;
};

// Decaying solution integrated inward from r = R in rho = R - r, started on the
// Bessel tail of the linearised equation. Works with |v|; f is odd.
TailShot inward_tail(const PowerNonlinearity& nl, int N, double R, double VR, double rho_end,
                     double h_max, double rtol) {
  double omega_eff = -nl.f(VR) / VR;
  if (!(omega_eff > 0.0)) omega_eff = nl.omega();
  const double kappa = std::sqrt(omega_eff);
  const double x = kappa * R;
  const double nu = 0.5 * (N - 2);
  double q;
  if (x < 500.0) {
    q = kappa * std::cyl_bessel_k(nu + 1.0, x) / std::cyl_bessel_k(nu, x);
  } else {
    q = kappa * (1.0 + (2.0 * nu + 1.0) / (2.0 * x));
  }

  TailShot out;
  State<2> y{VR, q * VR};
  out.rho.push_back(0.0);
  out.y.push_back(y[0]);
  out.dy.push_back(y[1]);
  auto rhs = [&](const State<2>& s, State<2>& d, double rho) {
    d[0] = s[1];
    d[1] = -nl.f(s[0]) + (N - 1) * s[1] / (R - rho);
  };
  StepControl ctl{rtol, 1e-3 * rtol * VR, h_max, std::min(h_max, 1e-2 / kappa)};
  detail::drive<2>(rhs, y, 0.0, rho_end, ctl, [&](double rho, State<2>& s) {
    out.rho.push_back(rho);
    out.y.push_back(s[0]);
    out.dy.push_back(s[1]);
    return true;
  });
  return out;
}

}  // namespace

void ShootingConfig::validate() const {
  auto tol_ok = [](double t) { return std::isfinite(t) && t > 0.0 && t < 1.0; };
  require(tol_ok(bisection_rel_tol), "bisection_rel_tol must lie in (0, 1)");
  require(tol_ok(tail_cutoff), "tail_cutoff must lie in (0, 1)");
  require(tol_ok(integrator_rel_tol), "integrator_rel_tol must lie in (0, 1)");
  require(max_bisection_iters >= 1, "max_bisection_iters must be positive");
  require(std::isfinite(r_max_initial) && r_max_initial > 0.0, "r_max_initial must be positive");
  require(r_max_doublings >= 0, "r_max_doublings must be nonnegative");
}

nlohmann::json ShootingConfig::to_json() const {
  return {{"bisection_rel_tol", bisection_rel_tol},
          {"tail_cutoff", tail_cutoff},
          {"integrator_rel_tol", integrator_rel_tol},
          {"max_bisection_iters", max_bisection_iters},
          {"r_max_initial", r_max_initial},
          {"r_max_doublings", r_max_doublings}};
}

ShootingConfig ShootingConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "solver settings must be an object");
  ShootingConfig c;
  try {
    c.bisection_rel_tol = j.value("bisection_rel_tol", c.bisection_rel_tol);
    c.tail_cutoff = j.value("tail_cutoff", c.tail_cutoff);
    c.integrator_rel_tol = j.value("integrator_rel_tol", c.integrator_rel_tol);
    c.max_bisection_iters = j.value("max_bisection_iters", c.max_bisection_iters);
    c.r_max_initial = j.value("r_max_initial", c.r_max_initial);
    c.r_max_doublings = j.value("r_max_doublings", c.r_max_doublings);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("solver settings: ") + e.what());
  }
  c.validate();
  return c;
}

const char* to_string(ShotKind kind) {
  switch (kind) {
    case ShotKind::CrossesZero: return "CrossesZero";
    case ShotKind::TurnsBack: return "TurnsBack";
    case ShotKind::Decays: return "Decays";
  }
  return "?";
}

Trajectory shoot(const PowerNonlinearity& nl, int N, double zeta0, const ShootingConfig& cfg,
                 int max_crossings) {
  require(N >= 2, "shoot needs N >= 2; use closed_form_1d for N = 1");
  require(std::isfinite(zeta0) && zeta0 > 0.0, "zeta0 must be positive and finite");
  require(max_crossings >= 0, "max_crossings must be nonnegative");
  cfg.validate();

  const double scale = core_scale(nl, zeta0);
  const double r_start = 1e-4 / scale;
  const double f0 = nl.f(zeta0), df0 = nl.df(zeta0);

  Trajectory tr;
  tr.zeta0 = zeta0;
  tr.offset = std::numeric_limits<double>::quiet_NaN();
  auto record = [&](double r, const State<4>& x) {
    tr.r.push_back(r);
    tr.v.push_back(x[0]);
    tr.dv.push_back(x[1]);
    tr.w.push_back(x[2]);
    tr.dw.push_back(x[3]);
  };

  record(0.0, {zeta0, 0.0, 1.0, 0.0});
  State<4> x{zeta0 - f0 * r_start * r_start / (2.0 * N), -f0 * r_start / N,
             1.0 - df0 * r_start * r_start / (2.0 * N), -df0 * r_start / N};
  record(r_start, x);

  auto rhs = [&](const State<4>& s, State<4>& d, double r) {
    const double c = (N - 1) / r;
    d[0] = s[1];
    d[1] = -nl.f(s[0]) - c * s[1];
    d[2] = s[3];
    d[3] = -nl.df(s[0]) * s[2] - c * s[3];
  };

  const double decay_tol = 10.0 * std::max(cfg.bisection_rel_tol, cfg.integrator_rel_tol) * zeta0;
  int sign = 1;
  bool approaching = f0 > 0.0;
  bool done = false;

  auto classify_small = [&](double r, const State<4>& s) {
    if (std::fabs(s[0]) > 1e-2 * zeta0) return;
    tr.offset = growing_mode_offset(nl, N, r, s);
    if (std::isfinite(tr.offset) && std::fabs(tr.offset) <= decay_tol) {
      tr.kind = ShotKind::Decays;
    }
  };

  auto observe = [&](double r, State<4>& s) {
    record(r, s);
    if (sign * s[0] < 0.0) {
      ++tr.crossings;
      sign = -sign;
      approaching = false;
      if (tr.crossings > max_crossings) {
        tr.kind = ShotKind::CrossesZero;
        tr.r_event = r;
        --tr.crossings;
        classify_small(r, s);
        done = true;
        return false;
      }
      return true;
    }
    const double mag = std::fabs(s[0]);
    const double rate = sign * s[1];
    // Literal decay only on the exponential tail, not while v passes through zero.
    const double tail_slope = 2.0 * (std::sqrt(nl.omega()) + 0.5 * (N - 1) / r) * mag;
    if (approaching && mag < cfg.tail_cutoff * zeta0 && std::fabs(s[1]) <= tail_slope) {
      tr.kind = ShotKind::Decays;
      tr.r_event = r;
      done = true;
      return false;
    }
    if (approaching && rate > 0.0) {
      tr.kind = ShotKind::TurnsBack;
      tr.r_event = r;
      classify_small(r, s);
      done = true;
      return false;
    }
    if (!approaching && rate < 0.0) approaching = true;
    return true;
  };

  StepControl ctl;
  ctl.rtol = cfg.integrator_rel_tol;
  ctl.atol = 1e-6 * cfg.integrator_rel_tol * cfg.tail_cutoff * zeta0;
  ctl.h_max = 0.02 / scale;
  ctl.h_init = r_start;

  double r = r_start;
  double r_lim = cfg.r_max_initial / std::sqrt(nl.omega());
  for (int doubling = 0;; ++doubling) {
    r = detail::drive<4>(rhs, x, r, r_lim, ctl, observe);
    if (done) break;
    if (doubling >= cfg.r_max_doublings) {
      throw Error(ErrorKind::Inconclusive,
                  "no classification before r = " + format_double(r_lim) + " for zeta0 = " +
                      format_double(zeta0));
    }
    r_lim *= 2.0;
  }
  return tr;
}

BoundState find_bound_state(const PowerNonlinearity& nl, int N, int k, const ShootingConfig& cfg) {
  require(N >= 2, "find_bound_state needs N >= 2");
  require(k >= 0, "k must be nonnegative");
  cfg.validate();
  const AssumptionReport report = check_berestycki_lions(nl, N);
  if (!report.all_ok()) {
    std::string msg = "assumptions fail for N = " + std::to_string(N);
    for (const auto& m : report.messages) msg += "; " + m;
    throw Error(ErrorKind::Precondition, msg);
  }
  const double zeta = report.zeta;

  auto crosses = [&](double z) { return shoot(nl, N, z, cfg, k).kind == ShotKind::CrossesZero; };

  // Heights at or below zeta cannot reach zero, so zeta itself is a lower end.
  double lo = zeta, hi = 0.0;
  for (double z = 1.25 * zeta;; z *= 1.25) {
    if (z > 1e6 * zeta) {
      throw Error(ErrorKind::BracketNotFound,
                  "no height up to 1e6 zeta gives " + std::to_string(k + 1) + " crossings");
    }
    if (crosses(z)) {
      hi = z;
      break;
    }
    lo = z;
  }

  int iters = 0;
  while (hi - lo > cfg.bisection_rel_tol * hi) {
    if (++iters > cfg.max_bisection_iters) {
      throw Error(ErrorKind::NoConvergence, "bisection did not reach the requested tolerance");
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (crosses(mid) ? hi : lo) = mid;
  }

  const double zs = 0.5 * (lo + hi);
  const Trajectory tr = shoot(nl, N, zs, cfg, k);
  // Distance to the numerically decaying height: the growing-mode estimate at
  // the event when available (it includes integration error), else the bracket.
  const double dz = std::max(std::isfinite(tr.offset) ? std::fabs(tr.offset) : hi - lo,
                             4.0 * std::numeric_limits<double>::epsilon() * zs);

  // Samples on the outward shot that precede the event and keep its last sign.
  std::size_t n = tr.r.size();
  for (std::size_t i = 1, changes = 0; i < tr.r.size(); ++i) {
    if ((tr.v[i] > 0.0) != (tr.v[i - 1] > 0.0) && ++changes > static_cast<std::size_t>(k)) {
      n = i;
      break;
    }
  }
  const bool last_positive = tr.v[n - 1] > 0.0;
  std::size_t run = n - 1;
  while (run > 0 && (tr.v[run - 1] > 0.0) == last_positive) --run;
  std::size_t peak = run;
  for (std::size_t i = run; i < n; ++i) {
    if (std::fabs(tr.v[i]) > std::fabs(tr.v[peak])) peak = i;
  }
  // Loose solver tolerances leave dz itself above 1e-8 of the height.
  const double join_tol = std::max(1e-8, 4.0 * dz / zs);
  std::size_t j = peak;
  for (std::size_t i = peak; i < n; ++i) {
    if (std::fabs(dz * tr.w[i]) > join_tol * std::fabs(tr.v[i])) break;
    j = i;
  }

  const double sgn = last_positive ? 1.0 : -1.0;
  const double rj = tr.r[j];
  const double vj = std::fabs(tr.v[j]);
  const double kappa0 = std::sqrt(nl.omega());
  const double scale = core_scale(nl, zs);
  const double h_max = 0.02 / scale;
  const double floor = cfg.tail_cutoff * zs;

  double R = rj + std::log(vj / (0.5 * floor)) / kappa0 + 1.0 / kappa0;
  TailShot tail;
  double VR = 0.0;
  for (int extend = 0;; ++extend) {
    if (extend > 30) throw Error(ErrorKind::NoConvergence, "tail never reached the cutoff");
    const double rho_end = R - rj;
    const double target = std::log(vj);
    // Integration blows up when V_R is far too large; that counts as an
    // overshoot of the join value.
    auto miss = [&](double logV) {
      try {
        tail = inward_tail(nl, N, R, std::exp(logV), rho_end, h_max, cfg.integrator_rel_tol);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::IntegratorFailure) throw;
        return std::numeric_limits<double>::infinity();
      }
      return std::log(tail.y.back()) - target;
    };
    // miss is increasing in log V_R with slope close to 1. Newton steps with
    // that slope until the root is bracketed, then Illinois regula falsi.
    double x = target - kappa0 * rho_end - 0.5 * (N - 1) * std::log(R / rj);
    double m = miss(x);
    double xl = 0, ml = 0, xh = 0, mh = 0;
    bool has_l = false, has_h = false;
    int side = 0;
    for (int it = 0; std::fabs(m) > 1e-13; ++it) {
      if (it > 200) throw Error(ErrorKind::NoConvergence, "tail matching stalled");
      if (m < 0) {
        xl = x, ml = m, has_l = true;
        if (side == -1 && has_h) mh *= 0.5;
        side = -1;
      } else {
        xh = x, mh = m, has_h = true;
        if (side == 1 && has_l) ml *= 0.5;
        side = 1;
      }
      if (!has_l) {
        x -= std::isfinite(m) ? m + 1e-6 : 1.0;
      } else if (!has_h) {
        x -= m - 1e-6;
      } else if (std::isfinite(mh)) {
        x = xl - ml * (xh - xl) / (mh - ml);
        if (!(x > xl && x < xh)) x = 0.5 * (xl + xh);
      } else {
        x = 0.5 * (xl + xh);
      }
      if (has_l && has_h && (x <= xl || x >= xh)) break;
      m = miss(x);
    }
    if (!std::isfinite(m)) throw Error(ErrorKind::NoConvergence, "tail matching failed");
    const double x1 = x;
    VR = std::exp(x1);
    if (VR <= floor) break;
    R += std::log(VR / (0.5 * floor)) / kappa0 + 1.0 / kappa0;
  }

  BoundState bs;
  bs.k = k;
  bs.zeta0 = zs;
  RadialProfile& p = bs.profile;
  p.N = N;
  p.r.assign(tr.r.begin(), tr.r.begin() + static_cast<std::ptrdiff_t>(j + 1));
  p.v.assign(tr.v.begin(), tr.v.begin() + static_cast<std::ptrdiff_t>(j + 1));
  p.dv.assign(tr.dv.begin(), tr.dv.begin() + static_cast<std::ptrdiff_t>(j + 1));
  for (std::size_t i = tail.rho.size(); i-- > 0;) {
    const double r = R - tail.rho[i];
    if (r <= rj + 1e-3 * h_max) continue;
    p.r.push_back(r);
    p.v.push_back(sgn * tail.y[i]);
    p.dv.push_back(-sgn * tail.dy[i]);
  }
  const double dv_tail = -sgn * tail.dy.back();
  bs.join_mismatch = std::fabs(dv_tail - tr.dv[j]) / std::fabs(tr.dv[j]);

  p.validate(cfg.tail_cutoff);
  bs.nodes = p.sign_changes();
  if (bs.nodes != k) {
    throw Error(ErrorKind::NoConvergence, "converged profile has " + std::to_string(bs.nodes) +
                                              " nodes, expected " + std::to_string(k));
  }
  bs.D = dirichlet_norm_sq(p);
  bs.S = action(p, nl);
  bs.pohozaev_residual = pohozaev_residual_q(bs, nl);
  bs.decay_rate = tail_decay_rate(p);
  return bs;
}

BoundState closed_form_1d(const PowerNonlinearity& nl, const ShootingConfig& cfg) {
  cfg.validate();
  const AssumptionReport report = check_berestycki_lions(nl, 1);
  if (!report.all_ok()) throw Error(ErrorKind::Precondition, "assumptions fail for N = 1");
  const double zeta = report.zeta;
  const double f0 = nl.f(zeta), df0 = nl.df(zeta), F0 = nl.F(zeta);
  const double omega = nl.omega();
  const double scale = core_scale(nl, zeta);

  // -2F(zeta - eps), expanded near the turning point where F cancels.
  auto G = [&](double eps) {
    if (eps < 1e-6 * zeta) return 2.0 * f0 * eps - df0 * eps * eps;
    return -2.0 * (nl.F(zeta - eps) - F0);
  };

  BoundState bs;
  RadialProfile& p = bs.profile;
  p.N = 1;
  p.r.push_back(0.0);
  p.v.push_back(zeta);
  p.dv.push_back(0.0);

  // Core: v = zeta - y^2, dx/dy = 2y / sqrt(-2F(v)) is regular at y = 0.
  const double y_half = std::sqrt(0.5 * zeta);
  auto core = [&](const State<1>&, State<1>& d, double y) {
    const double e = y * y;
    d[0] = e < 1e-6 * zeta ? 2.0 / std::sqrt(2.0 * f0 - df0 * e) : 2.0 * y / std::sqrt(G(e));
  };
  StepControl ctl;
  ctl.rtol = cfg.integrator_rel_tol;
  ctl.atol = 1e-6 * cfg.integrator_rel_tol / scale;
  ctl.h_max = 0.005 * std::sqrt(2.0 * f0) / scale;
  ctl.h_init = 1e-3 * ctl.h_max;
  State<1> xs{0.0};
  detail::drive<1>(core, xs, 0.0, y_half, ctl, [&](double y, State<1>& s) {
    const double e = y * y;
    p.r.push_back(s[0]);
    p.v.push_back(zeta - e);
    p.dv.push_back(-std::sqrt(G(e)));
    return true;
  });

  // Tail: dv/dx = -sqrt(-2F(v)), stable in the outward direction.
  const double stop = 0.1 * cfg.tail_cutoff * zeta;
  auto tail = [&](const State<1>& s, State<1>& d, double) {
    d[0] = -std::sqrt(std::max(-2.0 * nl.F(s[0]), 0.0));
  };
  ctl.atol = 1e-3 * cfg.integrator_rel_tol * stop;
  ctl.h_max = 0.02 / scale;
  ctl.h_init = ctl.h_max;
  State<1> vs{p.v.back()};
  const double x_half = p.r.back();
  bool reached = false;
  detail::drive<1>(tail, vs, x_half, x_half + 1e4 / std::sqrt(omega), ctl,
                   [&](double x, State<1>& s) {
                     p.r.push_back(x);
                     p.v.push_back(s[0]);
                     p.dv.push_back(-std::sqrt(std::max(-2.0 * nl.F(s[0]), 0.0)));
                     reached = s[0] <= stop;
                     return !reached;
                   });
  if (!reached) throw Error(ErrorKind::Inconclusive, "1D tail did not decay");

  p.validate(cfg.tail_cutoff);
  bs.k = 0;
  bs.nodes = p.sign_changes();
  bs.zeta0 = zeta;
  bs.D = dirichlet_norm_sq(p);
  bs.S = action(p, nl);
  bs.pohozaev_residual = pohozaev_residual_q(bs, nl);
  bs.decay_rate = tail_decay_rate(p);
  bs.join_mismatch = 0.0;
  return bs;
}

BoundState solve_bound_state(const PowerNonlinearity& nl, int N, int k, const ShootingConfig& cfg) {
  if (N == 1) {
    if (k != 0) {
      throw Error(ErrorKind::NotApplicable, "N = 1 has no sign-changing bound states");
    }
    return closed_form_1d(nl, cfg);
  }
  return find_bound_state(nl, N, k, cfg);
}

double dirichlet_norm_sq(const RadialProfile& p) {
  double sum = kernels::dirichlet_integral(kernels::view_of(p));
  const double kappa = last_node_kappa(p);
  if (kappa > 0.0) {
    const double dL = p.dv.back();
    sum += dL * dL * radial_pow(p.r.back(), p.N) / (2.0 * kappa);
  }
  return sphere_measure(p.N) * sum;
}

double potential_term(const RadialProfile& p, const PowerNonlinearity& nl) {
  double sum = kernels::potential_integral(kernels::view_of(p), nl);
  const double kappa = last_node_kappa(p);
  if (kappa > 0.0) {
    sum += nl.F(p.v.back()) * radial_pow(p.r.back(), p.N) / (2.0 * kappa);
  }
  return sphere_measure(p.N) * sum;
}

double action(const RadialProfile& p, const PowerNonlinearity& nl) {
  return 0.5 * dirichlet_norm_sq(p) - potential_term(p, nl);
}

double pohozaev_residual_q(const BoundState& bs, const PowerNonlinearity&) {
  return bs.S - bs.D / bs.profile.N;
}

double tail_decay_rate(const RadialProfile& p) {
  if (p.size() < 2 || p.v.back() == 0.0) {
    throw Error(ErrorKind::TailTooShort, "profile has no decaying tail");
  }
  const double last = std::fabs(p.v.back());
  const double half_n = 0.5 * (p.N - 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = p.size(); i-- > 1;) {
    const double a = std::fabs(p.v[i]);
    if (a > 10.0 * last || a == 0.0) break;
    const double x = p.r[i];
    const double y = -std::log(a) - half_n * std::log(x);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 8) {
    throw Error(ErrorKind::TailTooShort,
                "only " + std::to_string(count) + " points in the last decade");
  }
  const double mx = sx / count, my = sy / count;
  return (sxy / count - mx * my) / (sxx / count - mx * mx);
}

nlohmann::json BoundState::to_json() const {
  return {{"N", profile.N},
          {"k", k},
          {"nodes", nodes},
          {"zeta0", zeta0},
          {"D", D},
          {"S", S},
          {"pohozaev_residual", pohozaev_residual},
          {"decay_rate", decay_rate},
          {"join_mismatch", join_mismatch},
          {"points", profile.size()}};
}

}  // namespace katlas
