#include "katlas/kirchhoff.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <omp.h>

#include "katlas/cache.hpp"
#include "katlas/error.hpp"
#include "katlas/kernels.hpp"

namespace katlas {

namespace {

std::string fmt(double x) { return format_double(x); }

}  // namespace

nlohmann::json KirchhoffSolution::to_json() const {
  return {{"k", k},
          {"label", to_string(label)},
          {"t", t},
          {"D_v", D_v},
          {"D_u", D_u},
          {"phi_formula", phi_formula},
          {"phi_quadrature", phi_quadrature},
          {"residual_pde", residual_pde},
          {"residual_pohozaev", residual_pohozaev}};
}

KirchhoffSolution lift_at(const BoundState& bs, const PowerNonlinearity& nl,
                          const KirchhoffParams& params, double t, BranchLabel label) {
  params.validate();
  if (!(std::isfinite(t) && t > 0.0)) {
    throw Error(ErrorKind::Precondition, "scale t must be positive and finite");
  }
  if (bs.profile.N != params.N) {
    throw Error(ErrorKind::Precondition, "bound state and parameters disagree on N");
  }
  KirchhoffSolution sol;
  sol.k = bs.k;
  sol.D_v = bs.D;
  sol.t = t;
  sol.label = label;
  RadialProfile& u = sol.profile_u;
  u.N = bs.profile.N;
  u.r.reserve(bs.profile.size());
  u.dv.reserve(bs.profile.size());
  for (double r : bs.profile.r) u.r.push_back(r / t);
  u.v = bs.profile.v;
  for (double d : bs.profile.dv) u.dv.push_back(t * d);

  sol.D_u = dirichlet_norm_sq(u);
  sol.phi_formula = g_energy(t, params.a, params.b, params.N);
  sol.phi_quadrature = energy_quadrature(u, nl, params);
  sol.residual_pde = kirchhoff_residual(sol, nl, params);
  const double scale = pohozaev_scale(sol, nl, params);
  const double raw = pohozaev_residual_p(sol, nl, params);
  sol.residual_pohozaev = scale > 0.0 ? raw / scale : raw;
  return sol;
}

std::vector<KirchhoffSolution> lift(const BoundState& bs, const PowerNonlinearity& nl,
                                    const KirchhoffParams& params) {
  params.validate();
  const RootSet rs = h_roots(params.b * bs.D, params.a, params.N);
  std::vector<KirchhoffSolution> out;
  for (const BranchRoot& root : rs.roots) {
    if (root.label == BranchLabel::ContinuumFree) {
      throw Error(ErrorKind::ContinuumCase, "b D = 1 with N = 4, a = 0: use continuum_family");
    }
    out.push_back(lift_at(bs, nl, params, root.t, root.label));
  }
  return out;
}

double energy_quadrature(const RadialProfile& u, const PowerNonlinearity& nl,
                         const KirchhoffParams& params) {
  if (u.size() < 2) return 0.0;
  const double D = dirichlet_norm_sq(u);
  return 0.5 * params.a * D + 0.25 * params.b * D * D - potential_term(u, nl);
}

double kirchhoff_residual(const KirchhoffSolution& sol, const PowerNonlinearity& nl,
                          const KirchhoffParams& params) {
  const double coefficient = params.a + params.b * sol.D_u;
  const kernels::ResidualNorms n =
      kernels::residual_norms(kernels::view_of(sol.profile_u), coefficient, nl);
  if (n.source_sq == 0.0) return n.residual_sq == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(n.residual_sq / n.source_sq);
}

double pohozaev_residual_p(const KirchhoffSolution& sol, const PowerNonlinearity& nl,
                           const KirchhoffParams& params) {
  const int N = params.N;
  const double D = sol.D_u;
  return (N - 2.0) / (2.0 * N) * (params.a * D + params.b * D * D) - potential_term(sol.profile_u, nl);
}

double pohozaev_scale(const KirchhoffSolution& sol, const PowerNonlinearity& nl,
                      const KirchhoffParams& params) {
  const double D = sol.D_u;
  return std::max(params.a * D + params.b * D * D, std::fabs(potential_term(sol.profile_u, nl)));
}

KirchhoffSolution continuum_family(const BoundState& bs, double lambda, const PowerNonlinearity& nl,
                                   const KirchhoffParams& params) {
  params.validate();
  if (params.N != 4 || params.a != 0.0 || std::fabs(params.b * bs.D - 1.0) > 1e-10) {
    throw Error(ErrorKind::NotOnContinuum,
                "continuum needs N = 4, a = 0 and b D = 1; got b D = " + fmt(params.b * bs.D));
  }
  if (!(std::isfinite(lambda) && lambda > 0.0)) {
    throw Error(ErrorKind::Precondition, "lambda must be positive");
  }
  return lift_at(bs, nl, params, lambda, BranchLabel::ContinuumFree);
}

GateReport check_gates(const KirchhoffSolution& sol, const KirchhoffParams& params) {
  GateReport g;
  const int N = params.N;
  const double t = sol.t;
  const double expected_D = std::pow(t, 2.0 - N) * sol.D_v;
  g.scaling_error = std::fabs(sol.D_u - expected_D) / std::fabs(sol.D_u);
  g.coefficient_error = std::fabs((params.a + params.b * sol.D_u) * t * t - 1.0);
  g.energy_gap = std::fabs(sol.phi_formula - sol.phi_quadrature) /
                 std::max(1.0, std::fabs(sol.phi_formula));
  auto fail = [&](bool bad, const std::string& what) {
    if (bad) g.failures.push_back(what);
  };
  fail(!(g.scaling_error <= 1e-10), "D_u scaling error " + fmt(g.scaling_error));
  fail(!(g.coefficient_error <= 1e-8), "a + b D_u vs t^-2 error " + fmt(g.coefficient_error));
  fail(!(sol.residual_pde <= 1e-6), "PDE residual " + fmt(sol.residual_pde));
  fail(!(std::fabs(sol.residual_pohozaev) <= 1e-5),
       "Pohozaev residual " + fmt(sol.residual_pohozaev));
  fail(!(g.energy_gap <= 1e-4), "energy gap " + fmt(g.energy_gap));
  if (sol.label == BranchLabel::ContinuumFree) {
    fail(!(std::fabs(sol.phi_quadrature) <= 1e-6),
         "continuum energy " + fmt(sol.phi_quadrature));
  }
  return g;
}

std::size_t SolutionAtlas::branch_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.branches.size();
  return n;
}

nlohmann::json SolutionAtlas::to_json(bool with_timing) const {
  nlohmann::json j;
  j["params"] = params.to_json();
  j["nonlinearity"] = nl.to_json();
  j["solver"] = cfg.to_json();
  j["thresholds"] = thresholds.to_json();
  j["scales"] = scales.to_json();
  nlohmann::json es = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json ej = e.state.to_json();
    ej["existence"] = to_string(e.existence);
    nlohmann::json bj = nlohmann::json::array();
    for (const auto& b : e.branches) bj.push_back(b.to_json());
    ej["branches"] = bj;
    ej["failures"] = e.failures;
    es.push_back(ej);
  }
  j["entries"] = es;
  nlohmann::json fj = nlohmann::json::array();
  for (const auto& f : failed) fj.push_back({{"k", f.k}, {"error", f.error}});
  j["failed"] = fj;
  if (ground_state) {
    j["ground_state"] = {{"k", ground_state->k},
                         {"label", to_string(ground_state->label)},
                         {"phi", ground_state->phi},
                         {"matches_theory", ground_state->matches_theory}};
  } else {
    j["ground_state"] = nullptr;
  }
  j["witness_critical_values"] = witness_critical_values;
  j["sign_pattern"] = {{"applicable", pattern.applicable},
                         {"b_tilde", pattern.b_tilde},
                         {"holds", pattern.holds},
                         {"detail", pattern.detail}};
  j["certified"] = certified;
  if (params.N == 4 && params.a == 0.0) j["continuum_lambdas"] = lambdas;
  if (with_timing) j["timing"] = timing;
  return j;
}

std::vector<StateResult> solve_states(const PowerNonlinearity& nl, int N, int k_max,
                                      const ShootingConfig& cfg,
                                      const std::optional<std::filesystem::path>& cache_dir) {
  if (k_max < 1) throw Error(ErrorKind::Precondition, "k_max must be at least 1");
  std::vector<StateResult> out(static_cast<std::size_t>(k_max));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < k_max; ++k) {
    StateResult& res = out[static_cast<std::size_t>(k)];
    res.k = k;
    try {
      std::string key;
      if (cache_dir) {
        key = cache::key(nl, N, k, cfg);
        if (auto hit = cache::load(*cache_dir, key, N)) {
          res.state = std::move(hit);
          res.from_cache = true;
          continue;
        }
      }
      res.state = solve_bound_state(nl, N, k, cfg);
      if (cache_dir) {
        try {
          cache::store(*cache_dir, key, *res.state);
        } catch (const Error&) {
          // an unwritable cache only costs a re-solve next time
        }
      }
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  }
  return out;
}

namespace {

void attach_thresholds(SolutionAtlas& atlas, double D1) {
  const KirchhoffParams& p = atlas.params;
  try {
    if (p.N == 4 || (p.N >= 5 && p.a > 0.0)) atlas.thresholds = thresholds_b(p.a, p.N, D1);
    if (p.N >= 5) {
      const Thresholds ta = thresholds_a(p.b, p.N, D1);
      atlas.thresholds.a_star = ta.a_star;
      atlas.thresholds.a_dstar = ta.a_dstar;
    }
  } catch (const Error&) {
  }
  try {
    atlas.scales = critical_scales(p.a, p.N);
  } catch (const Error&) {
  }
}

void check_pattern(SolutionAtlas& atlas) {
  const KirchhoffParams& p = atlas.params;
  PatternCheck& pc = atlas.pattern;
  if (p.N < 5 || p.a <= 0.0 || atlas.entries.empty()) {
    pc.detail = "needs N >= 5 and a > 0";
    return;
  }
  pc.b_tilde = b_tilde(p.a, p.N, atlas.entries.back().state.D);
  if (!(p.b < pc.b_tilde)) {
    pc.detail = "b is not below b_tilde of the largest computed D";
    return;
  }
  pc.applicable = true;
  std::vector<double> t_low, t_up, g_low, g_up;
  for (const auto& e : atlas.entries) {
    for (const auto& b : e.branches) {
      if (b.label == BranchLabel::Lower) {
        t_low.push_back(b.t);
        g_low.push_back(b.phi_formula);
      } else if (b.label == BranchLabel::Upper) {
        t_up.push_back(b.t);
        g_up.push_back(b.phi_formula);
      }
    }
  }
  const std::size_t n = atlas.entries.size();
  if (t_low.size() != n || t_up.size() != n) {
    pc.detail = "some entry lacks a Lower/Upper pair";
    return;
  }
  const double ts = *atlas.scales.t_star, tds = *atlas.scales.t_dstar;
  bool ok = t_low.back() < tds && tds < ts && ts < t_up.back() && t_up.front() < 1.0 / std::sqrt(p.a);
  for (std::size_t j = 1; j < n; ++j) {
    ok = ok && t_low[j - 1] < t_low[j] && t_up[j] < t_up[j - 1];
    ok = ok && g_low[j - 1] < g_low[j] && g_up[j - 1] < g_up[j];
  }
  ok = ok && g_low.back() < 0.0 && 0.0 < g_up.front();
  pc.holds = ok;
  pc.detail = ok ? "t_1 < ... < t_k < t** < t* < s_k < ... < s_1 and "
                   "g(t_1) < ... < g(t_k) < 0 < g(s_1) < ... < g(s_k)"
                 : "ordering violated";
}

void certify(SolutionAtlas& atlas) {
  const KirchhoffParams& p = atlas.params;
  const Thresholds& th = atlas.thresholds;
  if (p.N >= 5 && p.a > 0.0 && th.b_star) {
    if (p.b > *th.b_star) {
      atlas.certified.push_back("b > b_star = " + fmt(*th.b_star) +
                                ": no nontrivial solution (every solution has D >= D of the "
                                "ground state)");
    } else if (th.b_dstar && p.b < *th.b_dstar) {
      atlas.certified.push_back("b < b_dstar = " + fmt(*th.b_dstar) +
                                ": the ground-state Lower branch has negative energy");
    }
  }
  if (p.N == 4 && p.a > 0.0 && th.b_star && p.b >= *th.b_star) {
    atlas.certified.push_back("b >= 1/D1 = " + fmt(*th.b_star) + ": no nontrivial solution");
  }
}

}  // namespace

SolutionAtlas assemble_atlas(const PowerNonlinearity& nl, const KirchhoffParams& params,
                             const std::vector<StateResult>& states, const ShootingConfig& cfg,
                             const std::vector<double>& lambdas) {
  params.validate();
  SolutionAtlas atlas{params, nl, cfg};
  atlas.lambdas = lambdas;
  for (const auto& s : states) {
    if (s.state) {
      AtlasEntry e;
      e.k = s.k;
      e.state = *s.state;
      atlas.entries.push_back(std::move(e));
    } else {
      atlas.failed.push_back({s.k, s.error});
    }
  }
  std::stable_sort(atlas.entries.begin(), atlas.entries.end(),
                   [](const AtlasEntry& x, const AtlasEntry& y) { return x.state.D < y.state.D; });
  if (atlas.entries.empty()) return atlas;

  attach_thresholds(atlas, atlas.entries.front().state.D);

  for (auto& e : atlas.entries) {
    e.existence = classify_existence(params.a, params.b, params.N, e.state.D);
    try {
      e.branches = lift(e.state, nl, params);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::ContinuumCase) {
        e.failures.push_back(err.what());
        continue;
      }
      for (double lambda : lambdas) e.branches.push_back(continuum_family(e.state, lambda, nl, params));
    }
    for (const auto& b : e.branches) {
      const GateReport g = check_gates(b, params);
      for (const auto& f : g.failures) e.failures.push_back(std::string(to_string(b.label)) + ": " + f);
    }
  }

  for (const auto& e : atlas.entries) {
    for (const auto& b : e.branches) atlas.witness_critical_values.push_back(b.phi_formula);
  }
  std::sort(atlas.witness_critical_values.begin(), atlas.witness_critical_values.end());
  atlas.witness_critical_values.erase(
      std::unique(atlas.witness_critical_values.begin(), atlas.witness_critical_values.end()),
      atlas.witness_critical_values.end());

  if (atlas.branch_count() > 0) atlas.ground_state = ground_state_select(atlas);
  check_pattern(atlas);
  certify(atlas);
  return atlas;
}

SolutionAtlas build_atlas(const PowerNonlinearity& nl, const KirchhoffParams& params, int k_max,
                          const ShootingConfig& cfg, const AtlasOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<StateResult> states = solve_states(nl, params.N, k_max, cfg, opts.cache_dir);
  const auto solved = std::chrono::steady_clock::now();
  SolutionAtlas atlas = assemble_atlas(nl, params, states, cfg, opts.lambdas);
  const auto done = std::chrono::steady_clock::now();
  nlohmann::json hits = nlohmann::json::array();
  for (const auto& s : states) {
    if (s.from_cache) hits.push_back(s.k);
  }
  atlas.timing = {{"solve_seconds", std::chrono::duration<double>(solved - start).count()},
                  {"assemble_seconds", std::chrono::duration<double>(done - solved).count()},
                  {"threads", omp_get_max_threads()},
                  {"cache_hits", hits}};
  return atlas;
}

GroundChoice ground_state_select(const SolutionAtlas& atlas) {
  std::optional<GroundChoice> best;
  for (std::size_t i = 0; i < atlas.entries.size(); ++i) {
    const auto& e = atlas.entries[i];
    for (std::size_t j = 0; j < e.branches.size(); ++j) {
      const double phi = e.branches[j].phi_formula;
      if (!best || phi < best->phi) {
        best = GroundChoice{i, j, e.k, e.branches[j].label, phi, false};
      }
    }
  }
  if (!best) throw Error(ErrorKind::EmptyAtlas, "no branch to select from");
  const KirchhoffParams& p = atlas.params;
  if (best->label == BranchLabel::ContinuumFree) {
    best->matches_theory = true;
  } else if (p.N >= 5 && p.a > 0.0) {
    best->matches_theory = best->entry == 0 &&
                           (best->label == BranchLabel::Lower || best->label == BranchLabel::Tangent);
  } else {
    best->matches_theory = best->entry == 0;
  }
  return *best;
}

WitnessPair uniqueness_breaking_witness(const BoundState& ground, const PowerNonlinearity& nl,
                                        const KirchhoffParams& params) {
  params.validate();
  if (params.N < 5 || params.a <= 0.0) {
    throw Error(ErrorKind::Precondition, "uniqueness breaking needs N >= 5 and a > 0");
  }
  const Thresholds th = thresholds_b(params.a, params.N, ground.D);
  if (params.b >= *th.b_star) {
    throw Error(ErrorKind::OutOfRegime, "b = " + fmt(params.b) + " is not below b_star = " +
                                            fmt(*th.b_star));
  }
  const RootSet rs = h_roots(params.b * ground.D, params.a, params.N);
  if (rs.roots.size() != 2) {
    throw Error(ErrorKind::OutOfRegime, "b is within tangency tolerance of b_star");
  }
  return {lift_at(ground, nl, params, rs.roots[0].t, rs.roots[0].label),
          lift_at(ground, nl, params, rs.roots[1].t, rs.roots[1].label)};
}

WitnessPair uniqueness_breaking_witness(const PowerNonlinearity& nl, const KirchhoffParams& params,
                                        const ShootingConfig& cfg) {
  return uniqueness_breaking_witness(find_bound_state(nl, params.N, 0, cfg), nl, params);
}

}  // namespace katlas
