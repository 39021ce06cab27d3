#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "katlas/groundstate.hpp"
#include "katlas/nonlinearity.hpp"
#include "katlas/rescale.hpp"

namespace katlas {

/// u(x) = v(t x) for a bound state v. In the N = 4, a = 0 continuum t is the
/// free dilation lambda.
struct KirchhoffSolution {
  int k = 0;
  double D_v = 0.0;
  double t = 0.0;
  BranchLabel label = BranchLabel::Unique;
  RadialProfile profile_u;
  double D_u = 0.0;
  double phi_formula = 0.0;
  double phi_quadrature = 0.0;
  double residual_pde = 0.0;
  double residual_pohozaev = 0.0;  ///< normalised, see pohozaev_scale

  nlohmann::json to_json() const;
};

/// Builds and measures the rescaled profile for one given t; no check that t
/// actually solves h(t) = b D_v.
KirchhoffSolution lift_at(const BoundState& bs, const PowerNonlinearity& nl,
                          const KirchhoffParams& params, double t, BranchLabel label);

/// One solution per root of h(t) = b D_v. Throws ContinuumCase when the
/// roots form the N = 4, a = 0 continuum.
std::vector<KirchhoffSolution> lift(const BoundState& bs, const PowerNonlinearity& nl,
                                    const KirchhoffParams& params);

/// (a/2) D_u + (b/4) D_u^2 - integral of F(u).
double energy_quadrature(const RadialProfile& u, const PowerNonlinearity& nl,
                         const KirchhoffParams& params);

/// Relative grid L2 norm of (a + b D_u) Delta u + f(u).
double kirchhoff_residual(const KirchhoffSolution& sol, const PowerNonlinearity& nl,
                          const KirchhoffParams& params);

/// (N-2)/(2N) (a D_u + b D_u^2) - integral of F(u), signed and unscaled.
double pohozaev_residual_p(const KirchhoffSolution& sol, const PowerNonlinearity& nl,
                           const KirchhoffParams& params);

/// max(a D_u + b D_u^2, |integral of F(u)|).
double pohozaev_scale(const KirchhoffSolution& sol, const PowerNonlinearity& nl,
                      const KirchhoffParams& params);

/// u_lambda = v(lambda x) on the N = 4, a = 0, b D_v = 1 continuum.
KirchhoffSolution continuum_family(const BoundState& bs, double lambda, const PowerNonlinearity& nl,
                                   const KirchhoffParams& params);

struct GateReport {
  double scaling_error = 0.0;      ///< |D_u - t^(2-N) D_v| / D_u
  double coefficient_error = 0.0;  ///< |(a + b D_u) t^2 - 1|
  double energy_gap = 0.0;         ///< |phi_formula - phi_quadrature| / max(1, |phi_formula|)
  std::vector<std::string> failures;

  bool pass() const noexcept { return failures.empty(); }
};

/// Scaling identities, residual gates and dual-path energy agreement.
GateReport check_gates(const KirchhoffSolution& sol, const KirchhoffParams& params);

struct AtlasEntry {
  int k = 0;
  BoundState state;
  ExistenceClass existence = ExistenceClass::NoBranch;
  std::vector<KirchhoffSolution> branches;
  std::vector<std::string> failures;
};

struct FailedState {
  int k = 0;
  std::string error;
};

struct GroundChoice {
  std::size_t entry = 0;
  std::size_t branch = 0;
  int k = 0;
  BranchLabel label = BranchLabel::Unique;
  double phi = 0.0;
  bool matches_theory = false;
};

struct PatternCheck {
  bool applicable = false;
  double b_tilde = 0.0;
  bool holds = false;
  std::string detail;
};

struct SolutionAtlas {
  SolutionAtlas(KirchhoffParams p, PowerNonlinearity n, ShootingConfig c)
      : params(p), nl(std::move(n)), cfg(c) {}

  KirchhoffParams params;
  PowerNonlinearity nl;
  ShootingConfig cfg;
  std::vector<AtlasEntry> entries;  ///< sorted by D
  std::vector<FailedState> failed;
  Thresholds thresholds;
  CriticalScales scales;
  std::optional<GroundChoice> ground_state;
  std::vector<double> witness_critical_values;
  PatternCheck pattern;
  std::vector<std::string> certified;
  std::vector<double> lambdas;
  nlohmann::json timing = nlohmann::json::object();

  std::size_t branch_count() const;
  /// The report minus timing when with_timing is false.
  nlohmann::json to_json(bool with_timing = true) const;
};

struct StateResult {
  int k = 0;
  std::optional<BoundState> state;
  std::string error;
  bool from_cache = false;
};

/// Solves k = 0 .. k_max - 1 concurrently. Failures are recorded per k.
std::vector<StateResult> solve_states(const PowerNonlinearity& nl, int N, int k_max,
                                      const ShootingConfig& cfg,
                                      const std::optional<std::filesystem::path>& cache_dir);

struct AtlasOptions {
  std::optional<std::filesystem::path> cache_dir;
  std::vector<double> lambdas{0.5, 1.0, 2.0};
};

/// Lifts already-solved states and attaches thresholds, classifications and
/// the ground-state choice.
SolutionAtlas assemble_atlas(const PowerNonlinearity& nl, const KirchhoffParams& params,
                             const std::vector<StateResult>& states, const ShootingConfig& cfg,
                             const std::vector<double>& lambdas);

SolutionAtlas build_atlas(const PowerNonlinearity& nl, const KirchhoffParams& params, int k_max,
                          const ShootingConfig& cfg, const AtlasOptions& opts = {});

/// Minimal-energy branch over the whole atlas.
GroundChoice ground_state_select(const SolutionAtlas& atlas);

struct WitnessPair {
  KirchhoffSolution u1;  ///< Lower branch
  KirchhoffSolution u2;  ///< Upper branch
};

/// Two positive solutions lifted from the same ground state; needs N >= 5,
/// a > 0 and b strictly below b_star.
WitnessPair uniqueness_breaking_witness(const BoundState& ground, const PowerNonlinearity& nl,
                                        const KirchhoffParams& params);

WitnessPair uniqueness_breaking_witness(const PowerNonlinearity& nl, const KirchhoffParams& params,
                                        const ShootingConfig& cfg);

}  // namespace katlas
