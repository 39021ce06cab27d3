#pragma once

#include <vector>

#include <json.hpp>

#include "katlas/nonlinearity.hpp"
#include "katlas/profile.hpp"

namespace katlas {

struct ShootingConfig {
  double bisection_rel_tol = 1e-12;
  double tail_cutoff = 1e-10;
  double integrator_rel_tol = 1e-10;
  int max_bisection_iters = 200;
  double r_max_initial = 50.0;  ///< in units of 1/sqrt(omega)
  int r_max_doublings = 12;

  void validate() const;
  nlohmann::json to_json() const;
  static ShootingConfig from_json(const nlohmann::json& j);
};

enum class ShotKind { CrossesZero, TurnsBack, Decays };

const char* to_string(ShotKind kind);

/// Samples of one outward shot. w = dv/dzeta0 is carried along so callers
/// can tell how far the trajectory is from a decaying one.
struct Trajectory {
  ShotKind kind = ShotKind::TurnsBack;
  double zeta0 = 0.0;
  double r_event = 0.0;
  int crossings = 0;  ///< sign changes before the event
  /// First-order estimate of zeta0 minus the nearest decaying height, taken
  /// at the event when |v| is small; NaN otherwise.
  double offset = 0.0;
  std::vector<double> r, v, dv, w, dw;
};

/// Radial shot from v(0) = zeta0. Stops at the (max_crossings + 1)-th zero
/// crossing, at a local minimum of |v| that does not reach zero, or when the
/// trajectory is certified as decaying.
Trajectory shoot(const PowerNonlinearity& nl, int N, double zeta0, const ShootingConfig& cfg,
                 int max_crossings = 0);

struct BoundState {
  RadialProfile profile;
  int k = 0;
  int nodes = 0;
  double zeta0 = 0.0;
  double D = 0.0;
  double S = 0.0;
  double pohozaev_residual = 0.0;
  double decay_rate = 0.0;
  double join_mismatch = 0.0;  ///< relative jump of v' where the inward tail is attached

  /// Metadata only; the profile travels as CSV.
  nlohmann::json to_json() const;
};

BoundState find_bound_state(const PowerNonlinearity& nl, int N, int k, const ShootingConfig& cfg);

/// N = 1 positive solution through the first integral (v')^2/2 + F(v) = 0.
BoundState closed_form_1d(const PowerNonlinearity& nl, const ShootingConfig& cfg);

/// closed_form_1d for N = 1 (k must be 0), find_bound_state otherwise.
BoundState solve_bound_state(const PowerNonlinearity& nl, int N, int k, const ShootingConfig& cfg);

/// sigma_N times the integral of v'^2 r^(N-1), with the exponential tail
/// past the last node added analytically.
double dirichlet_norm_sq(const RadialProfile& p);

/// sigma_N times the integral of F(v) r^(N-1), tail included.
double potential_term(const RadialProfile& p, const PowerNonlinearity& nl);

double action(const RadialProfile& p, const PowerNonlinearity& nl);

/// S - D/N.
double pohozaev_residual_q(const BoundState& bs, const PowerNonlinearity& nl);

/// Slope of -log|v| - ((N-1)/2) log r against r over the last decade of the
/// grid. Throws TailTooShort with fewer than 8 points there.
double tail_decay_rate(const RadialProfile& p);

}  // namespace katlas
