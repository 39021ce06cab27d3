#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace katlas {

struct KirchhoffParams {
  double a = 0.0;
  double b = 1.0;
  int N = 3;

  void validate() const;
  nlohmann::json to_json() const;
};

enum class BranchLabel { Unique, Lower, Upper, Tangent, ContinuumFree };

const char* to_string(BranchLabel label);
BranchLabel branch_label_from_string(const std::string& s);

/// A positive root of h(t) = s. ContinuumFree carries no meaningful t.
struct BranchRoot {
  double t = 0.0;
  BranchLabel label = BranchLabel::Unique;
};

struct RootSet {
  std::vector<BranchRoot> roots;
  std::string diagnostic;
};

/// Fields present for N >= 5 with a > 0 (t_star, t_dstar, s_star) or N = 1
/// with a > 0 (tau, s_tau).
struct CriticalScales {
  std::optional<double> t_star;
  std::optional<double> t_dstar;
  std::optional<double> s_star;
  std::optional<double> tau;
  std::optional<double> s_tau;

  nlohmann::json to_json() const;
};

struct Thresholds {
  std::optional<double> b_star;
  std::optional<double> b_dstar;
  std::optional<double> a_star;
  std::optional<double> a_dstar;

  nlohmann::json to_json() const;
};

enum class ExistenceClass { NoBranch, UniqueBranch, TwoBranches, TangentBranch, Continuum };

const char* to_string(ExistenceClass c);

/// h(t) = t^(N-4) - a t^(N-2).
double h_eval(double t, double a, int N);

/// Positive roots of h(t) = s relevant to lifting (s > 0). Lower/Upper are
/// returned in that order.
RootSet h_roots(double s, double a, int N);

CriticalScales critical_scales(double a, int N);

/// Energy of a lifted solution with scale t:
/// (1 - a t^2)(4 - N(1 - a t^2)) / (4 b N t^4).
double g_energy(double t, double a, double b, int N);

/// N >= 5: b_star = s_star / D1 and b_dstar = h(t_dstar) / D1.
/// N = 4: b_star = 1 / D1 only.
Thresholds thresholds_b(double a, int N, double D1);

/// Dual thresholds in a for fixed b (N >= 5).
Thresholds thresholds_a(double b, int N, double D1);

/// Largest b for the interleaved Lower/Upper sign pattern: (4/N)((N-4)/(N a))^((N-4)/2) / D.
double b_tilde(double a, int N, double D);

/// N = 3 closed forms for the unique scale and the lifted energy.
double psi_n3(double a, double b, double D);
double phi_n3(double a, double b, double D);

/// N = 4, a > 0: scale and energy, absent when b D >= 1.
std::optional<double> t_n4(double a, double b, double D);
std::optional<double> phi_n4(double a, double b, double D);

/// Energy of the unique lift when a = 0, N >= 5; always negative.
double beta_degenerate(double b, int N, double D);

struct LevelRoots {
  double tau_c;
  double tau_up_c;
  double gamma;
};

/// The two solutions of g(t) = c for 0 < c <= c_star (N >= 5, a > 0).
LevelRoots level_roots_g(double c, double a, double b, int N);

/// c_star = g(t_star) = a^2 / (N (N-4) b).
double c_star(double a, double b, int N);

ExistenceClass classify_existence(double a, double b, int N, double D);

struct LiftCount {
  int k;
  int roots;
};

std::vector<LiftCount> count_liftable(double a, double b, int N, const std::vector<double>& D_list);

}  // namespace katlas
