#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "katlas/groundstate.hpp"
#include "katlas/nonlinearity.hpp"

namespace katlas::cli {

/// b given as a multiple of a threshold computed from the solved states.
/// reference: b_star, b_dstar, b_mid (midpoint of the two), b_tilde, inv_D1.
struct BScale {
  std::string reference = "b_star";
  double factor = 1.0;
};

/// Sweep grid; min and max are multiples of relative_to
/// (absolute, b_star or b_dstar).
struct BSweep {
  double min = 0.0;
  double max = 0.0;
  int count = 50;
  bool log = false;
  std::string relative_to = "absolute";
};

struct RunConfig {
  nlohmann::json nonlinearity;
  int N = 3;
  double a = 0.0;
  std::optional<double> b;
  std::optional<BScale> b_scale;
  std::optional<BSweep> b_sweep;
  int k_max = 1;
  ShootingConfig solver;
  std::filesystem::path out = "katlas-out";
  std::optional<std::filesystem::path> cache;
  bool use_cache = true;
  std::vector<double> lambdas{0.5, 1.0, 2.0};

  PowerNonlinearity nl() const;
  /// Throws Parse for malformed input and Precondition for invalid values.
  static RunConfig from_json(const nlohmann::json& j);
  void validate() const;
};

/// Resolves b from the config and the ground-state (D1) and largest (Dmax)
/// seminorms. Defaults to 1 when neither b nor b_scale is given.
double resolve_b(const RunConfig& cfg, double D1, double Dmax);

/// Sweep values with b_dstar and b_star inserted when they exist.
std::vector<double> sweep_values(const BSweep& sweep, double D1, double a, int N);

/// Runs one subcommand. Exit status: 0 success, 1 domain failure,
/// 2 usage or I/O error.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace katlas::cli
