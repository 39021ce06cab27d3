#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace katlas {

/// Radial samples of a function and its derivative on an increasing grid
/// starting at r = 0.
struct RadialProfile {
  int N = 0;
  std::vector<double> r;
  std::vector<double> v;
  std::vector<double> dv;

  std::size_t size() const noexcept { return r.size(); }

  /// Throws Precondition unless r[0] = 0, dv[0] = 0, r is strictly
  /// increasing, all values are finite and |v.back()| <= tail_cutoff |v[0]|.
  void validate(double tail_cutoff) const;

  /// Cubic Hermite interpolation from (v, dv); zero beyond the grid.
  double value_at(double radius) const;

  /// Count of strict sign changes of v, ignoring samples below floor in magnitude.
  int sign_changes(double floor = 0.0) const;
};

/// Surface measure of the unit sphere in R^N; 2 for N = 1.
double sphere_measure(int N);

/// Writes `r,<value>,<deriv>` rows with 17 significant digits.
void write_profile_csv(const std::filesystem::path& path, const RadialProfile& profile,
                       const std::string& value_name = "v", bool with_derivative = true);

/// Reads the layout written above. Profiles without a derivative column
/// come back with dv empty.
RadialProfile read_profile_csv(const std::filesystem::path& path, int N);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string format_double(double x);

}  // namespace katlas
