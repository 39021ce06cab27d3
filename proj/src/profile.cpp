#include "katlas/profile.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "katlas/error.hpp"

namespace katlas {

void RadialProfile::validate(double tail_cutoff) const {
  if (N < 1) {
    throw Error(ErrorKind::Precondition, "profile dimension must be positive");
  }
  if (r.size() < 2 || v.size() != r.size() || dv.size() != r.size()) {
    throw Error(ErrorKind::Precondition, "profile arrays must share a length of at least 2");
  }
  if (r.front() != 0.0 || dv.front() != 0.0) {
    throw Error(ErrorKind::Precondition, "profile must start at r = 0 with zero slope");
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r[i]) || !std::isfinite(v[i]) || !std::isfinite(dv[i])) {
      throw Error(ErrorKind::Precondition, "profile contains non-finite values");
    }
    if (i > 0 && !(r[i] > r[i - 1])) {
      throw Error(ErrorKind::Precondition, "profile radii must be strictly increasing");
    }
  }
  if (v.front() == 0.0 || !(std::fabs(v.back()) <= tail_cutoff * std::fabs(v.front()))) {
    throw Error(ErrorKind::Precondition, "profile has not decayed below the tail cutoff");
  }
}

double RadialProfile::value_at(double radius) const {
  if (radius < 0.0) {
    radius = -radius;
  }
  if (r.empty() || radius > r.back()) {
    return 0.0;
  }
  auto it = std::upper_bound(r.begin(), r.end(), radius);
  std::size_t i = (it == r.begin()) ? 0 : static_cast<std::size_t>(it - r.begin()) - 1;
  if (i + 1 >= r.size()) {
    return v.back();
  }
  const double h = r[i + 1] - r[i];
  const double s = (radius - r[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * v[i] + (s3 - 2 * s2 + s) * h * dv[i] +
         (-2 * s3 + 3 * s2) * v[i + 1] + (s3 - s2) * h * dv[i + 1];
}

int RadialProfile::sign_changes(double floor) const {
  int changes = 0;
  int last_sign = 0;
  for (double x : v) {
    if (std::fabs(x) <= floor || x == 0.0) {
      continue;
    }
    const int sign = x > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) {
      ++changes;
    }
    last_sign = sign;
  }
  return changes;
}

double sphere_measure(int N) {
  if (N < 1) {
    throw Error(ErrorKind::Precondition, "dimension must be positive");
  }
  const double half = 0.5 * N;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  static std::atomic<unsigned long> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    }
    out << contents;
    if (!out) {
      throw Error(ErrorKind::Io, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move file into place: " + path.string());
  }
}

void write_profile_csv(const std::filesystem::path& path, const RadialProfile& profile,
                       const std::string& value_name, bool with_derivative) {
  std::string text = "r," + value_name + (with_derivative ? ",d" + value_name : "") + "\n";
  text.reserve(profile.size() * 80);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    text += format_double(profile.r[i]);
    text += ',';
    text += format_double(profile.v[i]);
    if (with_derivative) {
      text += ',';
      text += format_double(profile.dv[i]);
    }
    text += '\n';
  }
  write_file_atomic(path, text);
}

RadialProfile read_profile_csv(const std::filesystem::path& path, int N) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::Parse, "empty profile file " + path.string());
  }
  const auto columns = 1 + std::count(line.begin(), line.end(), ',');
  if (line.rfind("r,", 0) != 0 || columns < 2 || columns > 3) {
    throw Error(ErrorKind::Parse, "unexpected profile header in " + path.string());
  }
  RadialProfile profile;
  profile.N = N;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    double values[3] = {0, 0, 0};
    for (long c = 0; c < columns; ++c) {
      if (!std::getline(row, cell, ',')) {
        throw Error(ErrorKind::Parse, "short row in " + path.string());
      }
      try {
        values[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "bad number '" + cell + "' in " + path.string());
      }
    }
    profile.r.push_back(values[0]);
    profile.v.push_back(values[1]);
    if (columns == 3) {
      profile.dv.push_back(values[2]);
    }
  }
  return profile;
}

}  // namespace katlas
