#pragma once

// Shared fixtures and independent oracles for the test binaries. Nothing in
// here calls into the solver code paths it is used to check.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "katlas/nonlinearity.hpp"

namespace testing {

inline katlas::PowerNonlinearity single(double omega, double c, double p) {
  return katlas::PowerNonlinearity(omega, {{c, p}});
}

inline katlas::PowerNonlinearity cubic() { return single(1.0, 1.0, 4.0); }

inline double rel(double x, double y) {
  const double s = std::max(std::fabs(x), std::fabs(y));
  return s == 0.0 ? 0.0 : std::fabs(x - y) / s;
}

// Plain bisection on a sign change of g over [lo, hi].
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
  double glo = g(lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::fabs(hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Classical fixed-step RK4 for v'' = -f(v) in one dimension, started at
// (v, v') = (zeta, 0). Returns v at x = 0, h, 2h, ... up to x_end.
inline std::vector<double> rk4_1d(const katlas::PowerNonlinearity& nl, double zeta, double h,
                                  double x_end) {
  std::vector<double> out{zeta};
  double v = zeta, dv = 0.0;
  const int steps = static_cast<int>(std::lround(x_end / h));
  for (int i = 0; i < steps; ++i) {
    const double k1v = dv, k1d = -nl.f(v);
    const double k2v = dv + 0.5 * h * k1d, k2d = -nl.f(v + 0.5 * h * k1v);
    const double k3v = dv + 0.5 * h * k2d, k3d = -nl.f(v + 0.5 * h * k2v);
    const double k4v = dv + h * k3d, k4d = -nl.f(v + h * k3v);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    dv += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    out.push_back(v);
  }
  return out;
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& g, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("katlas-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testing
