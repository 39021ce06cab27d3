#pragma once

// Per-interval and per-node building blocks shared by the OpenMP kernels and
// their serial references.

#include <cmath>
#include <limits>

#include "katlas/kernels.hpp"
#include "katlas/rescale.hpp"

namespace katlas::kernels::detail {

inline constexpr double kGaussNodes[5] = {
    -0.9061798459386639927976, -0.5384693101056830910363, 0.0,
    0.5384693101056830910363,  0.9061798459386639927976};
inline constexpr double kGaussWeights[5] = {
    0.2369268850561890875143, 0.4786286704993664680413, 0.5688888888888888888889,
    0.4786286704993664680413, 0.2369268850561890875143};

inline double radial_weight(double r, int N) {
  return N == 1 ? 1.0 : std::pow(r, N - 1);
}

struct Hermite {
  double v0, d0, v1, d1, h;

  double value(double s) const {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * v1 +
           (s3 - s2) * h * d1;
  }

  double slope(double s) const {
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * v0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * v1 +
            (3 * s2 - 2 * s) * h * d1) /
           h;
  }
};

inline Hermite interval(const GridView& g, std::size_t i) {
  return {g.v[i], g.dv[i], g.v[i + 1], g.dv[i + 1], g.r[i + 1] - g.r[i]};
}

inline double dirichlet_interval(const GridView& g, std::size_t i) {
  const Hermite H = interval(g, i);
  double sum = 0.0;
  for (int q = 0; q < 5; ++q) {
    const double s = 0.5 * (kGaussNodes[q] + 1.0);
    const double slope = H.slope(s);
    sum += kGaussWeights[q] * slope * slope * radial_weight(g.r[i] + s * H.h, g.N);
  }
  return 0.5 * H.h * sum;
}

inline double potential_interval(const GridView& g, std::size_t i, const PowerNonlinearity& nl) {
  const Hermite H = interval(g, i);
  double sum = 0.0;
  for (int q = 0; q < 5; ++q) {
    const double s = 0.5 * (kGaussNodes[q] + 1.0);
    sum += kGaussWeights[q] * nl.F(H.value(s)) * radial_weight(g.r[i] + s * H.h, g.N);
  }
  return 0.5 * H.h * sum;
}

// Derivative at xs[c] of the Lagrange polynomial through (xs[j], ys[j]).
inline double lagrange_slope(const double* xs, const double* ys, int n, int c) {
  double result = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == c) {
      double sum = 0.0;
      for (int m = 0; m < n; ++m) {
        if (m != c) sum += 1.0 / (xs[c] - xs[m]);
      }
      result += ys[j] * sum;
    } else {
      double num = 1.0, den = 1.0;
      for (int m = 0; m < n; ++m) {
        if (m != j) den *= xs[j] - xs[m];
        if (m != j && m != c) num *= xs[c] - xs[m];
      }
      result += ys[j] * num / den;
    }
  }
  return result;
}

// Second derivative at node i from the stored first derivatives. Nodes left
// of r = 0 are mirrored; u' is odd there.
inline double second_derivative(const GridView& g, std::size_t i) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.r.size());
  const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i);
  std::ptrdiff_t first = idx - 2;
  if (first + 4 >= n) {
    first = n - 5;
  }
  double xs[5], ys[5];
  for (int j = 0; j < 5; ++j) {
    const std::ptrdiff_t k = first + j;
    if (k < 0) {
      xs[j] = -g.r[static_cast<std::size_t>(-k)];
      ys[j] = -g.dv[static_cast<std::size_t>(-k)];
    } else {
      xs[j] = g.r[static_cast<std::size_t>(k)];
      ys[j] = g.dv[static_cast<std::size_t>(k)];
    }
  }
  return lagrange_slope(xs, ys, 5, static_cast<int>(idx - first));
}

inline double node_weight(const GridView& g, std::size_t i) {
  const std::size_t n = g.r.size();
  const double left = i > 0 ? g.r[i] - g.r[i - 1] : 0.0;
  const double right = i + 1 < n ? g.r[i + 1] - g.r[i] : 0.0;
  return 0.5 * (left + right) * radial_weight(g.r[i], g.N);
}

inline ResidualNorms residual_node(const GridView& g, std::size_t i, double coefficient,
                                   const PowerNonlinearity& nl) {
  const double upp = second_derivative(g, i);
  const double laplacian = g.r[i] == 0.0 ? g.N * upp : upp + (g.N - 1) * g.dv[i] / g.r[i];
  const double source = nl.f(g.v[i]);
  const double e = coefficient * laplacian + source;
  const double w = node_weight(g, i);
  return {w * e * e, w * source * source};
}

inline SweepRow sweep_row(double b, double D1, double a, int N) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  SweepRow row{b, 0, nan, nan};
  const RootSet rs = h_roots(b * D1, a, N);
  row.branch_count = static_cast<int>(rs.roots.size());
  for (const auto& root : rs.roots) {
    if (root.label == BranchLabel::ContinuumFree) {
      row.phi_lower = 0.0;
    } else if (root.label == BranchLabel::Upper) {
      row.phi_upper = g_energy(root.t, a, b, N);
    } else {
      row.phi_lower = g_energy(root.t, a, b, N);
    }
  }
  return row;
}

}  // namespace katlas::kernels::detail
