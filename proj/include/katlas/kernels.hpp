#pragma once

#include <span>
#include <vector>

#include "katlas/nonlinearity.hpp"

namespace katlas {
struct RadialProfile;
}

namespace katlas::kernels {

/// Read-only view of radial samples (r, v, v') in dimension N.
struct GridView {
  std::span<const double> r;
  std::span<const double> v;
  std::span<const double> dv;
  int N = 1;
};

GridView view_of(const RadialProfile& p);

struct ResidualNorms {
  double residual_sq = 0.0;  ///< sum of w_i e_i^2
  double source_sq = 0.0;    ///< sum of w_i f(u_i)^2
};

struct SweepRow {
  double b = 0.0;
  int branch_count = 0;
  double phi_lower = 0.0;  ///< NaN when absent
  double phi_upper = 0.0;  ///< NaN when absent
};

// The grid integrals use the cubic Hermite interpolant built from (v, v') on
// every interval and a 5-point Gauss-Legendre rule: fourth order for the
// value integrals, third order for the Dirichlet integral on irregular grids.
// None of them includes the sphere measure or any tail beyond the last node.

/// Integral of v'(r)^2 r^(N-1) over the grid.
double dirichlet_integral(GridView g);

/// Integral of F(v(r)) r^(N-1) over the grid.
double potential_integral(GridView g, const PowerNonlinearity& nl);

/// Node-wise residual coefficient * (u'' + (N-1) u' / r) + f(u) with u''
/// obtained by differentiating the stored u' on a local 5-point stencil
/// (odd reflection through r = 0). Weights are r^(N-1) times the trapezoid
/// cell width.
ResidualNorms residual_norms(GridView g, double coefficient, const PowerNonlinearity& nl);

/// Branch count and the Lower/Upper (or unique) energies for each b given the
/// ground-state seminorm D1.
std::vector<SweepRow> branch_sweep(std::span<const double> bs, double D1, double a, int N);

/// Straight single-threaded versions of the kernels above; the OpenMP
/// versions must agree with these to rounding.
namespace serial {
double dirichlet_integral(GridView g);
double potential_integral(GridView g, const PowerNonlinearity& nl);
ResidualNorms residual_norms(GridView g, double coefficient, const PowerNonlinearity& nl);
std::vector<SweepRow> branch_sweep(std::span<const double> bs, double D1, double a, int N);
}  // namespace serial

}  // namespace katlas::kernels
