#include "katlas/kernels.hpp"

#include <cstddef>
#include <vector>

#include "katlas/profile.hpp"
#include "kernels_detail.hpp"

namespace katlas::kernels {

namespace {

// Partial sums over fixed-size blocks, combined in block order, so the
// result does not depend on the number of threads.
constexpr std::ptrdiff_t kBlock = 256;

template <class Term>
double blocked_sum(std::ptrdiff_t n, const Term& term) {
  const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::ptrdiff_t end = std::min(n, (b + 1) * kBlock);
    double s = 0.0;
    for (std::ptrdiff_t i = b * kBlock; i < end; ++i) {
      s += term(static_cast<std::size_t>(i));
    }
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) {
    total += s;
  }
  return total;
}

}  // namespace

GridView view_of(const RadialProfile& p) { return {p.r, p.v, p.dv, p.N}; }

double dirichlet_integral(GridView g) {
  const auto n = static_cast<std::ptrdiff_t>(g.r.size()) - 1;
  return blocked_sum(n, [&](std::size_t i) { return detail::dirichlet_interval(g, i); });
}

double potential_integral(GridView g, const PowerNonlinearity& nl) {
  const auto n = static_cast<std::ptrdiff_t>(g.r.size()) - 1;
  return blocked_sum(n, [&](std::size_t i) { return detail::potential_interval(g, i, nl); });
}

ResidualNorms residual_norms(GridView g, double coefficient, const PowerNonlinearity& nl) {
  const auto n = static_cast<std::ptrdiff_t>(g.r.size());
  std::vector<ResidualNorms> nodes(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    nodes[static_cast<std::size_t>(i)] =
        detail::residual_node(g, static_cast<std::size_t>(i), coefficient, nl);
  }
  ResidualNorms out;
  out.residual_sq = blocked_sum(n, [&](std::size_t i) { return nodes[i].residual_sq; });
  out.source_sq = blocked_sum(n, [&](std::size_t i) { return nodes[i].source_sq; });
  return out;
}

std::vector<SweepRow> branch_sweep(std::span<const double> bs, double D1, double a, int N) {
  const auto n = static_cast<std::ptrdiff_t>(bs.size());
  std::vector<SweepRow> rows(bs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    rows[k] = detail::sweep_row(bs[k], D1, a, N);
  }
  return rows;
}

}  // namespace katlas::kernels
