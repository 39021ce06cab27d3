#include "katlas/kernels.hpp"
#include "kernels_detail.hpp"

namespace katlas::kernels::serial {

double dirichlet_integral(GridView g) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < g.r.size(); ++i) {
    total += detail::dirichlet_interval(g, i);
  }
  return total;
}

double potential_integral(GridView g, const PowerNonlinearity& nl) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < g.r.size(); ++i) {
    total += detail::potential_interval(g, i, nl);
  }
  return total;
}

ResidualNorms residual_norms(GridView g, double coefficient, const PowerNonlinearity& nl) {
  ResidualNorms out;
  for (std::size_t i = 0; i < g.r.size(); ++i) {
    const ResidualNorms node = detail::residual_node(g, i, coefficient, nl);
    out.residual_sq += node.residual_sq;
    out.source_sq += node.source_sq;
  }
  return out;
}

std::vector<SweepRow> branch_sweep(std::span<const double> bs, double D1, double a, int N) {
  std::vector<SweepRow> rows;
  rows.reserve(bs.size());
  for (double b : bs) {
    rows.push_back(detail::sweep_row(b, D1, a, N));
  }
  return rows;
}

}  // namespace katlas::kernels::serial
