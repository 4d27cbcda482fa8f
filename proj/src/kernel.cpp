#include "fracsob/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fracsob {

DenseOperator kernel_matrix(const Grid& grid, const MultiplierSymbol& symbol) {
  const Index n = grid.size();
  if (n > kMaxDenseNodes) {
    throw SizeError("kernel_matrix: grid has " + std::to_string(n) + " nodes, dense limit is " +
                    std::to_string(kMaxDenseNodes));
  }
  const int m = grid.points_per_dim();
  const Eigen::VectorXd table = MultiplierOperator(grid, symbol).table();

  Eigen::VectorXd cosines(m);
  for (int t = 0; t < m; ++t) cosines[t] = std::cos(2.0 * std::numbers::pi * t / m);

  // First column: k(d) = n^{-1} sum_xi m(xi) cos(xi . x_d), x_d the offset of node d from node 0.
  Eigen::VectorXd column(n);
  for (Index d = 0; d < n; ++d) {
    const auto dd = grid.multi_index(d);
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
      const auto jj = grid.multi_index(j);
      const long phase = (long(jj[0]) * dd[0] + long(jj[1]) * dd[1]) % m;
      acc += table[j] * cosines[phase];
    }
    column[d] = acc / double(n);
  }

  DenseOperator k(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto ii = grid.multi_index(i);
    for (Index j = 0; j < n; ++j) {
      const auto jj = grid.multi_index(j);
      const int d0 = ((ii[0] - jj[0]) % m + m) % m;
      const int d1 = ((ii[1] - jj[1]) % m + m) % m;
      k(i, j) = column[grid.flat_index(d0, grid.dim() == 2 ? d1 : 0)];
    }
  }
  return k;
}

DenseOperator kernel_matrix(const Grid& grid, double s) {
  require_laplacian_order(s);
  return kernel_matrix(grid, MultiplierSymbol::power(s));
}

DenseOperator restrict_to_mask(const DenseOperator& full, const DomainMask& mask) {
  const auto& idx = mask.indices();
  const Index n = mask.count();
  DenseOperator out(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) out(a, b) = full(idx[std::size_t(a)], idx[std::size_t(b)]);
  return out;
}

GridFunction product_rule_remainder(const GridFunction& f, const GridFunction& g, double s) {
  f.require_same_grid(g);
  const DenseOperator k = kernel_matrix(f.grid(), s);
  const Eigen::VectorXd& fv = f.values();
  const Eigen::VectorXd& gv = g.values();
  Eigen::VectorXd r(fv.size());
  for (Index x = 0; x < fv.size(); ++x) {
    double acc = 0.0;
    for (Index y = 0; y < fv.size(); ++y) {
      if (y != x) acc += k(x, y) * (fv[x] - fv[y]) * (gv[x] - gv[y]);
    }
    r[x] = acc;
  }
  return GridFunction(f.grid(), std::move(r));
}

}  // namespace fracsob
