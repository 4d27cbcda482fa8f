#include "fracsob/spectral.hpp"

#include <array>

namespace fracsob {

MultiplierOperator::MultiplierOperator(const Grid& grid, const MultiplierSymbol& symbol)
    : grid_(grid), table_(grid.size()) {
  if (!symbol.evaluator) throw ValidationError("multiplier: empty symbol");
  for (Index i = 0; i < grid.size(); ++i) {
    const auto xi = grid.frequency_vector(i);
    const bool zero = xi[0] == 0.0 && xi[1] == 0.0;
    double m;
    if (zero && symbol.zero_mode == ZeroMode::annihilate) {
      m = 0.0;
    } else {
      m = symbol.evaluator(std::span<const double>(xi.data(), std::size_t(grid.dim())));
    }
    if (!std::isfinite(m) || m < 0.0) {
      throw ValidationError("multiplier: symbol must be finite and nonnegative on the lattice");
    }
    table_[i] = m;
  }
  for (Index i = 0; i < grid.size(); ++i) {
    const Index j = grid.mirror(i);
    const double a = table_[i], b = table_[j];
    if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) {
      // Nyquist rows pair up with themselves under mirror(), so only genuine
      // +xi/-xi pairs can trigger this.
      throw ValidationError("multiplier: symbol is not even, m(xi) != m(-xi)");
    }
  }
}

MultiplierOperator MultiplierOperator::from_table(const Grid& grid, Eigen::VectorXd table) {
  if (table.size() != grid.size()) throw ValidationError("multiplier: table size mismatch");
  return MultiplierOperator(grid, std::move(table), true);
}

Eigen::VectorXd MultiplierOperator::apply(const Eigen::VectorXd& values) const {
  detail::ComplexVector<double> data = values.cast<std::complex<double>>();
  detail::transform<double>(grid_, data, true);
  data.array() *= table_.array().cast<std::complex<double>>();
  detail::transform<double>(grid_, data, false);
  return data.real();
}

MultiplierOperator laplacian_operator(const Grid& grid, double s) {
  require_laplacian_order(s);
  return MultiplierOperator(grid, MultiplierSymbol::power(s));
}

}  // namespace fracsob
