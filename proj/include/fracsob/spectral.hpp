#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "fracsob/errors.hpp"
#include "fracsob/grid.hpp"
#include "fracsob/grid_function.hpp"

namespace fracsob {

enum class ZeroMode { preserve, annihilate };

/// Fourier symbol m(xi) >= 0 with m(xi) = m(-xi).
struct MultiplierSymbol {
  std::function<double(std::span<const double> xi)> evaluator;
  ZeroMode zero_mode = ZeroMode::preserve;

  static MultiplierSymbol identity() {
    return {[](std::span<const double>) { return 1.0; }, ZeroMode::preserve};
  }
  /// |xi|^power, zero mode annihilated.
  static MultiplierSymbol power(double exponent) {
    return {[exponent](std::span<const double> xi) {
              return std::pow(std::hypot(xi[0], xi.size() > 1 ? xi[1] : 0.0), exponent);
            },
            ZeroMode::annihilate};
  }
  /// 1 / (1 + |xi|^s).
  static MultiplierSymbol bessel_inverse(double s) {
    return {[s](std::span<const double> xi) {
              return 1.0 / (1.0 + std::pow(std::hypot(xi[0], xi.size() > 1 ? xi[1] : 0.0), s));
            },
            ZeroMode::preserve};
  }
  /// exp(-delta^2 |xi|^2), a periodic Gaussian smoother.
  static MultiplierSymbol gaussian(double delta) {
    return {[delta](std::span<const double> xi) {
              const double r2 = xi[0] * xi[0] + (xi.size() > 1 ? xi[1] * xi[1] : 0.0);
              return std::exp(-delta * delta * r2);
            },
            ZeroMode::preserve};
  }
};

/// Symbol tabulated on the frequency lattice of one grid.
///
/// Checks nonnegativity, finiteness and evenness once, so repeated
/// application inside iterative solvers only pays for the transforms.
class MultiplierOperator {
 public:
  MultiplierOperator(const Grid& grid, const MultiplierSymbol& symbol);
  /// Direct construction from a per-node table (already validated by caller).
  static MultiplierOperator from_table(const Grid& grid, Eigen::VectorXd table);

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& table() const { return table_; }

  template <typename Scalar>
  BasicGridFunction<Scalar> operator()(const BasicGridFunction<Scalar>& f) const;

  /// Raw vector version, no finiteness check.
  Eigen::VectorXd apply(const Eigen::VectorXd& values) const;

 private:
  MultiplierOperator(const Grid& grid, Eigen::VectorXd table, bool) : grid_(grid), table_(std::move(table)) {}
  Grid grid_;
  Eigen::VectorXd table_;
};

namespace detail {

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

// In-place multi-dimensional DFT by successive 1D transforms along each axis.
template <typename Scalar>
void transform(const Grid& grid, ComplexVector<Scalar>& data, bool forward) {
  thread_local Eigen::FFT<Scalar> fft;
  const int m = grid.points_per_dim();
  std::vector<std::complex<Scalar>> line(m), out(m);
  const Index lines = grid.size() / m;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const Index stride = axis == 0 ? 1 : m;
    for (Index l = 0; l < lines; ++l) {
      const Index base = axis == 0 ? l * m : l;
      for (int j = 0; j < m; ++j) line[j] = data[base + j * stride];
      if (forward) {
        fft.fwd(out, line);
      } else {
        fft.inv(out, line);
      }
      for (int j = 0; j < m; ++j) data[base + j * stride] = out[j];
    }
  }
}

template <typename Scalar>
void require_finite(const BasicGridFunction<Scalar>& f, const char* who) {
  if (!f.values().allFinite()) throw ValidationError(std::string(who) + ": input has non-finite values");
}

}  // namespace detail

template <typename Scalar>
BasicGridFunction<Scalar> MultiplierOperator::operator()(const BasicGridFunction<Scalar>& f) const {
  if (!(f.grid() == grid_)) throw ValidationError("apply_multiplier: grid mismatch");
  detail::require_finite(f, "apply_multiplier");
  detail::ComplexVector<Scalar> data = f.values().template cast<std::complex<Scalar>>();
  detail::transform<Scalar>(grid_, data, true);
  for (Index i = 0; i < data.size(); ++i) data[i] *= static_cast<Scalar>(table_[i]);
  detail::transform<Scalar>(grid_, data, false);
  return BasicGridFunction<Scalar>(grid_, data.real());
}

template <typename Scalar>
BasicGridFunction<Scalar> apply_multiplier(const BasicGridFunction<Scalar>& f, const MultiplierSymbol& m) {
  detail::require_finite(f, "apply_multiplier");
  return MultiplierOperator(f.grid(), m)(f);
}

inline void require_laplacian_order(double s) {
  if (!(s > 0.0 && s <= 2.0)) throw ParameterError("fractional order s must lie in (0, 2], got " + std::to_string(s));
}

/// (-Delta)^{s/2} with symbol |xi|^s; constants are mapped to zero.
template <typename Scalar>
BasicGridFunction<Scalar> frac_laplacian(const BasicGridFunction<Scalar>& f, double s) {
  require_laplacian_order(s);
  return apply_multiplier(f, MultiplierSymbol::power(s));
}

/// Inverse of frac_laplacian on mean-zero fields (symbol |xi|^{-s}, zero mode dropped).
template <typename Scalar>
BasicGridFunction<Scalar> riesz_potential(const BasicGridFunction<Scalar>& f, double s) {
  const int n = f.grid().dim();
  if (!(s > 0.0 && s < double(n))) {
    throw ParameterError("riesz potential order must lie in (0, " + std::to_string(n) + "), got " + std::to_string(s));
  }
  return apply_multiplier(f, MultiplierSymbol::power(-s));
}

/// B_s with symbol 1/(1+|xi|^s); f = frac_laplacian(B_s f, s) + B_s f.
template <typename Scalar>
BasicGridFunction<Scalar> bessel_inverse(const BasicGridFunction<Scalar>& f, double s) {
  if (!(s > 0.0 && s < 2.0)) throw ParameterError("bessel_inverse order must lie in (0, 2), got " + std::to_string(s));
  return apply_multiplier(f, MultiplierSymbol::bessel_inverse(s));
}

/// Precomputed |xi|^s operator for repeated use.
MultiplierOperator laplacian_operator(const Grid& grid, double s);

}  // namespace fracsob
