#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "fracsob/errors.hpp"
#include "fracsob/grid.hpp"

namespace fracsob {

/// Real field sampled at the nodes of a Grid.
///
/// Distributions are carried by their density: a functional h acts on a
/// field phi as cell_volume * sum_i h_i phi_i (see `pairing`).
template <typename Scalar>
class BasicGridFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit BasicGridFunction(const Grid& grid) : grid_(grid), values_(Vector::Zero(grid.size())) {}

  BasicGridFunction(const Grid& grid, Vector values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw ValidationError("grid function: expected " + std::to_string(grid_.size()) +
                            " values, got " + std::to_string(values_.size()));
    }
    if (!values_.allFinite()) {
      throw ValidationError("grid function: values must be finite");
    }
  }

  static BasicGridFunction constant(const Grid& grid, Scalar value) {
    return BasicGridFunction(grid, Vector::Constant(grid.size(), value));
  }

  /// Samples fn(x) at every node; x is {x0, x1} (x1 = 0 in 1D).
  template <typename Fn>
  static BasicGridFunction sample(const Grid& grid, Fn&& fn) {
    Vector v(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
      const std::array<double, 2> x = grid.node(i);
      v[i] = static_cast<Scalar>(fn(x));
    }
    return BasicGridFunction(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  Index size() const { return values_.size(); }
  Scalar operator[](Index i) const { return values_[i]; }
  Scalar& operator[](Index i) { return values_[i]; }

  BasicGridFunction& operator+=(const BasicGridFunction& o) {
    require_same_grid(o);
    values_ += o.values_;
    return *this;
  }
  BasicGridFunction& operator-=(const BasicGridFunction& o) {
    require_same_grid(o);
    values_ -= o.values_;
    return *this;
  }
  BasicGridFunction& operator*=(Scalar a) {
    values_ *= a;
    return *this;
  }

  friend BasicGridFunction operator+(BasicGridFunction a, const BasicGridFunction& b) { return a += b; }
  friend BasicGridFunction operator-(BasicGridFunction a, const BasicGridFunction& b) { return a -= b; }
  friend BasicGridFunction operator*(Scalar c, BasicGridFunction a) { return a *= c; }
  friend BasicGridFunction operator*(BasicGridFunction a, Scalar c) { return a *= c; }
  friend BasicGridFunction operator-(BasicGridFunction a) { return a *= Scalar(-1); }

  void require_same_grid(const BasicGridFunction& o) const {
    if (!(grid_ == o.grid_)) throw ValidationError("grid functions live on different grids");
  }

 private:
  Grid grid_;
  Vector values_;
};

using GridFunction = BasicGridFunction<double>;

template <typename Scalar>
BasicGridFunction<Scalar> pointwise_product(const BasicGridFunction<Scalar>& a,
                                            const BasicGridFunction<Scalar>& b) {
  a.require_same_grid(b);
  return BasicGridFunction<Scalar>(a.grid(), a.values().cwiseProduct(b.values()));
}

/// Discrete pairing h[phi] = cell_volume * sum h_i phi_i.
template <typename Scalar>
Scalar pairing(const BasicGridFunction<Scalar>& h, const BasicGridFunction<Scalar>& phi) {
  h.require_same_grid(phi);
  return Scalar(h.grid().cell_volume()) * h.values().dot(phi.values());
}

template <typename Scalar>
Scalar mean(const BasicGridFunction<Scalar>& f) {
  return f.values().mean();
}

template <typename Scalar>
Scalar max_abs(const BasicGridFunction<Scalar>& f) {
  return f.values().cwiseAbs().maxCoeff();
}

}  // namespace fracsob
