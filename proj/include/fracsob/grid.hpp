#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "fracsob/errors.hpp"

namespace fracsob {

using Index = Eigen::Index;

/// Uniform periodic discretization of the box [-L, L)^dim with M points per axis.
///
/// Nodes are flattened with axis 0 fastest: flat = i0 + M * i1. The frequency
/// attached to lattice index j along an axis is pi * k / L with
/// k = j for j < M/2 and k = j - M otherwise, so k ranges over [-M/2, M/2).
class Grid {
 public:
  Grid(int dim, double half_width, int points_per_dim)
      : dim_(dim), half_width_(half_width), points_(points_per_dim) {
    if (dim != 1 && dim != 2) {
      throw ParameterError("grid: dim must be 1 or 2, got " + std::to_string(dim));
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw ParameterError("grid: half_width must be positive and finite");
    }
    if (points_per_dim < 8 || (points_per_dim & (points_per_dim - 1)) != 0) {
      throw ParameterError("grid: points_per_dim must be a power of two >= 8, got " +
                           std::to_string(points_per_dim));
    }
  }

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points_per_dim() const { return points_; }
  double spacing() const { return 2.0 * half_width_ / points_; }
  /// Quadrature weight of one node, spacing^dim.
  double cell_volume() const { return std::pow(spacing(), dim_); }
  Index size() const { return dim_ == 1 ? Index(points_) : Index(points_) * points_; }

  double coordinate(int j) const { return -half_width_ + j * spacing(); }
  int wavenumber(int j) const { return j < points_ / 2 ? j : j - points_; }
  double frequency(int j) const { return std::numbers::pi * wavenumber(j) / half_width_; }
  /// Largest |xi| on the lattice (the Nyquist corner).
  double max_frequency() const {
    return std::numbers::pi * (points_ / 2) / half_width_ * std::sqrt(double(dim_));
  }

  std::array<int, 2> multi_index(Index flat) const {
    return {int(flat % points_), dim_ == 2 ? int(flat / points_) : 0};
  }
  Index flat_index(int i0, int i1 = 0) const { return Index(i0) + Index(points_) * i1; }

  std::array<double, 2> node(Index flat) const {
    const auto ij = multi_index(flat);
    return {coordinate(ij[0]), dim_ == 2 ? coordinate(ij[1]) : 0.0};
  }
  std::array<double, 2> frequency_vector(Index flat) const {
    const auto ij = multi_index(flat);
    return {frequency(ij[0]), dim_ == 2 ? frequency(ij[1]) : 0.0};
  }
  double frequency_norm(Index flat) const {
    const auto xi = frequency_vector(flat);
    return std::hypot(xi[0], xi[1]);
  }
  /// Flat index of the lattice point carrying -xi (Nyquist maps to itself).
  Index mirror(Index flat) const {
    const auto ij = multi_index(flat);
    auto neg = [this](int j) { return j == 0 ? 0 : points_ - j; };
    return dim_ == 2 ? flat_index(neg(ij[0]), neg(ij[1])) : flat_index(neg(ij[0]));
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  double half_width_;
  int points_;
};

}  // namespace fracsob
