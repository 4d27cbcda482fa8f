#pragma once

#include <vector>

#include "fracsob/grid.hpp"
#include "fracsob/grid_function.hpp"

namespace fracsob {

/// Node indicator of an open set inside the box.
///
/// Must contain at least one node and miss at least one node, and every inside
/// node must sit in the central half-box [-L/2, L/2)^dim.
class DomainMask {
 public:
  DomainMask(const Grid& grid, std::vector<bool> inside);

  /// Nodes with a < x < b (strict).
  static DomainMask interval(const Grid& grid, double a, double b);
  /// Nodes strictly inside the product of the given intervals.
  static DomainMask box(const Grid& grid, std::array<double, 2> lo, std::array<double, 2> hi);

  const Grid& grid() const { return grid_; }
  bool contains(Index i) const { return inside_[static_cast<std::size_t>(i)]; }
  Index count() const { return static_cast<Index>(indices_.size()); }
  /// Flat indices of inside nodes, ascending.
  const std::vector<Index>& indices() const { return indices_; }
  /// 1 on inside nodes, 0 elsewhere.
  const Eigen::VectorXd& indicator() const { return indicator_; }

  /// Zeroes every value outside the mask.
  GridFunction restrict(const GridFunction& f) const;
  Eigen::VectorXd restrict(const Eigen::VectorXd& v) const { return v.cwiseProduct(indicator_); }
  /// Largest |f| over outside nodes.
  double outside_magnitude(const GridFunction& f) const;
  /// Gathers the inside values into a compact vector (ordering of indices()).
  Eigen::VectorXd gather(const Eigen::VectorXd& v) const;
  /// Inverse of gather: zero outside.
  Eigen::VectorXd scatter(const Eigen::VectorXd& compact) const;

  friend bool operator==(const DomainMask& a, const DomainMask& b) {
    return a.grid_ == b.grid_ && a.inside_ == b.inside_;
  }

 private:
  Grid grid_;
  std::vector<bool> inside_;
  std::vector<Index> indices_;
  Eigen::VectorXd indicator_;
};

}  // namespace fracsob
