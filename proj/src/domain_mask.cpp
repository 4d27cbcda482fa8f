#include "fracsob/domain_mask.hpp"

#include <cmath>
#include <string>

namespace fracsob {

DomainMask::DomainMask(const Grid& grid, std::vector<bool> inside) : grid_(grid), inside_(std::move(inside)) {
  if (static_cast<Index>(inside_.size()) != grid_.size()) {
    throw ValidationError("mask: expected " + std::to_string(grid_.size()) + " flags, got " +
                          std::to_string(inside_.size()));
  }
  indicator_ = Eigen::VectorXd::Zero(grid_.size());
  const double half = grid_.half_width() / 2.0;
  for (Index i = 0; i < grid_.size(); ++i) {
    if (!inside_[static_cast<std::size_t>(i)]) continue;
    const auto x = grid_.node(i);
    for (int d = 0; d < grid_.dim(); ++d) {
      if (x[d] < -half || x[d] >= half) {
        throw ValidationError("mask: inside node outside the central half-box [-L/2, L/2)");
      }
    }
    indices_.push_back(i);
    indicator_[i] = 1.0;
  }
  if (indices_.empty()) throw ValidationError("mask: no inside nodes (empty domain)");
  if (count() == grid_.size()) throw ValidationError("mask: covers every node; the domain must be a strict subset");
}

DomainMask DomainMask::interval(const Grid& grid, double a, double b) {
  if (grid.dim() != 1) throw ValidationError("mask: interval shape needs a 1D grid");
  if (!(a < b)) throw ParameterError("mask: interval bounds must satisfy a < b");
  std::vector<bool> inside(static_cast<std::size_t>(grid.size()));
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i)[0];
    inside[static_cast<std::size_t>(i)] = x > a && x < b;
  }
  return DomainMask(grid, std::move(inside));
}

DomainMask DomainMask::box(const Grid& grid, std::array<double, 2> lo, std::array<double, 2> hi) {
  for (int d = 0; d < grid.dim(); ++d) {
    if (!(lo[d] < hi[d])) throw ParameterError("mask: box bounds must satisfy lo < hi on every axis");
  }
  std::vector<bool> inside(static_cast<std::size_t>(grid.size()));
  for (Index i = 0; i < grid.size(); ++i) {
    const auto x = grid.node(i);
    bool in = true;
    for (int d = 0; d < grid.dim(); ++d) in = in && x[d] > lo[d] && x[d] < hi[d];
    inside[static_cast<std::size_t>(i)] = in;
  }
  return DomainMask(grid, std::move(inside));
}

GridFunction DomainMask::restrict(const GridFunction& f) const {
  if (!(f.grid() == grid_)) throw ValidationError("mask: grid mismatch");
  return GridFunction(grid_, f.values().cwiseProduct(indicator_));
}

double DomainMask::outside_magnitude(const GridFunction& f) const {
  if (!(f.grid() == grid_)) throw ValidationError("mask: grid mismatch");
  return (f.values().cwiseProduct((1.0 - indicator_.array()).matrix())).cwiseAbs().maxCoeff();
}

Eigen::VectorXd DomainMask::gather(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(count());
  for (Index k = 0; k < count(); ++k) out[k] = v[indices_[static_cast<std::size_t>(k)]];
  return out;
}

Eigen::VectorXd DomainMask::scatter(const Eigen::VectorXd& compact) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid_.size());
  for (Index k = 0; k < count(); ++k) out[indices_[static_cast<std::size_t>(k)]] = compact[k];
  return out;
}

}  // namespace fracsob
