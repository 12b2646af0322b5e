#pragma once

#include <cstddef>
#include <vector>

#include "delaysys/linalg.hpp"
#include "delaysys/signals.hpp"

namespace delaysys {

/// Point mass M at theta in [-r, 0).
struct Atom {
  double theta;
  Matrix weight;
};

/// Matrix density sum_k coeffs[k] * theta^k on [lower, upper], degree <= 3.
struct DensityPiece {
  double lower;
  double upper;
  std::vector<Matrix> coeffs;

  Matrix operator()(double theta) const;
};

/// Operator-valued Stieltjes measure mu on [-r, 0] acting as
///   L phi = int_{-r}^0 dmu(theta) phi(theta),
/// realized as finitely many atoms plus a piecewise-polynomial density.
/// The measure has no mass at theta = 0.
class DelayMeasure {
 public:
  DelayMeasure(double horizon, Eigen::Index out_dim, Eigen::Index in_dim,
               std::vector<Atom> atoms = {},
               std::vector<DensityPiece> density = {});

  static DelayMeasure zero(double horizon, Eigen::Index out_dim,
                           Eigen::Index in_dim) {
    return DelayMeasure(horizon, out_dim, in_dim);
  }

  double horizon() const noexcept { return horizon_; }
  Eigen::Index out_dim() const noexcept { return out_dim_; }
  Eigen::Index in_dim() const noexcept { return in_dim_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<DensityPiece>& density() const noexcept { return density_; }
  bool is_zero() const noexcept { return atoms_.empty() && density_.empty(); }

 private:
  double horizon_;
  Eigen::Index out_dim_;
  Eigen::Index in_dim_;
  std::vector<Atom> atoms_;
  std::vector<DensityPiece> density_;
};

/// L applied to a history window. Density pieces are integrated with a
/// 4-point Gauss-Legendre rule on every grid cell of the segment's
/// trajectory, which is exact for the piecewise-linear interpolant.
Vector measure_apply(const DelayMeasure& mu, const HistorySegment& seg);

/// L e_lambda = int e^{lambda theta} dmu(theta), in closed form.
ComplexMatrix exp_moment(const DelayMeasure& mu, Complex lambda);

/// |mu|([-window, 0]) with the spectral norm on matrices.
double total_variation(const DelayMeasure& mu, double window);

/// s L R(s, Q) seg where Q is the left-shift generator; converges to
/// measure_apply(mu, seg) as s -> infinity for continuous segments.
Vector yosida_approx(const DelayMeasure& mu, const HistorySegment& seg,
                     double s);

/// A measure pre-integrated against the piecewise-linear interpolant on a
/// grid of spacing `step` anchored at a grid node:
///   L x_t = sum_e right_e x(t + offset_e h)^+ + left_e x(t + offset_e h)^-
/// where ^+ / ^- denote the values on the right / left of a node (they only
/// differ at a jump of x).
struct StencilEntry {
  std::ptrdiff_t offset;  // <= 0
  Matrix right;
  Matrix left;
};

class DelayStencil {
 public:
  DelayStencil(const DelayMeasure& mu, double step);

  const std::vector<StencilEntry>& entries() const noexcept { return entries_; }
  Eigen::Index out_dim() const noexcept { return out_dim_; }
  Eigen::Index in_dim() const noexcept { return in_dim_; }

  /// Left weight at offset 0: the only coupling to x(t) itself.
  const Matrix& newest_weight() const noexcept { return newest_; }

 private:
  Eigen::Index out_dim_;
  Eigen::Index in_dim_;
  std::vector<StencilEntry> entries_;
  Matrix newest_;
};

}  // namespace delaysys
