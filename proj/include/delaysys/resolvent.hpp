#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "delaysys/linalg.hpp"
#include "delaysys/signals.hpp"

namespace delaysys {

/// Grid samples R(t_n), t_n = n*h, of the resolvent family of
///   x' = A x + int_0^t a(t-s) A x(s) ds,
/// i.e. the solution of R(t) = I + int_0^t k(t-s) A R(s) ds with the
/// integrated kernel k(t) = 1 + int_0^t a.
class ResolventFamily {
 public:
  /// Wraps precomputed matrices. Requires matrices[0] == I exactly.
  ResolventFamily(Matrix generator, Kernel kernel, double step,
                  std::vector<Matrix> matrices);

  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return matrices_.size(); }
  double horizon() const noexcept {
    return step_ * static_cast<double>(size() - 1);
  }
  Eigen::Index dimension() const noexcept { return generator_.rows(); }
  const Matrix& generator() const noexcept { return generator_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const Matrix& operator[](std::size_t n) const { return matrices_[n]; }
  const std::vector<Matrix>& matrices() const noexcept { return matrices_; }

 private:
  Matrix generator_;
  Kernel kernel_;
  double step_;
  std::vector<Matrix> matrices_;
};

/// Product-trapezoidal marching for the resolvent equation on [0, horizon].
/// Throws SingularMatrixError if I - (h/2) A is singular and NumericalError
/// on non-finite entries.
ResolventFamily compute_resolvent(const Matrix& generator, const Kernel& kernel,
                                  double step, double horizon);

/// max_n |R_n - I - h sum_m w_m k(t_n - t_m) A R_m|_2 with full trapezoid
/// weights.
double resolvent_residual(const ResolventFamily& family);

/// max_n |A R_n - R_n A|_2.
double commutation_defect(const ResolventFamily& family);

/// (Upsilon f)(t_n) = int_0^{t_n} R(t_n - s) f(s) ds by the trapezoidal rule.
/// `f` must start at 0 on the family's grid.
Trajectory upsilon_apply(const ResolventFamily& family, const Trajectory& f);

/// CSV: t, R[i][j] row-major; one row per grid node.
void write_resolvent_csv(std::ostream& out, const ResolventFamily& family);

}  // namespace delaysys
