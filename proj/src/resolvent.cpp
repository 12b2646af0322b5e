#include "delaysys/resolvent.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "delaysys/csv.hpp"
#include "delaysys/errors.hpp"

namespace delaysys {
namespace {

std::vector<double> integrated_kernel_table(const Kernel& kernel, double step,
                                            std::size_t count) {
  std::vector<double> table(count);
  for (std::size_t j = 0; j < count; ++j) {
    table[j] = kernel.integrated(static_cast<double>(j) * step);
  }
  return table;
}

}  // namespace

ResolventFamily::ResolventFamily(Matrix generator, Kernel kernel, double step,
                                 std::vector<Matrix> matrices)
    : generator_(std::move(generator)),
      kernel_(std::move(kernel)),
      step_(step),
      matrices_(std::move(matrices)) {
  if (!(step_ > 0.0)) throw DomainError("resolvent: step must be positive");
  if (generator_.rows() != generator_.cols()) {
    throw DimensionError("resolvent: generator must be square");
  }
  if (matrices_.empty()) throw DomainError("resolvent: no matrices");
  const Eigen::Index d = generator_.rows();
  for (const Matrix& m : matrices_) {
    if (m.rows() != d || m.cols() != d) {
      throw DimensionError("resolvent: matrix shape does not match generator");
    }
  }
  if (matrices_.front() != Matrix::Identity(d, d)) {
    throw DomainError("resolvent: R(0) must be the identity");
  }
}

ResolventFamily compute_resolvent(const Matrix& generator, const Kernel& kernel,
                                  double step, double horizon) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw DomainError("compute_resolvent: step must be positive");
  }
  if (!(horizon >= step * (1.0 - 1e-9))) {
    throw DomainError("compute_resolvent: horizon must be at least one step");
  }
  if (generator.rows() != generator.cols()) {
    throw DimensionError("compute_resolvent: generator must be square");
  }
  const Eigen::Index d = generator.rows();
  const auto dd = static_cast<std::size_t>(d * d);
  const auto n_steps =
      static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  const std::vector<double> kt =
      integrated_kernel_table(kernel, step, n_steps + 1);

  const Matrix identity = Matrix::Identity(d, d);
  const Matrix step_matrix = identity - (0.5 * step * kt[0]) * generator;
  Eigen::PartialPivLU<Matrix> lu(step_matrix);
  const double rcond = d == 0 ? 1.0 : lu.rcond();
  if (!(rcond > 1e-13)) {
    std::ostringstream msg;
    msg << "compute_resolvent: I - (h/2) A is singular for h = " << step;
    throw SingularMatrixError(msg.str());
  }

  std::vector<Matrix> matrices;
  matrices.reserve(n_steps + 1);
  matrices.push_back(identity);
  // A R_m, flattened column-major.
  std::vector<double> ar((n_steps + 1) * dd);
  auto store_ar = [&](std::size_t m) {
    Eigen::Map<Matrix>(ar.data() + m * dd, d, d) = generator * matrices[m];
  };
  store_ar(0);

  const bool plain = kernel.is_zero();
  Matrix running = Matrix::Zero(d, d);  // sum_{m=1}^{n-1} A R_m when a == 0
  Matrix acc(d, d);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    if (plain) {
      if (n >= 2) running += Eigen::Map<const Matrix>(ar.data() + (n - 1) * dd, d, d);
      acc = running;
      acc += 0.5 * Eigen::Map<const Matrix>(ar.data(), d, d);
    } else {
      acc.setZero();
      double* out = acc.data();
      for (std::size_t i = 0; i < dd; ++i) out[i] = 0.5 * kt[n] * ar[i];
      for (std::size_t m = 1; m < n; ++m) {
        const double w = kt[n - m];
        const double* src = ar.data() + m * dd;
        for (std::size_t i = 0; i < dd; ++i) out[i] += w * src[i];
      }
    }
    Matrix rhs = identity + step * acc;
    matrices.push_back(lu.solve(rhs));
    if (!matrices.back().allFinite()) {
      std::ostringstream msg;
      msg << "compute_resolvent: non-finite entries at t = "
          << static_cast<double>(n) * step;
      throw NumericalError(msg.str());
    }
    store_ar(n);
  }
  return ResolventFamily(generator, kernel, step, std::move(matrices));
}

double resolvent_residual(const ResolventFamily& family) {
  const Eigen::Index d = family.dimension();
  const double h = family.step();
  const std::vector<double> kt =
      integrated_kernel_table(family.kernel(), h, family.size());
  std::vector<Matrix> ar;
  ar.reserve(family.size());
  for (const Matrix& r : family.matrices()) ar.push_back(family.generator() * r);

  const Matrix identity = Matrix::Identity(d, d);
  double worst = 0.0;
  Matrix acc(d, d);
  for (std::size_t n = 0; n < family.size(); ++n) {
    acc.setZero();
    for (std::size_t m = 0; m <= n; ++m) {
      const double w = (n > 0 && (m == 0 || m == n)) ? 0.5 : (n == 0 ? 0.0 : 1.0);
      acc += (w * kt[n - m]) * ar[m];
    }
    worst = std::max(worst, spectral_norm(family[n] - identity - h * acc));
  }
  return worst;
}

double commutation_defect(const ResolventFamily& family) {
  const Matrix& a = family.generator();
  double worst = 0.0;
  for (const Matrix& r : family.matrices()) {
    worst = std::max(worst, spectral_norm(a * r - r * a));
  }
  return worst;
}

Trajectory upsilon_apply(const ResolventFamily& family, const Trajectory& f) {
  const double h = family.step();
  if (std::abs(f.start()) > 1e-9 * h || std::abs(f.step() - h) > 1e-12 * h) {
    throw DomainError("upsilon_apply: forcing must live on the family's grid");
  }
  if (f.dimension() != family.dimension()) {
    throw DimensionError("upsilon_apply: forcing dimension mismatch");
  }
  if (f.size() > family.size()) {
    throw DomainError("upsilon_apply: forcing extends beyond the family");
  }
  std::vector<Vector> out;
  out.reserve(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    Vector acc = Vector::Zero(f.dimension());
    for (std::size_t m = 0; m <= n && n > 0; ++m) {
      const double w = (m == 0 || m == n) ? 0.5 : 1.0;
      acc.noalias() += w * (family[n - m] * f[m]);
    }
    out.push_back(h * acc);
  }
  return Trajectory(0.0, h, std::move(out));
}

void write_resolvent_csv(std::ostream& out, const ResolventFamily& family) {
  const Eigen::Index d = family.dimension();
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out << ",R[" << i << "][" << j << "]";
  }
  out << '\n';
  for (std::size_t n = 0; n < family.size(); ++n) {
    out << format_double(static_cast<double>(n) * family.step());
    const Matrix& r = family[n];
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(r(i, j));
    }
    out << '\n';
  }
}

}  // namespace delaysys
