#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "delaysys/linalg.hpp"

namespace delaysys {

enum class Phase { kCos, kSin };

/// One term c * t^m * e^{sigma t} * cos(omega t)  (or sin).
struct KernelTerm {
  double coefficient = 0.0;
  int power = 0;
  double rate = -1.0;
  double frequency = 0.0;
  Phase phase = Phase::kCos;
};

/// Scalar memory kernel a(t), t >= 0, as a finite sum of
/// exponential-polynomial-trigonometric terms. The empty sum is the zero
/// kernel. Every active term must decay (rate < 0), so the kernel and its
/// derivative are integrable on the half line.
class Kernel {
 public:
  Kernel() = default;
  explicit Kernel(std::vector<KernelTerm> terms);

  static Kernel exponential(double coefficient, double rate) {
    return Kernel({KernelTerm{coefficient, 0, rate, 0.0, Phase::kCos}});
  }

  const std::vector<KernelTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept;

  /// a(t). Throws DomainError for t < 0.
  double operator()(double t) const;

  /// Closed-form Laplace transform. Throws KernelPoleError when lambda hits
  /// one of sigma_j +/- i omega_j.
  Complex laplace(Complex lambda) const;

  /// 1 + int_0^t a(s) ds.
  double integrated(double t) const;

  /// Distinct poles sigma_j +/- i omega_j of the Laplace transform.
  std::vector<Complex> poles() const;

  /// max_j sigma_j over active terms; -infinity for the zero kernel.
  double max_rate() const noexcept;

 private:
  std::vector<KernelTerm> terms_;
};

/// Trapezoidal approximation of int_0^horizon e^{-lambda t} a(t) dt.
Complex laplace_numeric(const Kernel& k, Complex lambda, double horizon,
                        double step);

/// Vector-valued function sampled on the uniform grid start + k*step and
/// evaluated by piecewise-linear interpolation.
class Trajectory {
 public:
  Trajectory(double start, double step, std::vector<Vector> samples);

  template <typename Fn>
  static Trajectory sample(double start, double step, std::size_t count,
                           Fn&& fn) {
    std::vector<Vector> values;
    values.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      values.push_back(fn(start + static_cast<double>(k) * step));
    }
    return Trajectory(start, step, std::move(values));
  }

  static Trajectory constant(double start, double step, std::size_t count,
                             const Vector& value) {
    return Trajectory(start, step, std::vector<Vector>(count, value));
  }

  Eigen::Index dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double start() const noexcept { return start_; }
  double step() const noexcept { return step_; }
  double end() const noexcept { return time(size() - 1); }
  double time(std::size_t k) const noexcept {
    return start_ + static_cast<double>(k) * step_;
  }

  const Vector& operator[](std::size_t k) const { return samples_[k]; }
  const std::vector<Vector>& samples() const noexcept { return samples_; }

  /// Whether t lies in [start, end] up to step * 1e-9.
  bool covers(double t) const noexcept;

  /// Index of the grid node within step * 1e-9 of t, if any.
  std::optional<std::size_t> node_index(double t) const noexcept;

  /// Interpolated value; bit-exact at grid nodes. Throws DomainError when t
  /// is outside the covered interval.
  Vector operator()(double t) const;
  void eval_into(double t, Eigen::Ref<Vector> out) const;

  void append(Vector value);

  /// (int_a^b |x(t)|_2^p dt)^{1/p} by the trapezoidal rule on the grid
  /// refined with the interval endpoints.
  double lp_norm(double p, double a, double b) const;

 private:
  double start_;
  double step_;
  Eigen::Index dim_ = 0;
  std::vector<Vector> samples_;
};

/// The window theta -> x(anchor + theta), theta in [-horizon, 0].
///
/// This is a non-owning view: the referenced trajectories must outlive it.
/// When a prehistory is attached, points with anchor + theta < 0 are read
/// from it instead of from the main trajectory, which lets a solution carry a
/// jump between the initial history and the initial state at time 0.
class HistorySegment {
 public:
  HistorySegment(const Trajectory& trajectory, double anchor, double horizon,
                 const Trajectory* prehistory = nullptr);

  Vector operator()(double theta) const;
  void eval_into(double theta, Eigen::Ref<Vector> out) const;

  double anchor() const noexcept { return anchor_; }
  double horizon() const noexcept { return horizon_; }
  Eigen::Index dimension() const noexcept { return trajectory_->dimension(); }
  const Trajectory& trajectory() const noexcept { return *trajectory_; }
  const Trajectory* prehistory() const noexcept { return prehistory_; }

 private:
  const Trajectory* trajectory_;
  const Trajectory* prehistory_;
  double anchor_;
  double horizon_;
};

/// x_t. Throws DomainError when [t - horizon, t] is not covered.
HistorySegment history_at(const Trajectory& x, double t, double horizon,
                          const Trajectory* prehistory = nullptr);

}  // namespace delaysys
