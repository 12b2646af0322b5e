#include "delaysys/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "delaysys/errors.hpp"

namespace delaysys {
namespace {

constexpr double kNodeTolerance = 1e-9;

double factorial(int m) {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

bool active(const KernelTerm& term) { return term.coefficient != 0.0; }

Complex term_exponent(const KernelTerm& term) {
  return {term.rate, term.frequency};
}

// int_0^t s^m e^{z s} ds.
Complex power_exp_integral(int m, Complex z, double t) {
  if (t == 0.0) return 0.0;
  const double zt = std::abs(z) * t;
  if (zt < 1.0) {
    // Taylor series of e^{zs}; terms shrink at least like 1/n!.
    Complex sum = 0.0;
    Complex zn = 1.0;
    double nfact = 1.0;
    for (int n = 0; n < 60; ++n) {
      const Complex term =
          zn / nfact * std::pow(t, n + m + 1) / static_cast<double>(n + m + 1);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      zn *= z;
      nfact *= (n + 1);
    }
    return sum;
  }
  Complex partial = 0.0;
  Complex power = 1.0;
  double kfact = 1.0;
  for (int k = 0; k <= m; ++k) {
    if (k > 0) {
      power *= -z * t;
      kfact *= k;
    }
    partial += power / kfact;
  }
  return factorial(m) / std::pow(-z, m + 1) * (1.0 - std::exp(z * t) * partial);
}

void require_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << what << ": time must be finite and nonnegative, got " << t;
    throw DomainError(msg.str());
  }
}

}  // namespace

Kernel::Kernel(std::vector<KernelTerm> terms) : terms_(std::move(terms)) {
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const KernelTerm& term = terms_[j];
    std::ostringstream where;
    where << "kernel term " << j << ": ";
    if (!std::isfinite(term.coefficient) || !std::isfinite(term.rate) ||
        !std::isfinite(term.frequency)) {
      throw DomainError(where.str() + "non-finite parameter");
    }
    if (term.power < 0) throw DomainError(where.str() + "power must be >= 0");
    if (term.frequency < 0.0) {
      throw DomainError(where.str() + "frequency must be >= 0");
    }
    if (term.frequency == 0.0 && term.phase == Phase::kSin) {
      throw DomainError(where.str() +
                        "zero frequency requires the cosine phase");
    }
    if (active(term) && !(term.rate < 0.0)) {
      throw DomainError(where.str() + "rate must be negative");
    }
  }
}

bool Kernel::is_zero() const noexcept {
  return std::none_of(terms_.begin(), terms_.end(), active);
}

double Kernel::operator()(double t) const {
  require_time(t, "kernel_eval");
  double sum = 0.0;
  for (const KernelTerm& term : terms_) {
    if (!active(term)) continue;
    const double wave = term.phase == Phase::kCos
                            ? std::cos(term.frequency * t)
                            : std::sin(term.frequency * t);
    sum += term.coefficient * std::pow(t, term.power) *
           std::exp(term.rate * t) * wave;
  }
  return sum;
}

Complex Kernel::laplace(Complex lambda) const {
  Complex sum = 0.0;
  for (const KernelTerm& term : terms_) {
    if (!active(term)) continue;
    const Complex z = term_exponent(term);
    const double pole_tol = 1e-14 * (1.0 + std::abs(z));
    if (std::abs(lambda - z) <= pole_tol ||
        std::abs(lambda - std::conj(z)) <= pole_tol) {
      std::ostringstream msg;
      msg << "lambda " << lambda << " coincides with kernel pole " << z;
      throw KernelPoleError(msg.str());
    }
    const double scale = term.coefficient * factorial(term.power);
    const int order = term.power + 1;
    if (term.frequency == 0.0) {
      sum += scale / std::pow(lambda - z, order);
      continue;
    }
    const Complex upper = 1.0 / std::pow(lambda - z, order);
    const Complex lower = 1.0 / std::pow(lambda - std::conj(z), order);
    if (term.phase == Phase::kCos) {
      sum += 0.5 * scale * (upper + lower);
    } else {
      sum += scale * (upper - lower) / Complex(0.0, 2.0);
    }
  }
  return sum;
}

double Kernel::integrated(double t) const {
  require_time(t, "kernel_integrated");
  double sum = 1.0;
  for (const KernelTerm& term : terms_) {
    if (!active(term)) continue;
    const Complex j = power_exp_integral(term.power, term_exponent(term), t);
    sum += term.coefficient * (term.phase == Phase::kCos ? j.real() : j.imag());
  }
  return sum;
}

std::vector<Complex> Kernel::poles() const {
  std::vector<Complex> out;
  auto add = [&out](Complex p) {
    for (const Complex& q : out) {
      if (q == p) return;
    }
    out.push_back(p);
  };
  for (const KernelTerm& term : terms_) {
    if (!active(term)) continue;
    add(term_exponent(term));
    if (term.frequency > 0.0) add(std::conj(term_exponent(term)));
  }
  return out;
}

double Kernel::max_rate() const noexcept {
  double rate = -std::numeric_limits<double>::infinity();
  for (const KernelTerm& term : terms_) {
    if (active(term)) rate = std::max(rate, term.rate);
  }
  return rate;
}

Complex laplace_numeric(const Kernel& k, Complex lambda, double horizon,
                        double step) {
  if (!(horizon > 0.0) || !(step > 0.0)) {
    throw DomainError("laplace_numeric: horizon and step must be positive");
  }
  if (k.is_zero()) return 0.0;
  if (!(lambda.real() > k.max_rate())) {
    throw DomainError(
        "laplace_numeric: Re(lambda) must exceed the largest kernel rate");
  }
  const auto n = static_cast<std::size_t>(std::llround(horizon / step));
  Complex sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * step;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * std::exp(-lambda * t) * k(t);
  }
  return sum * step;
}

Trajectory::Trajectory(double start, double step, std::vector<Vector> samples)
    : start_(start), step_(step), samples_(std::move(samples)) {
  if (!(step_ > 0.0) || !std::isfinite(step_) || !std::isfinite(start_)) {
    throw DomainError("trajectory: step must be positive and start finite");
  }
  if (samples_.empty()) throw DomainError("trajectory: no samples");
  dim_ = samples_.front().size();
  for (const Vector& v : samples_) {
    if (v.size() != dim_) {
      throw DimensionError("trajectory: samples have mixed dimensions");
    }
  }
}

bool Trajectory::covers(double t) const noexcept {
  const double tol = kNodeTolerance * step_;
  return t >= start_ - tol && t <= end() + tol;
}

std::optional<std::size_t> Trajectory::node_index(double t) const noexcept {
  const double s = (t - start_) / step_;
  const double k = std::round(s);
  if (std::abs(s - k) > kNodeTolerance || k < 0.0 ||
      k > static_cast<double>(size() - 1)) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(k);
}

Vector Trajectory::operator()(double t) const {
  Vector out(dim_);
  eval_into(t, out);
  return out;
}

void Trajectory::eval_into(double t, Eigen::Ref<Vector> out) const {
  if (!covers(t)) {
    std::ostringstream msg;
    msg << "trajectory_eval: t=" << t << " outside [" << start_ << ", "
        << end() << "]";
    throw DomainError(msg.str());
  }
  if (auto k = node_index(t)) {
    out = samples_[*k];
    return;
  }
  const double s = (t - start_) / step_;
  auto k0 = static_cast<std::size_t>(std::floor(s));
  k0 = std::min(k0, size() - 2);
  const double frac = s - static_cast<double>(k0);
  out = (1.0 - frac) * samples_[k0] + frac * samples_[k0 + 1];
}

void Trajectory::append(Vector value) {
  if (value.size() != dim_) {
    throw DimensionError("trajectory append: dimension mismatch");
  }
  samples_.push_back(std::move(value));
}

double Trajectory::lp_norm(double p, double a, double b) const {
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
  if (!(a <= b) || !covers(a) || !covers(b)) {
    throw DomainError("lp_norm: interval not inside the covered range");
  }
  if (a == b) return 0.0;
  auto integrand = [&](double t) { return std::pow((*this)(t).norm(), p); };
  // Nodes strictly inside (a, b).
  const double first = std::floor((a - start_) / step_) + 1.0;
  double prev_t = a;
  double prev_v = integrand(a);
  double sum = 0.0;
  for (double k = first;; k += 1.0) {
    const double t = start_ + k * step_;
    if (t >= b - kNodeTolerance * step_) break;
    if (t <= a + kNodeTolerance * step_) continue;
    const double v = integrand(t);
    sum += 0.5 * (t - prev_t) * (prev_v + v);
    prev_t = t;
    prev_v = v;
  }
  sum += 0.5 * (b - prev_t) * (prev_v + integrand(b));
  return std::pow(sum, 1.0 / p);
}

HistorySegment::HistorySegment(const Trajectory& trajectory, double anchor,
                               double horizon, const Trajectory* prehistory)
    : trajectory_(&trajectory),
      prehistory_(prehistory),
      anchor_(anchor),
      horizon_(horizon) {
  if (!(horizon_ > 0.0)) throw DomainError("history: horizon must be positive");
  const double left = anchor_ - horizon_;
  bool ok = trajectory.covers(anchor_);
  if (prehistory_ != nullptr) {
    if (prehistory_->dimension() != trajectory.dimension()) {
      throw DimensionError("history: prehistory dimension mismatch");
    }
    if (left < 0.0) {
      ok = ok && prehistory_->covers(left) && trajectory.covers(0.0);
    } else {
      ok = ok && trajectory.covers(left);
    }
  } else {
    ok = ok && trajectory.covers(left);
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "history_at: insufficient history for window [" << left << ", "
        << anchor_ << "]";
    throw DomainError(msg.str());
  }
}

Vector HistorySegment::operator()(double theta) const {
  Vector out(dimension());
  eval_into(theta, out);
  return out;
}

void HistorySegment::eval_into(double theta, Eigen::Ref<Vector> out) const {
  const double tol = kNodeTolerance * trajectory_->step();
  if (theta > tol || theta < -horizon_ - tol) {
    std::ostringstream msg;
    msg << "history segment: theta=" << theta << " outside [" << -horizon_
        << ", 0]";
    throw DomainError(msg.str());
  }
  const double tau = anchor_ + theta;
  if (prehistory_ != nullptr && tau < -tol) {
    prehistory_->eval_into(tau, out);
  } else {
    trajectory_->eval_into(std::abs(tau) <= tol ? 0.0 : tau, out);
  }
}

HistorySegment history_at(const Trajectory& x, double t, double horizon,
                          const Trajectory* prehistory) {
  return HistorySegment(x, t, horizon, prehistory);
}

}  // namespace delaysys
