#include "delaysys/shift_diag.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delaysys/errors.hpp"

namespace delaysys {
namespace {

std::size_t grid_multiple(double value, double step, const char* what) {
  if (!(value >= 0.0)) {
    std::ostringstream msg;
    msg << what << " must be nonnegative, got " << value;
    throw DomainError(msg.str());
  }
  const double ratio = value / step;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << what << " = " << value << " is not a multiple of the grid step "
        << step;
    throw DomainError(msg.str());
  }
  return static_cast<std::size_t>(k);
}

std::size_t origin_index(const Trajectory& u) {
  auto idx = u.node_index(0.0);
  if (!idx) throw DomainError("control signal has no grid node at t = 0");
  return *idx;
}

}  // namespace

ShiftState shift_apply(const ShiftState& phi, double t) {
  const std::size_t shift = grid_multiple(t, phi.step(), "shift time");
  if (shift == 0) return phi;
  const std::size_t last = phi.size() - 1;
  std::vector<Vector> out;
  out.reserve(phi.size());
  for (std::size_t k = 0; k <= last; ++k) {
    out.push_back(k + shift < last ? phi[k + shift]
                                   : Vector::Zero(phi.dimension()));
  }
  return ShiftState(phi.start(), phi.step(), std::move(out));
}

ShiftState control_map(const Trajectory& u, double t, double horizon) {
  const double h = u.step();
  const std::size_t window = grid_multiple(horizon, h, "delay horizon");
  if (window == 0) throw DomainError("control_map: horizon shorter than a step");
  const std::size_t filled = grid_multiple(t, h, "control time");
  const std::size_t zero = origin_index(u);
  if (zero + filled >= u.size()) {
    std::ostringstream msg;
    msg << "control_map: input does not cover [0, " << t << "]";
    throw DomainError(msg.str());
  }
  std::vector<Vector> out(window + 1, Vector::Zero(u.dimension()));
  if (filled > 0) {
    // theta_k = (k - window) h >= -t  <=>  k >= window - filled.
    const std::size_t first = window > filled ? window - filled : 0;
    for (std::size_t k = first; k <= window; ++k) {
      out[k] = u[zero + filled + k - window];
    }
  }
  return ShiftState(-static_cast<double>(window) * h, h, std::move(out));
}

Trajectory input_output_map(const DelayMeasure& mu, const Trajectory& u,
                            double tau) {
  const double h = u.step();
  const std::size_t count = grid_multiple(tau, h, "tau");
  if (mu.in_dim() != u.dimension()) {
    throw DimensionError("input_output_map: input dimension mismatch");
  }
  std::vector<Vector> out;
  out.reserve(count + 1);
  for (std::size_t n = 0; n <= count; ++n) {
    const ShiftState window = control_map(u, static_cast<double>(n) * h, mu.horizon());
    out.push_back(measure_apply(mu, history_at(window, 0.0, mu.horizon())));
  }
  return Trajectory(0.0, h, std::move(out));
}

std::pair<double, double> admissibility_check(const DelayMeasure& mu,
                                              const Trajectory& u, double tau,
                                              double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw DomainError("admissibility_check: p must lie in (1, inf)");
  }
  if (!(tau > 0.0)) throw DomainError("admissibility_check: tau must be positive");
  const Trajectory response = input_output_map(mu, u, tau);
  const double lhs = response.lp_norm(p, 0.0, tau);
  const double rhs = total_variation(mu, std::min(tau, mu.horizon())) *
                     u.lp_norm(p, 0.0, tau);
  return {lhs, rhs};
}

double composition_check(const Trajectory& u, double t, double s,
                         double horizon) {
  const double h = u.step();
  const std::size_t ts = grid_multiple(t, h, "t");
  const std::size_t ss = grid_multiple(s, h, "s");
  const std::size_t zero = origin_index(u);
  if (zero + ts + ss >= u.size()) {
    throw DomainError("composition_check: input does not cover [0, t + s]");
  }
  const double t_grid = static_cast<double>(ts) * h;
  const double s_grid = static_cast<double>(ss) * h;

  const ShiftState whole = control_map(u, t_grid + s_grid, horizon);

  const std::vector<Vector> head(u.samples().begin() + zero,
                                 u.samples().begin() + zero + ss + 1);
  const Trajectory restricted(0.0, h, head);
  const ShiftState carried = shift_apply(control_map(restricted, s_grid, horizon), t_grid);

  std::vector<Vector> tail(u.samples().begin() + zero + ss, u.samples().end());
  const Trajectory advanced(0.0, h, std::move(tail));  // u(. + s)
  const ShiftState fresh = control_map(advanced, t_grid, horizon);

  double defect = 0.0;
  for (std::size_t k = 0; k < whole.size(); ++k) {
    defect = std::max(
        defect, (whole[k] - carried[k] - fresh[k]).lpNorm<Eigen::Infinity>());
  }
  return defect;
}

}  // namespace delaysys
