#pragma once

#include <utility>

#include "delaysys/measures.hpp"
#include "delaysys/signals.hpp"

namespace delaysys {

/// A function on [-r, 0] sampled on a grid that starts at -r.
using ShiftState = Trajectory;

/// Left shift semigroup: (S(t) phi)(theta) = phi(t + theta) for
/// t + theta < 0 and 0 otherwise; S(0) is the identity. `t` must be a grid
/// multiple.
ShiftState shift_apply(const ShiftState& phi, double t);

/// Control map: (Phi_t u)(theta) = u(t + theta) on [-t, 0] and 0 on
/// [-r, -t); Phi_0 = 0. The window is sampled on u's grid.
ShiftState control_map(const Trajectory& u, double t, double horizon);

/// (F u)(t) = L Phi_t u on the grid of u over [0, tau].
Trajectory input_output_map(const DelayMeasure& mu, const Trajectory& u,
                            double tau);

/// (|F u|_{L^p[0,tau]}, |mu|([-min(tau,r), 0]) |u|_{L^p[0,tau]}).
std::pair<double, double> admissibility_check(const DelayMeasure& mu,
                                              const Trajectory& u, double tau,
                                              double p);

/// Sup-norm defect of Phi_{t+s} u = S(t) Phi_s u|[0,s] + Phi_t u(. + s) over
/// the window grid.
double composition_check(const Trajectory& u, double t, double s,
                         double horizon);

}  // namespace delaysys
