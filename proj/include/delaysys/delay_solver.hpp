#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "delaysys/linalg.hpp"
#include "delaysys/measures.hpp"
#include "delaysys/signals.hpp"

namespace delaysys {

/// Problem data for
///   x'(t) = A x(t) + int_0^t a(t-s) A x(s) ds + L x_t + K u_t + f(t),
///   y(t)  = C x_t + D u_t,
///   x(0) = x0,  x_0 = phi,  u_0 = u|[-r, 0].
/// Absent K, C, D act as zero operators; absent u and f are zero signals.
struct SystemSpec {
  Matrix A;
  Kernel kernel;
  DelayMeasure L;
  Vector x0;
  Trajectory phi;
  std::optional<DelayMeasure> K = std::nullopt;
  std::optional<DelayMeasure> C = std::nullopt;
  std::optional<DelayMeasure> D = std::nullopt;
  std::optional<Trajectory> u = std::nullopt;
  std::optional<Trajectory> f = std::nullopt;
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;
  std::string notes = {};

  Eigen::Index state_dim() const noexcept { return A.rows(); }
  double horizon() const noexcept { return L.horizon(); }

  /// Checks shapes, horizons and history coverage; throws SpecError naming
  /// the offending field.
  void validate() const;
};

enum class SolveMethod { kMild, kDirect };

struct SolveDiagnostics {
  std::size_t steps = 0;
  std::size_t corrector_iterations = 0;      // summed over steps
  std::size_t max_corrector_iterations = 0;  // worst single step
  double max_corrector_update = 0.0;         // last update at the worst step
};

struct SolveReport {
  /// x on [-r, T]: phi at nodes before 0, x0 at 0.
  Trajectory x;
  /// phi resampled on the solver grid; read for points strictly before 0.
  Trajectory history;
  /// y on [0, T]; empty when the output dimension is 0.
  std::optional<Trajectory> y;
  SolveMethod method;
  double step;
  SolveDiagnostics diagnostics;

  /// The window x_t with the jump at 0 honoured.
  HistorySegment segment(double t, double horizon) const {
    return history_at(x, t, horizon, &history);
  }
};

/// Variation-of-constants marching
///   x(t) = R(t) x0 + int_0^t R(t-s) (L x_s + K u_s + f(s)) ds.
SolveReport solve_mild(const SystemSpec& spec, double step, double horizon);

/// Direct implicit-trapezoid discretization of the differential form; shares
/// nothing with the resolvent machinery.
SolveReport solve_direct_oracle(const SystemSpec& spec, double step,
                                double horizon);

/// max_n |x_mild - x_direct|_2 / (1 + max_n |x_direct|_2).
double cross_validate(const SystemSpec& spec, double step, double horizon);

/// CSV trace: t, x[0..d), y[0..q); y cells are empty before t = 0.
void write_trace_csv(std::ostream& out, const SolveReport& report);

struct TraceTable {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<std::optional<Vector>> y;
};

TraceTable read_trace_csv(std::istream& in);

}  // namespace delaysys
