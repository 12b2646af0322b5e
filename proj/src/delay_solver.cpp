#include "delaysys/delay_solver.hpp"

#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "delaysys/csv.hpp"
#include "delaysys/errors.hpp"
#include "delaysys/resolvent.hpp"

namespace delaysys {
namespace {

constexpr std::size_t kMaxCorrectorIterations = 3;
constexpr double kCorrectorTolerance = 1e-12;

void check_measure(const std::optional<DelayMeasure>& mu, const char* name,
                   Eigen::Index out_dim, Eigen::Index in_dim, double r) {
  if (!mu) return;
  if (mu->out_dim() != out_dim || mu->in_dim() != in_dim) {
    std::ostringstream msg;
    msg << "expected a " << out_dim << "x" << in_dim << " measure, got "
        << mu->out_dim() << "x" << mu->in_dim();
    throw SpecError(name, msg.str());
  }
  if (std::abs(mu->horizon() - r) > 1e-12 * r) {
    throw SpecError(name, "measure horizon differs from r");
  }
}

std::size_t grid_count(double span, double step, const char* what) {
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "step " << step << " does not divide " << what << " " << span;
    throw DomainError(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

// Samples of every signal on the solver grid t_i = (i - hist) h, i = 0..N-1.
struct Grid {
  double h;
  std::size_t hist;   // index of t = 0
  std::size_t steps;  // T / h
  Eigen::Index d;
  Eigen::Index m;
  Eigen::Index q;
  std::vector<Vector> x;     // filled up to the current node
  std::vector<Vector> u;     // all nodes (empty when m == 0)
  std::vector<Vector> f;     // nodes 0..steps
  Trajectory history;        // phi on [-r, 0]
  Vector phi_at_zero;

  std::size_t size() const { return hist + steps + 1; }
  double time(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(hist)) * h;
  }
};

Trajectory resample(const Trajectory& source, double start, double step,
                    std::size_t count) {
  return Trajectory::sample(start, step, count,
                            [&source](double t) { return source(t); });
}

Grid make_grid(const SystemSpec& spec, double h, double horizon) {
  spec.validate();
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("solver: step must be positive");
  }
  if (!(horizon > 0.0)) throw DomainError("solver: horizon must be positive");
  const double r = spec.horizon();
  const std::size_t hist = grid_count(r, h, "delay horizon r");
  const std::size_t steps = grid_count(horizon, h, "time horizon T");
  if (hist == 0 || steps == 0) throw DomainError("solver: step too large");

  Trajectory history = resample(spec.phi, -r, h, hist + 1);
  Grid g{h, hist, steps, spec.state_dim(), spec.input_dim, spec.output_dim,
         {}, {}, {}, history, history[hist]};
  g.x.reserve(g.size());
  for (std::size_t i = 0; i < hist; ++i) g.x.push_back(history[i]);

  if (g.m > 0) {
    if (spec.u) {
      if (!spec.u->covers(-r) || !spec.u->covers(horizon)) {
        throw DomainError("solver: input u must cover [-r, T]");
      }
      g.u = resample(*spec.u, -r, h, g.size()).samples();
    } else {
      g.u.assign(g.size(), Vector::Zero(g.m));
    }
  }
  if (spec.f) {
    if (!spec.f->covers(0.0) || !spec.f->covers(horizon)) {
      throw DomainError("solver: forcing f must cover [0, T]");
    }
    g.f = resample(*spec.f, 0.0, h, steps + 1).samples();
  } else {
    g.f.assign(steps + 1, Vector::Zero(g.d));
  }
  return g;
}

// sum_e right_e v(i+e)^+ + left_e v(i+e)^-, where the left value at the jump
// node is `jump_left`. The newest left weight (offset 0) is skipped when
// `skip_newest` is set because v(i) is not known yet.
void apply_stencil(const DelayStencil& stencil, const std::vector<Vector>& v,
                   std::size_t node, std::size_t jump_node,
                   const Vector* jump_left, bool skip_newest,
                   Eigen::Ref<Vector> out) {
  for (const StencilEntry& e : stencil.entries()) {
    const auto i = static_cast<std::ptrdiff_t>(node) + e.offset;
    if (i < 0) throw DomainError("solver: stencil reaches before -r");
    const auto idx = static_cast<std::size_t>(i);
    if (e.offset == 0) {
      if (!skip_newest) {
        out.noalias() += e.left * (idx == jump_node && jump_left ? *jump_left : v[idx]);
      }
      continue;
    }
    out.noalias() += e.right * v[idx];
    if (idx == jump_node && jump_left) {
      out.noalias() += e.left * *jump_left;
    } else {
      out.noalias() += e.left * v[idx];
    }
  }
}

struct Operators {
  DelayStencil L;
  std::optional<DelayStencil> K;
  std::optional<DelayStencil> C;
  std::optional<DelayStencil> D;
  bool coupled;

  Operators(const SystemSpec& spec, double h)
      : L(spec.L, h), coupled(!L.newest_weight().isZero(0.0)) {
    if (spec.K && spec.input_dim > 0) K.emplace(*spec.K, h);
    if (spec.C && spec.output_dim > 0) C.emplace(*spec.C, h);
    if (spec.D && spec.output_dim > 0 && spec.input_dim > 0) D.emplace(*spec.D, h);
  }
};

// L x_t + K u_t + f(t) at node n >= 0 without the x(t_n) coupling (n > 0).
Vector delay_input(const Operators& ops, const Grid& g, std::size_t n) {
  const std::size_t node = g.hist + n;
  Vector out = g.f[n];
  apply_stencil(ops.L, g.x, node, g.hist, &g.phi_at_zero, n > 0, out);
  if (ops.K) apply_stencil(*ops.K, g.u, node, g.hist, nullptr, false, out);
  return out;
}

// Runs the predictor-corrector on x = update(x_prev).
Vector correct(const Vector& predictor, bool coupled,
               const std::function<Vector(const Vector&)>& update, double t,
               SolveDiagnostics& diag) {
  if (!coupled) {
    diag.corrector_iterations += 1;
    diag.max_corrector_iterations = std::max<std::size_t>(diag.max_corrector_iterations, 1);
    return update(predictor);
  }
  // One quadrature update, then at most kMaxCorrectorIterations corrections.
  Vector prev = predictor;
  for (std::size_t k = 1; k <= kMaxCorrectorIterations + 1; ++k) {
    Vector next = update(prev);
    const double change = (next - prev).norm();
    if (change <= kCorrectorTolerance * (1.0 + next.norm())) {
      diag.corrector_iterations += k;
      if (k >= diag.max_corrector_iterations) {
        diag.max_corrector_iterations = k;
        diag.max_corrector_update = change;
      }
      return next;
    }
    prev = std::move(next);
  }
  std::ostringstream msg;
  msg << "solver: corrector did not converge at t = " << t
      << "; step too large";
  throw NumericalError(msg.str());
}

Vector predict(const Grid& g, std::size_t n) {
  const std::size_t node = g.hist + n;
  if (n >= 2) return 2.0 * g.x[node - 1] - g.x[node - 2];
  return g.x[node - 1];
}

std::optional<Trajectory> outputs(const Operators& ops, const Grid& g) {
  if (g.q == 0) return std::nullopt;
  std::vector<Vector> y;
  y.reserve(g.steps + 1);
  for (std::size_t n = 0; n <= g.steps; ++n) {
    const std::size_t node = g.hist + n;
    Vector out = Vector::Zero(g.q);
    if (ops.C) apply_stencil(*ops.C, g.x, node, g.hist, &g.phi_at_zero, false, out);
    if (ops.D) apply_stencil(*ops.D, g.u, node, g.hist, nullptr, false, out);
    y.push_back(std::move(out));
  }
  return Trajectory(0.0, g.h, std::move(y));
}

void require_finite(const Vector& v, double t) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "solver: non-finite state at t = " << t;
    throw NumericalError(msg.str());
  }
}

SolveReport finish(Grid& g, const Operators& ops, SolveMethod method,
                   SolveDiagnostics diag) {
  diag.steps = g.steps;
  std::optional<Trajectory> y = outputs(ops, g);
  const double start = g.time(0);
  return SolveReport{Trajectory(start, g.h, std::move(g.x)), std::move(g.history),
                     std::move(y), method, g.h, diag};
}

}  // namespace

void SystemSpec::validate() const {
  const Eigen::Index d = A.rows();
  if (d < 1 || A.cols() != d) throw SpecError("A", "must be a nonempty square matrix");
  if (!A.allFinite()) throw SpecError("A", "non-finite entry");
  if (x0.size() != d) throw SpecError("x0", "length must equal d");
  if (phi.dimension() != d) throw SpecError("phi", "sample dimension must equal d");
  const double r = L.horizon();
  if (L.out_dim() != d || L.in_dim() != d) throw SpecError("L", "must be a d x d measure");
  if (input_dim < 0 || output_dim < 0) throw SpecError("m", "negative dimension");
  check_measure(K, "K", d, input_dim, r);
  check_measure(C, "C", output_dim, d, r);
  check_measure(D, "D", output_dim, input_dim, r);
  if (!phi.covers(-r) || !phi.covers(0.0)) {
    throw SpecError("phi", "initial history must cover [-r, 0]");
  }
  if (u) {
    if (u->dimension() != input_dim) throw SpecError("u", "sample dimension must equal m");
    if (!u->covers(-r) || !u->covers(0.0)) {
      throw SpecError("u", "input must cover [-r, 0]");
    }
  }
  if (f) {
    if (f->dimension() != d) throw SpecError("f", "sample dimension must equal d");
    if (!f->covers(0.0)) throw SpecError("f", "forcing must start at or before 0");
  }
}

SolveReport solve_mild(const SystemSpec& spec, double step, double horizon) {
  Grid g = make_grid(spec, step, horizon);
  const Operators ops(spec, step);
  const ResolventFamily family =
      compute_resolvent(spec.A, spec.kernel, step, horizon);
  const Eigen::Index d = g.d;
  const Matrix& newest = ops.L.newest_weight();

  std::vector<Vector> delay(g.steps + 1);  // g_m = L x_m + K u_m + f_m
  SolveDiagnostics diag;
  g.x.push_back(spec.x0);
  delay[0] = delay_input(ops, g, 0);
  require_finite(delay[0], 0.0);

  Vector base(d);
  for (std::size_t n = 1; n <= g.steps; ++n) {
    base.noalias() = family[n] * spec.x0;
    Vector sum = 0.5 * (family[n] * delay[0]);
    for (std::size_t m = 1; m < n; ++m) sum.noalias() += family[n - m] * delay[m];
    base += step * sum;

    const Vector known = delay_input(ops, g, n);
    auto update = [&](const Vector& guess) -> Vector {
      return base + (0.5 * step) * (known + newest * guess);
    };
    Vector xn = correct(predict(g, n), ops.coupled, update, g.time(g.hist + n), diag);
    require_finite(xn, g.time(g.hist + n));
    delay[n] = known + newest * xn;
    g.x.push_back(std::move(xn));
  }
  return finish(g, ops, SolveMethod::kMild, diag);
}

SolveReport solve_direct_oracle(const SystemSpec& spec, double step,
                                double horizon) {
  Grid g = make_grid(spec, step, horizon);
  const Operators ops(spec, step);
  const Eigen::Index d = g.d;
  const Matrix& a_mat = spec.A;
  const Matrix& newest = ops.L.newest_weight();

  std::vector<double> kernel_table(g.steps + 1);
  for (std::size_t j = 0; j <= g.steps; ++j) {
    kernel_table[j] = spec.kernel(static_cast<double>(j) * step);
  }
  const double a0 = kernel_table[0];
  const Matrix identity = Matrix::Identity(d, d);
  const Matrix system =
      identity - (0.5 * step) * a_mat - (0.25 * step * step * a0) * a_mat;
  Eigen::PartialPivLU<Matrix> lu(system);
  if (!(lu.rcond() > 1e-13)) {
    std::ostringstream msg;
    msg << "solve_direct_oracle: implicit stage singular for h = " << step;
    throw SingularMatrixError(msg.str());
  }

  SolveDiagnostics diag;
  std::vector<Vector> ax;  // A x_m
  ax.reserve(g.steps + 1);
  g.x.push_back(spec.x0);
  ax.push_back(a_mat * spec.x0);
  Vector delay0 = delay_input(ops, g, 0);
  require_finite(delay0, 0.0);
  Vector rate = ax[0] + delay0;  // F_0: memory term vanishes at t = 0

  Vector memory(d);
  for (std::size_t n = 1; n <= g.steps; ++n) {
    memory = (0.5 * kernel_table[n]) * ax[0];
    for (std::size_t j = 1; j < n; ++j) memory.noalias() += kernel_table[n - j] * ax[j];

    const Vector known = delay_input(ops, g, n);
    const Vector rhs = g.x.back() + (0.5 * step) * rate +
                       (0.5 * step) * (step * memory + known);
    auto update = [&](const Vector& guess) -> Vector {
      return lu.solve(rhs + (0.5 * step) * (newest * guess));
    };
    Vector xn = correct(predict(g, n), ops.coupled, update, g.time(g.hist + n), diag);
    require_finite(xn, g.time(g.hist + n));
    Vector axn = a_mat * xn;
    rate = axn + step * (memory + (0.5 * a0) * axn) + known + newest * xn;
    ax.push_back(std::move(axn));
    g.x.push_back(std::move(xn));
  }
  return finish(g, ops, SolveMethod::kDirect, diag);
}

double cross_validate(const SystemSpec& spec, double step, double horizon) {
  const SolveReport mild = solve_mild(spec, step, horizon);
  const SolveReport direct = solve_direct_oracle(spec, step, horizon);
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < mild.x.size(); ++i) {
    diff = std::max(diff, (mild.x[i] - direct.x[i]).norm());
    scale = std::max(scale, direct.x[i].norm());
  }
  return diff / (1.0 + scale);
}

void write_trace_csv(std::ostream& out, const SolveReport& report) {
  const Eigen::Index d = report.x.dimension();
  const Eigen::Index q = report.y ? report.y->dimension() : 0;
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x[" << i << "]";
  for (Eigen::Index i = 0; i < q; ++i) out << ",y[" << i << "]";
  out << '\n';
  const std::size_t zero = report.x.size() - (report.y ? report.y->size() : 0);
  for (std::size_t k = 0; k < report.x.size(); ++k) {
    out << format_double(report.x.time(k));
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(report.x[k](i));
    for (Eigen::Index i = 0; i < q; ++i) {
      out << ',';
      if (k >= zero) out << format_double((*report.y)[k - zero](i));
    }
    out << '\n';
  }
}

TraceTable read_trace_csv(std::istream& in) {
  TraceTable table;
  std::string line;
  if (!std::getline(in, line)) throw DomainError("trace csv: missing header");
  Eigen::Index d = 0;
  Eigen::Index q = 0;
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (cell.rfind("x[", 0) == 0) ++d;
      if (cell.rfind("y[", 0) == 0) ++q;
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    while (static_cast<Eigen::Index>(cells.size()) < 1 + d + q) cells.emplace_back();
    table.t.push_back(std::stod(cells[0]));
    Vector x(d);
    for (Eigen::Index i = 0; i < d; ++i) x(i) = std::stod(cells[1 + i]);
    table.x.push_back(std::move(x));
    if (q > 0 && !cells[1 + d].empty()) {
      Vector y(q);
      for (Eigen::Index i = 0; i < q; ++i) y(i) = std::stod(cells[1 + d + i]);
      table.y.emplace_back(std::move(y));
    } else {
      table.y.emplace_back(std::nullopt);
    }
  }
  return table;
}

}  // namespace delaysys
