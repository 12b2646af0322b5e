#include "delaysys/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "delaysys/delay_solver.hpp"
#include "delaysys/errors.hpp"
#include "delaysys/measures.hpp"
#include "delaysys/resolvent.hpp"
#include "delaysys/shift_diag.hpp"
#include "delaysys/signals.hpp"
#include "delaysys/spectral.hpp"

namespace delaysys {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  std::ostringstream out;
  out << std::scientific << std::setprecision(3) << v;
  return out.str();
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                double scale) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * n(rng);
  }
  return m;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

DelayMeasure random_measure(std::mt19937_64& rng, double r, Eigen::Index rows,
                            Eigen::Index cols) {
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;
  while (atoms.empty() && pieces.empty()) {
    const int n_atoms = uniform_int(rng, 0, 2);
    for (int k = 0; k < n_atoms; ++k) {
      const double theta = -uniform(rng, 0.02, 1.0) * r;
      if (std::any_of(atoms.begin(), atoms.end(),
                      [&](const Atom& a) { return std::abs(a.theta - theta) < 1e-3; })) {
        continue;
      }
      atoms.push_back(Atom{theta, gaussian(rng, rows, cols, 0.7)});
    }
    if (uniform_int(rng, 0, 1) == 1) {
      double a = -uniform(rng, 0.0, 1.0) * r;
      double b = -uniform(rng, 0.0, 1.0) * r;
      if (a > b) std::swap(a, b);
      if (b - a > 1e-3 * r) {
        DensityPiece piece{a, b, {}};
        const int degree = uniform_int(rng, 0, 3);
        for (int k = 0; k <= degree; ++k) piece.coeffs.push_back(gaussian(rng, rows, cols, 0.7));
        pieces.push_back(std::move(piece));
      }
    }
  }
  return DelayMeasure(r, rows, cols, std::move(atoms), std::move(pieces));
}

SystemSpec steps_spec() {
  DelayMeasure L(1.0, 1, 1, {Atom{-1.0, scalar(1.0)}});
  return SystemSpec{scalar(0.0), Kernel(), L, Vector::Ones(1),
                    Trajectory::constant(-1.0, 1.0, 2, Vector::Ones(1))};
}

SystemSpec stress_spec() {
  Matrix a(2, 2);
  a << -1.0, 0.3, -0.2, -0.5;
  Matrix m_atom(2, 2);
  m_atom << 0.2, -0.1, 0.05, 0.1;
  Matrix c0(2, 2);
  c0 << 0.1, 0.0, 0.0, 0.1;
  Matrix c1(2, 2);
  c1 << 0.05, 0.02, 0.0, 0.03;
  DelayMeasure L(1.0, 2, 2, {Atom{-0.7, m_atom}},
                 {DensityPiece{-1.0, -0.2, {c0, c1}}});
  Matrix k_atom(2, 1);
  k_atom << 1.0, 0.5;
  DelayMeasure K(1.0, 2, 1, {Atom{-0.5, k_atom}});

  const double h = 1e-3;
  auto phi = Trajectory::sample(-1.0, h, 1001, [](double t) {
    Vector v(2);
    v << 1.0 + t, std::cos(t);
    return v;
  });
  auto u = Trajectory::sample(-1.0, h, 6001, [](double t) {
    return Vector::Constant(1, std::sin(2.0 * t));
  });
  auto f = Trajectory::sample(0.0, h, 5001, [](double t) {
    Vector v(2);
    v << std::cos(t), std::exp(-t);
    return v;
  });
  SystemSpec spec{a, Kernel::exponential(1.0, -2.0), L, phi[1000], phi};
  spec.K = K;
  spec.u = u;
  spec.f = f;
  spec.input_dim = 1;
  return spec;
}

CriterionResult finish(int id, const char* name, bool passed, std::string detail,
                       Clock::time_point start) {
  return CriterionResult{id, name, passed, std::move(detail), seconds_since(start)};
}

// Two-by-two classical delay determinant det(lambda I - A - sum e^{lambda theta} M)
// and its derivative, written out entrywise.
struct ClassicalDelay {
  Matrix a;
  std::vector<Atom> atoms;

  std::pair<Complex, Complex> det_and_derivative(Complex z) const {
    Complex d[2][2];
    Complex dd[2][2];
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        d[i][j] = (i == j ? z : Complex(0.0)) - a(i, j);
        dd[i][j] = i == j ? 1.0 : 0.0;
        for (const Atom& at : atoms) {
          const Complex e = std::exp(z * at.theta);
          d[i][j] -= e * at.weight(i, j);
          dd[i][j] -= at.theta * e * at.weight(i, j);
        }
      }
    }
    const Complex det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    const Complex der = dd[0][0] * d[1][1] + d[0][0] * dd[1][1] -
                        dd[0][1] * d[1][0] - d[0][1] * dd[1][0];
    return {det, der};
  }
};

int boundary_winding(const ClassicalDelay& f, const Rectangle& rect, int samples) {
  const Complex corners[5] = {{rect.re_min, rect.im_min}, {rect.re_max, rect.im_min},
                              {rect.re_max, rect.im_max}, {rect.re_min, rect.im_max},
                              {rect.re_min, rect.im_min}};
  double total = 0.0;
  Complex prev = f.det_and_derivative(corners[0]).first;
  for (int e = 0; e < 4; ++e) {
    for (int k = 1; k <= samples; ++k) {
      const Complex z = corners[e] + (corners[e + 1] - corners[e]) *
                                         (static_cast<double>(k) / samples);
      const Complex cur = f.det_and_derivative(z).first;
      total += std::arg(cur / prev);
      prev = cur;
    }
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

std::vector<Complex> newton_sweep(const ClassicalDelay& f, const Rectangle& rect,
                                  int starts) {
  std::vector<Complex> roots;
  for (int i = 0; i < starts; ++i) {
    for (int j = 0; j < starts; ++j) {
      Complex z(rect.re_min + (i + 0.5) * (rect.re_max - rect.re_min) / starts,
                rect.im_min + (j + 0.5) * (rect.im_max - rect.im_min) / starts);
      bool converged = false;
      for (int it = 0; it < 60; ++it) {
        const auto [v, dv] = f.det_and_derivative(z);
        if (dv == Complex(0.0)) break;
        const Complex step = v / dv;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) {
          converged = true;
          break;
        }
      }
      if (!converged || !rect.contains(z)) continue;
      if (std::none_of(roots.begin(), roots.end(),
                       [&](Complex w) { return std::abs(w - z) < 1e-7; })) {
        roots.push_back(z);
      }
    }
  }
  return roots;
}

}  // namespace

Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
  const Eigen::MatrixXd scaled = m / std::ldexp(1.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 18; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

CriterionResult check_resolvent_closed_form() {
  const auto start = Clock::now();
  const Matrix a = scalar(-1.0);
  const Kernel k = Kernel::exponential(1.0, -1.0);
  auto error = [&](double h, double* seconds) {
    const auto t0 = Clock::now();
    const ResolventFamily fam = compute_resolvent(a, k, h, 5.0);
    if (seconds) *seconds = seconds_since(t0);
    double e = 0.0;
    for (std::size_t n = 0; n < fam.size(); ++n) {
      const double t = static_cast<double>(n) * h;
      e = std::max(e, std::abs(fam[n](0, 0) - std::exp(-t) * std::cos(t)));
    }
    return e;
  };
  double runtime = 0.0;
  const double coarse = error(1e-3, &runtime);
  const double fine = error(5e-4, nullptr);
  const double ratio = coarse / fine;
  const bool ok = coarse <= 1e-4 && ratio >= 3.5 && ratio <= 4.5 && runtime <= 5.0;
  return finish(1, "resolvent closed form", ok,
                "err(h=1e-3)=" + sci(coarse) + " ratio=" + sci(ratio) +
                    " runtime=" + sci(runtime) + "s",
                start);
}

CriterionResult check_semigroup_reduction() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1201);
  const double h = 1e-3;
  double worst = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    Matrix g = gaussian(rng, 3, 3, 1.0);
    const Matrix a = g * (uniform(rng, 0.0, 2.0) / spectral_norm(g));
    const ResolventFamily fam = compute_resolvent(a, Kernel(), h, 2.0);
    for (std::size_t n = 0; n < fam.size(); ++n) {
      const double t = static_cast<double>(n) * h;
      worst = std::max(worst, spectral_norm(fam[n] - expm_taylor(t * a)));
    }
  }
  return finish(2, "semigroup reduction", worst <= 1e-6,
                "max |R(t) - expm(tA)|_2 = " + sci(worst), start);
}

CriterionResult check_method_of_steps() {
  const auto start = Clock::now();
  const SystemSpec spec = steps_spec();
  double worst = 0.0;
  std::ostringstream detail;
  for (const SolveReport& rep :
       {solve_mild(spec, 1e-3, 2.0), solve_direct_oracle(spec, 1e-3, 2.0)}) {
    const double e1 = std::abs(rep.x(1.0)(0) - 2.0);
    const double e2 = std::abs(rep.x(2.0)(0) - 3.5);
    worst = std::max({worst, e1, e2});
    if (!detail.str().empty()) detail << " ";
    detail << (rep.method == SolveMethod::kMild ? "mild" : "direct") << " |x(1)-2|="
           << sci(e1) << " |x(2)-3.5|=" << sci(e2);
  }
  return finish(3, "method of steps", worst <= 1e-5, detail.str(), start);
}

CriterionResult check_two_scheme_agreement() {
  const auto start = Clock::now();
  const double gap = cross_validate(stress_spec(), 1e-3, 5.0);
  const double runtime = seconds_since(start);
  return finish(4, "two-scheme agreement", gap <= 1e-3 && runtime <= 30.0,
                "cross_validate=" + sci(gap) + " runtime=" + sci(runtime) + "s", start);
}

CriterionResult check_characteristic_root() {
  const auto start = Clock::now();
  const double half_pi = std::numbers::pi / 2.0;
  const CharacteristicFunction cf(scalar(0.0), Kernel(),
                                  DelayMeasure(1.0, 1, 1, {Atom{-1.0, scalar(-half_pi)}}));
  const SpectrumReport rep = find_roots(cf, Rectangle{-1.0, 1.0, 0.0, 2.0}, 32, 1e-12);
  bool ok = rep.roots.size() == 1;
  std::ostringstream detail;
  detail << rep.roots.size() << " roots";
  if (ok) {
    const double e = std::abs(rep.roots[0].lambda - Complex(0.0, half_pi));
    ok = e <= 1e-8 && rep.roots[0].winding == 1;
    detail << ", |lambda - i pi/2|=" << sci(e) << ", winding=" << rep.roots[0].winding;
  }
  return finish(5, "characteristic root", ok, detail.str(), start);
}

CriterionResult check_factorization_identity() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1206);
  double worst = 0.0;
  for (int sys = 0; sys < 5; ++sys) {
    const Eigen::Index d = uniform_int(rng, 2, 3);
    std::vector<KernelTerm> terms;
    const int n_terms = uniform_int(rng, 1, 2);
    for (int k = 0; k < n_terms; ++k) {
      KernelTerm t;
      t.coefficient = uniform(rng, -1.0, 1.0);
      t.power = uniform_int(rng, 0, 1);
      t.rate = uniform(rng, -3.0, -0.5);
      t.frequency = uniform(rng, 0.0, 2.0);
      t.phase = uniform_int(rng, 0, 1) ? Phase::kSin : Phase::kCos;
      terms.push_back(t);
    }
    const CharacteristicFunction cf(gaussian(rng, d, d, 1.0), Kernel(terms),
                                    random_measure(rng, 1.0, d, d));
    for (int i = 0; i < 20; ++i) {
      const Complex z(uniform(rng, -0.3, 2.0), uniform(rng, -3.0, 3.0));
      const Complex det = char_det(cf, z);
      const auto [e, b] = factored_det(cf, z);
      worst = std::max(worst, std::abs(det - e * b) / (1.0 + std::abs(det)));
    }
  }
  return finish(6, "factorization identity", worst <= 1e-10,
                "max relative gap=" + sci(worst), start);
}

CriterionResult check_admissibility() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1207);
  const double h = 0.01;
  int violations = 0;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const double r = 0.5 * uniform_int(rng, 1, 3);
    const Eigen::Index rows = uniform_int(rng, 1, 2);
    const Eigen::Index cols = uniform_int(rng, 1, 2);
    const DelayMeasure mu = random_measure(rng, r, rows, cols);
    const std::size_t steps = static_cast<std::size_t>(uniform_int(rng, 5, static_cast<int>(2.0 * r / h)));
    const double tau = static_cast<double>(steps) * h;
    // Piecewise linear with knots every 10 nodes, vanishing at 0.
    const std::size_t knots = steps / 10 + 2;
    std::vector<Vector> knot_values(knots);
    for (std::size_t k = 0; k < knots; ++k) {
      knot_values[k] = k == 0 ? Vector::Zero(cols) : gaussian(rng, cols, 1, 1.0);
    }
    std::vector<Vector> samples(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
      const std::size_t k = n / 10;
      const double w = static_cast<double>(n % 10) / 10.0;
      samples[n] = (1.0 - w) * knot_values[k] + w * knot_values[k + 1];
    }
    const Trajectory u(0.0, h, std::move(samples));
    const double p = uniform(rng, 1.1, 4.0);
    const auto [lhs, rhs] = admissibility_check(mu, u, tau, p);
    worst = std::max(worst, rhs > 0.0 ? lhs / rhs : 0.0);
    if (lhs > rhs * (1.0 + 1e-8)) ++violations;
  }
  return finish(7, "admissibility inequality", violations == 0,
                std::to_string(violations) + " violations, max lhs/rhs=" + sci(worst),
                start);
}

CriterionResult check_composition() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1208);
  const double h = 0.01;
  int violations = 0;
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const double r = h * uniform_int(rng, 20, 150);
    const int t_steps = uniform_int(rng, 0, 200);
    const int s_steps = uniform_int(rng, 0, 200);
    const Eigen::Index dim = uniform_int(rng, 1, 3);
    std::vector<Vector> samples;
    for (int n = 0; n <= t_steps + s_steps + uniform_int(rng, 0, 20); ++n) {
      samples.push_back(gaussian(rng, dim, 1, 1.0));
    }
    const Trajectory u(0.0, h, std::move(samples));
    const double defect = composition_check(u, t_steps * h, s_steps * h, r);
    worst = std::max(worst, defect);
    if (!(defect <= 1e-12)) ++violations;
  }
  return finish(8, "composition law", violations == 0,
                std::to_string(violations) + " violations, max defect=" + sci(worst),
                start);
}

CriterionResult check_yosida() {
  const auto start = Clock::now();
  Matrix m(2, 2);
  m << 0.8, -0.3, 0.2, 0.5;
  Matrix c0(2, 2);
  c0 << 0.5, 0.1, 0.0, -0.4;
  Matrix c1(2, 2);
  c1 << -0.3, 0.2, 0.1, 0.3;
  Matrix c2(2, 2);
  c2 << 0.2, 0.0, -0.1, 0.1;
  const DelayMeasure mu(1.0, 2, 2, {Atom{-0.6, m}},
                        {DensityPiece{-1.0, -0.1, {c0, c1, c2}}});
  auto phi = Trajectory::sample(-1.0, 1e-4, 10001, [](double t) {
    Vector v(2);
    v << std::sin(3.0 * t) + t * t, std::cos(2.0 * t);
    return v;
  });
  const HistorySegment seg = history_at(phi, 0.0, 1.0);
  const Vector exact = measure_apply(mu, seg);
  std::vector<double> errors;
  for (double s : {1e1, 1e2, 1e3, 1e4}) errors.push_back((yosida_approx(mu, seg, s) - exact).norm());
  bool ok = errors.back() <= 1e-3 * (1.0 + exact.norm());
  std::ostringstream detail;
  detail << "errors";
  for (std::size_t k = 0; k < errors.size(); ++k) {
    detail << " " << sci(errors[k]);
    if (k > 0 && errors[k] > errors[k - 1]) ok = false;
  }
  return finish(9, "Yosida approximation", ok, detail.str(), start);
}

CriterionResult check_degenerate_cases() {
  const auto start = Clock::now();
  std::ostringstream detail;
  bool ok = true;

  ClassicalDelay classical;
  classical.a.resize(2, 2);
  classical.a << -0.5, 1.0, -1.0, -0.3;
  Matrix m1(2, 2);
  m1 << -0.4, 0.0, 0.2, -0.3;
  Matrix m2(2, 2);
  m2 << 0.1, 0.2, 0.0, -0.2;
  classical.atoms = {Atom{-1.0, m1}, Atom{-0.4, m2}};
  const Rectangle rect{-2.05, 1.05, -6.05, 6.05};
  const CharacteristicFunction cf(classical.a, Kernel(),
                                  DelayMeasure(1.0, 2, 2, classical.atoms));
  const SpectrumReport rep = find_roots(cf, rect, 32, 1e-12);
  const std::vector<Complex> reference = newton_sweep(classical, rect, 40);
  const int count = boundary_winding(classical, rect, 20000);
  double worst = 0.0;
  for (const RootInfo& root : rep.roots) {
    double best = std::numeric_limits<double>::infinity();
    for (Complex z : reference) best = std::min(best, std::abs(z - root.lambda));
    worst = std::max(worst, best);
  }
  int multiplicity = 0;
  for (const RootInfo& root : rep.roots) multiplicity += root.winding;
  const bool classical_ok = static_cast<int>(rep.roots.size()) == count &&
                            static_cast<int>(reference.size()) == count &&
                            multiplicity == count && worst <= 1e-9;
  detail << "a=0: " << rep.roots.size() << " roots, reference " << reference.size()
         << ", boundary count " << count << ", max gap " << sci(worst);
  ok = ok && classical_ok;

  Matrix a(2, 2);
  a << -1.0, 2.0, 0.0, -3.0;
  const Kernel kernel = Kernel::exponential(0.5, -2.0);
  const CharacteristicFunction free(a, kernel, DelayMeasure::zero(1.0, 2, 2));
  const Rectangle free_rect{-4.0, 1.0, -3.0, 3.0};
  const SpectrumReport free_rep = find_roots(free, free_rect, 32, 1e-12);
  double worst_det = 0.0;
  for (const RootInfo& root : free_rep.roots) {
    const Complex z = root.lambda;
    const Complex scale = 1.0 + 0.5 / (z + 2.0);
    const Complex d00 = z - scale * a(0, 0);
    const Complex d01 = -scale * a(0, 1);
    const Complex d10 = -scale * a(1, 0);
    const Complex d11 = z - scale * a(1, 1);
    worst_det = std::max(worst_det, std::abs(d00 * d11 - d01 * d10));
  }
  // lambda^2 + (2 - mu) lambda - 2.5 mu = 0 for mu in {-1, -3}.
  const bool free_ok = free_rep.roots.size() == 4 && worst_det <= 1e-10;
  detail << "; L=0: " << free_rep.roots.size() << " roots, max |det| " << sci(worst_det);
  ok = ok && free_ok;
  return finish(10, "degenerate cases", ok, detail.str(), start);
}

CriterionResult check_stability_coupling() {
  const auto start = Clock::now();
  Matrix a(2, 2);
  a << -1.0, 0.5, 0.0, -1.2;
  Matrix m(2, 2);
  m << 0.2, 0.0, 0.1, 0.1;
  Matrix c(2, 2);
  c << 0.1, 0.0, 0.0, 0.1;
  const DelayMeasure L(1.0, 2, 2, {Atom{-0.5, m}}, {DensityPiece{-1.0, -0.5, {c}}});
  const Kernel kernel = Kernel::exponential(0.3, -3.0);
  Vector x0(2);
  x0 << 1.0, -1.0;
  const SystemSpec spec{a, kernel, L, x0, Trajectory::constant(-1.0, 1.0, 2, x0)};

  const CharacteristicFunction cf(a, kernel, L);
  const auto alpha = spectral_abscissa(cf, -2.5, 1.0, 20.0, 32, 1e-10);
  if (!alpha) return finish(11, "stability coupling", false, "no roots found", start);
  std::ostringstream detail;
  detail << "abscissa=" << sci(*alpha);
  if (*alpha > -0.2) return finish(11, "stability coupling", false, detail.str(), start);

  const double h = 0.01;
  const SolveReport rep = solve_mild(spec, h, 20.0);
  const double rate = *alpha + 0.1;
  const std::size_t zero = rep.x.node_index(0.0).value();
  double constant = 0.0;
  for (std::size_t n = 500; n <= 1000; ++n) {
    const double t = static_cast<double>(n) * h;
    constant = std::max(constant, rep.x[zero + n].norm() * std::exp(-rate * t));
  }
  double worst = 0.0;
  for (std::size_t n = 500; n <= 2000; ++n) {
    const double t = static_cast<double>(n) * h;
    worst = std::max(worst, rep.x[zero + n].norm() / (constant * std::exp(rate * t)));
  }
  detail << " C=" << sci(constant) << " max |x|/(C e^{(a+0.1)t}) on [5,20]=" << sci(worst);
  return finish(11, "stability coupling", worst <= 1.0 + 1e-9, detail.str(), start);
}

const std::vector<NamedCheck>& verification_suite() {
  static const std::vector<NamedCheck> suite = {
      {1, "resolvent closed form", check_resolvent_closed_form},
      {2, "semigroup reduction", check_semigroup_reduction},
      {3, "method of steps", check_method_of_steps},
      {4, "two-scheme agreement", check_two_scheme_agreement},
      {5, "characteristic root", check_characteristic_root},
      {6, "factorization identity", check_factorization_identity},
      {7, "admissibility inequality", check_admissibility},
      {8, "composition law", check_composition},
      {9, "Yosida approximation", check_yosida},
      {10, "degenerate cases", check_degenerate_cases},
      {11, "stability coupling", check_stability_coupling},
  };
  return suite;
}

std::string format_result(const CriterionResult& result) {
  std::ostringstream out;
  out << (result.passed ? "PASS" : "FAIL") << "  criterion " << std::setw(2)
      << result.id << "  " << result.name << "  (" << std::fixed
      << std::setprecision(2) << result.seconds << " s)  " << result.detail;
  return out.str();
}

std::vector<CriterionResult> run_suite(std::ostream* progress) {
  std::vector<CriterionResult> results;
  for (const NamedCheck& check : verification_suite()) {
    CriterionResult res;
    const auto start = Clock::now();
    try {
      res = check.run();
    } catch (const std::exception& e) {
      res = CriterionResult{check.id, check.name, false,
                            std::string("exception: ") + e.what(), seconds_since(start)};
    }
    if (progress) *progress << format_result(res) << std::endl;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace delaysys
