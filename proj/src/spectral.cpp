#include "delaysys/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "delaysys/csv.hpp"
#include "delaysys/errors.hpp"

namespace delaysys {
namespace {

constexpr int kEdgeSamples = 32;
constexpr int kMaxEdgeRefinement = 4;
constexpr int kMaxNewtonIterations = 50;
constexpr double kPoleMargin = 1e-6;
constexpr double kDuplicateDistance = 1e-6;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct EdgePhase {
  double increment = 0.0;
  bool unstable = false;
  int refinements = 0;
};

class DetEvaluator {
 public:
  explicit DetEvaluator(const CharacteristicFunction& cf) : cf_(cf) {}

  /// nullopt near kernel poles or on non-finite values.
  std::optional<Complex> operator()(Complex lambda) const {
    for (const Complex& p : cf_.kernel_poles()) {
      if (std::abs(lambda - p) <= kPoleMargin) return std::nullopt;
    }
    try {
      const Complex value = char_det(cf_, lambda);
      if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
        return std::nullopt;
      }
      return value;
    } catch (const Error&) {
      return std::nullopt;
    }
  }

 private:
  const CharacteristicFunction& cf_;
};

// Total change of arg det along the segment a -> b.
EdgePhase edge_phase(const DetEvaluator& det, Complex a, Complex b,
                     std::optional<Complex> fa, std::optional<Complex> fb) {
  EdgePhase result;
  if (!fa || !fb || std::abs(*fa) == 0.0 || std::abs(*fb) == 0.0) {
    result.unstable = true;
    return result;
  }
  for (int factor = 1; factor <= kMaxEdgeRefinement; factor *= 2) {
    const int n = kEdgeSamples * factor;
    result.refinements = factor > 1 ? result.refinements + 1 : 0;
    double total = 0.0;
    bool jumpy = false;
    bool broken = false;
    Complex prev = *fa;
    for (int k = 1; k <= n; ++k) {
      std::optional<Complex> value =
          k == n ? fb : det(a + (b - a) * (static_cast<double>(k) / n));
      if (!value || std::abs(*value) == 0.0) {
        broken = true;
        break;
      }
      const double step = std::arg(*value / prev);
      if (std::abs(step) > std::numbers::pi / 2.0) jumpy = true;
      total += step;
      prev = *value;
    }
    if (broken) {
      result.unstable = true;
      return result;
    }
    result.increment = total;
    if (!jumpy) return result;
  }
  result.unstable = true;
  return result;
}

struct NewtonResult {
  bool converged = false;
  Complex lambda;
  double abs_det = 0.0;
  int iterations = 0;
};

NewtonResult newton(const CharacteristicFunction& cf, Complex start, double tol,
                    double max_step) {
  const double d = static_cast<double>(cf.dimension());
  NewtonResult out;
  out.lambda = start;
  try {
    for (int it = 0; it <= kMaxNewtonIterations; ++it) {
      const Complex f = char_det(cf, out.lambda);
      out.abs_det = std::abs(f);
      out.iterations = it;
      const double scale = std::max(1.0, std::pow(std::abs(out.lambda), d));
      if (out.abs_det <= tol * scale) {
        out.converged = true;
        return out;
      }
      if (it == kMaxNewtonIterations) break;
      const double delta = 1e-6 * (1.0 + std::abs(out.lambda));
      const Complex slope = (char_det(cf, out.lambda + delta) -
                             char_det(cf, out.lambda - delta)) /
                            (2.0 * delta);
      if (slope == 0.0) break;
      Complex step = f / slope;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      if (std::abs(step) > max_step) step *= max_step / std::abs(step);
      out.lambda -= step;
    }
  } catch (const Error&) {
  }
  out.converged = false;
  return out;
}

int winding_around(const DetEvaluator& det, Complex center, double radius,
                   bool& unstable) {
  const Complex corners[4] = {center + Complex(-radius, -radius),
                              center + Complex(radius, -radius),
                              center + Complex(radius, radius),
                              center + Complex(-radius, radius)};
  std::optional<Complex> values[4];
  for (int k = 0; k < 4; ++k) values[k] = det(corners[k]);
  double total = 0.0;
  unstable = false;
  for (int k = 0; k < 4; ++k) {
    const EdgePhase e = edge_phase(det, corners[k], corners[(k + 1) % 4],
                                   values[k], values[(k + 1) % 4]);
    unstable = unstable || e.unstable;
    total += e.increment;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

}  // namespace

CharacteristicFunction::CharacteristicFunction(Matrix generator, Kernel kernel,
                                               DelayMeasure delay)
    : generator_(std::move(generator)),
      kernel_(std::move(kernel)),
      delay_(std::move(delay)),
      poles_(kernel_.poles()) {
  const Eigen::Index d = generator_.rows();
  if (d < 1 || generator_.cols() != d) {
    throw DimensionError("characteristic function: A must be square");
  }
  if (delay_.out_dim() != d || delay_.in_dim() != d) {
    throw DimensionError("characteristic function: L must be d x d");
  }
}

ComplexMatrix char_matrix(const CharacteristicFunction& cf, Complex lambda) {
  const Eigen::Index d = cf.dimension();
  const Complex gain = 1.0 + cf.kernel().laplace(lambda);
  ComplexMatrix m = lambda * ComplexMatrix::Identity(d, d) -
                    gain * cf.generator().cast<Complex>();
  m -= exp_moment(cf.delay(), lambda);
  return m;
}

Complex char_det(const CharacteristicFunction& cf, Complex lambda) {
  const ComplexMatrix m = char_matrix(cf, lambda);
  if (m.rows() == 1) return m(0, 0);
  return Eigen::PartialPivLU<ComplexMatrix>(m).determinant();
}

std::pair<Complex, Complex> factored_det(const CharacteristicFunction& cf,
                                         Complex lambda) {
  const Eigen::Index d = cf.dimension();
  const Complex gain = 1.0 + cf.kernel().laplace(lambda);
  const ComplexMatrix free = lambda * ComplexMatrix::Identity(d, d) -
                             gain * cf.generator().cast<Complex>();
  Eigen::PartialPivLU<ComplexMatrix> lu(free);
  const Complex free_det = lu.determinant();
  if (free_det == 0.0 || !(lu.rcond() > 1e-14)) {
    std::ostringstream msg;
    msg << "factored_det: lambda I - (1 + a^(lambda)) A is singular at "
        << lambda;
    throw FreeResolventSingularError(msg.str());
  }
  const ComplexMatrix h = lu.inverse();
  const ComplexMatrix factor = ComplexMatrix::Identity(d, d) -
                               exp_moment(cf.delay(), lambda) * h;
  const Complex factor_det =
      d == 1 ? factor(0, 0)
             : Eigen::PartialPivLU<ComplexMatrix>(factor).determinant();
  return {factor_det, free_det};
}

Rectangle parse_rectangle(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw DomainError("trailing characters");
    } catch (const std::exception&) {
      throw DomainError("region: cannot parse '" + cell + "' as a number");
    }
  }
  if (values.size() != 4) {
    throw DomainError("region: expected re_min,re_max,im_min,im_max");
  }
  const Rectangle rect{values[0], values[1], values[2], values[3]};
  if (!(rect.re_min < rect.re_max) || !(rect.im_min < rect.im_max)) {
    throw DomainError("region: rectangle is empty");
  }
  return rect;
}

SpectrumReport find_roots(const CharacteristicFunction& cf,
                          const Rectangle& region, int grid, double tol) {
  if (grid < 8) throw DomainError("find_roots: grid must be at least 8");
  if (!(region.re_min < region.re_max) || !(region.im_min < region.im_max)) {
    throw DomainError("find_roots: empty rectangle");
  }
  if (!(tol > 0.0) || tol > 1e-8) {
    throw DomainError("find_roots: tolerance must lie in (0, 1e-8]");
  }
  SpectrumReport report;
  report.region = region;
  const DetEvaluator det(cf);
  const double dx = (region.re_max - region.re_min) / grid;
  const double dy = (region.im_max - region.im_min) / grid;
  const std::size_t side = static_cast<std::size_t>(grid) + 1;
  auto point = [&](int i, int j) {
    return Complex(region.re_min + i * dx, region.im_min + j * dy);
  };

  // Lattice values.
  std::vector<std::optional<Complex>> lattice(side * side);
  for (int j = 0; j <= grid; ++j) {
    for (int i = 0; i <= grid; ++i) lattice[j * side + i] = det(point(i, j));
  }
  auto at = [&](int i, int j) { return lattice[j * side + i]; };

  // Oriented edge phases: horizontal (i,j)->(i+1,j), vertical (i,j)->(i,j+1).
  std::vector<EdgePhase> horizontal(side * side);
  std::vector<EdgePhase> vertical(side * side);
  for (int j = 0; j <= grid; ++j) {
    for (int i = 0; i <= grid; ++i) {
      if (i < grid) {
        horizontal[j * side + i] =
            edge_phase(det, point(i, j), point(i + 1, j), at(i, j), at(i + 1, j));
      }
      if (j < grid) {
        vertical[j * side + i] =
            edge_phase(det, point(i, j), point(i, j + 1), at(i, j), at(i, j + 1));
      }
    }
  }

  const double diagonal = std::hypot(region.re_max - region.re_min,
                                     region.im_max - region.im_min);
  const double slack = 1e-9 * (1.0 + diagonal);
  std::vector<RootInfo> candidates;
  int total_winding = 0;
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const EdgePhase& bottom = horizontal[j * side + i];
      const EdgePhase& right = vertical[j * side + i + 1];
      const EdgePhase& top = horizontal[(j + 1) * side + i];
      const EdgePhase& left = vertical[j * side + i];
      const double turns =
          (bottom.increment + right.increment - top.increment - left.increment) /
          kTwoPi;
      const int winding = static_cast<int>(std::lround(turns));
      bool unstable = bottom.unstable || right.unstable || top.unstable ||
                      left.unstable || std::abs(turns - winding) > 0.1;
      const Complex lo = point(i, j);
      const Complex hi = point(i + 1, j + 1);
      bool has_pole = false;
      for (const Complex& p : cf.kernel_poles()) {
        if (p.real() >= lo.real() - kPoleMargin && p.real() <= hi.real() + kPoleMargin &&
            p.imag() >= lo.imag() - kPoleMargin && p.imag() <= hi.imag() + kPoleMargin) {
          has_pole = true;
        }
      }
      total_winding += winding;
      if (winding == 0 && !unstable && !has_pole) continue;

      const int refinements = bottom.refinements + right.refinements +
                              top.refinements + left.refinements;
      report.cells.push_back({i, j, winding, unstable, refinements});
      if (unstable) {
        std::ostringstream msg;
        msg << "boundary-root warning: unstable winding in cell (" << i << ","
            << j << ")";
        report.warnings.push_back(msg.str());
      }

      std::vector<Complex> starts = {0.5 * (lo + hi)};
      if (winding > 1 || unstable || has_pole) {
        for (double fx : {0.25, 0.75}) {
          for (double fy : {0.25, 0.75}) {
            starts.emplace_back(lo.real() + fx * dx, lo.imag() + fy * dy);
          }
        }
      }
      bool found = false;
      for (const Complex& s : starts) {
        const NewtonResult nr = newton(cf, s, tol, diagonal);
        if (!nr.converged || !region.contains(nr.lambda, slack)) continue;
        found = true;
        candidates.push_back({nr.lambda, nr.abs_det, nr.iterations, 0});
      }
      if (!found && winding != 0) {
        std::ostringstream msg;
        msg << "Newton did not converge in cell (" << i << "," << j
            << ") with winding " << winding;
        report.failures.push_back(msg.str());
      }
    }
  }

  std::vector<RootInfo> roots;
  for (const RootInfo& c : candidates) {
    auto same = std::find_if(roots.begin(), roots.end(), [&](const RootInfo& r) {
      return std::abs(r.lambda - c.lambda) < kDuplicateDistance;
    });
    if (same == roots.end()) {
      roots.push_back(c);
    } else if (c.abs_det < same->abs_det) {
      *same = c;
    }
  }
  std::sort(roots.begin(), roots.end(), [](const RootInfo& a, const RootInfo& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });

  // Certify each root on its own square, clear of other roots and poles.
  for (RootInfo& root : roots) {
    double radius = 0.25 * std::min(dx, dy);
    for (const RootInfo& other : roots) {
      if (&other == &root) continue;
      radius = std::min(radius, 0.4 * std::abs(other.lambda - root.lambda));
    }
    for (const Complex& p : cf.kernel_poles()) {
      radius = std::min(radius, 0.4 * std::abs(p - root.lambda));
    }
    root.outside_right_half_plane = root.lambda.real() <= 0.0;
    bool unstable = false;
    root.winding = winding_around(det, root.lambda, radius, unstable);
    if (unstable) {
      std::ostringstream msg;
      msg << "root " << root.lambda << ": certificate contour unstable";
      report.warnings.push_back(msg.str());
    }
  }

  int certified = 0;
  for (const RootInfo& root : roots) certified += root.winding;
  if (report.failures.empty() && certified != total_winding &&
      cf.kernel_poles().empty()) {
    std::ostringstream msg;
    msg << "cell windings sum to " << total_winding << " but roots account for "
        << certified;
    report.warnings.push_back(msg.str());
  }

  report.roots = std::move(roots);
  if (!report.roots.empty()) {
    double best = report.roots.front().lambda.real();
    for (const RootInfo& root : report.roots) best = std::max(best, root.lambda.real());
    report.abscissa = best;
  }
  return report;
}

std::optional<double> spectral_abscissa(const CharacteristicFunction& cf,
                                        double re_min, double re_max,
                                        double im_max, int grid, double tol,
                                        SpectrumReport* report) {
  if (!(im_max > 0.0)) throw DomainError("spectral_abscissa: im_max must be positive");
  // Start slightly below the real axis so real roots sit inside a cell.
  const double below = 0.25 * im_max / grid;
  SpectrumReport found =
      find_roots(cf, Rectangle{re_min, re_max, -below, im_max}, grid, tol);
  std::optional<double> abscissa = found.abscissa;
  if (report != nullptr) *report = std::move(found);
  return abscissa;
}

void write_roots_csv(std::ostream& out, const SpectrumReport& report) {
  out << "re,im,abs_det,newton_iters\n";
  for (const RootInfo& root : report.roots) {
    out << format_double(root.lambda.real()) << ','
        << format_double(root.lambda.imag()) << ','
        << format_double(root.abs_det) << ',' << root.newton_iterations << '\n';
  }
}

}  // namespace delaysys
