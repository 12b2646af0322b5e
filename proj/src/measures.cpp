#include "delaysys/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "delaysys/errors.hpp"
#include "delaysys/quadrature.hpp"

namespace delaysys {
namespace {

constexpr double kGridTolerance = 1e-9;

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// J_k = int_{-delta}^{delta} v^k e^{lambda v} dv for k = 0..3.
std::array<Complex, 4> centered_moments(Complex lambda, double delta) {
  std::array<Complex, 4> out{};
  const double size = std::abs(lambda) * delta;
  if (size < 1.0) {
    for (int k = 0; k < 4; ++k) {
      Complex sum = 0.0;
      Complex ln = 1.0;  // lambda^n / n!
      for (int n = 0; n < 80; ++n) {
        if ((n + k) % 2 == 0) {
          const Complex term =
              ln * 2.0 * std::pow(delta, n + k + 1) / double(n + k + 1);
          sum += term;
          if (n > 4 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
        }
        ln *= lambda / double(n + 1);
      }
      out[k] = sum;
    }
    return out;
  }
  // Antiderivative e^{lambda v} sum_j (-1)^j k!/(k-j)! v^{k-j} / lambda^{j+1}.
  auto antiderivative = [lambda](int k, double v) {
    Complex sum = 0.0;
    double falling = 1.0;  // k!/(k-j)!
    Complex inv = 1.0 / lambda;
    for (int j = 0; j <= k; ++j) {
      if (j > 0) {
        falling *= (k - j + 1);
        inv /= lambda;
      }
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      sum += sign * falling * std::pow(v, k - j) * inv;
    }
    return std::exp(lambda * v) * sum;
  };
  for (int k = 0; k < 4; ++k) {
    out[k] = antiderivative(k, delta) - antiderivative(k, -delta);
  }
  return out;
}

void integrate_cell(const DensityPiece& piece, const HistorySegment& seg,
                    double c0, double c1, Eigen::Ref<Vector> acc, Vector& tmp) {
  const GaussRule& rule = gauss_legendre(4);
  const double mid = 0.5 * (c0 + c1);
  const double half = 0.5 * (c1 - c0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double theta = mid + half * rule.nodes[i];
    seg.eval_into(theta, tmp);
    acc.noalias() += (half * rule.weights[i]) * (piece(theta) * tmp);
  }
}

}  // namespace

Matrix DensityPiece::operator()(double theta) const {
  Matrix value = coeffs.back();
  for (auto it = coeffs.rbegin() + 1; it != coeffs.rend(); ++it) {
    value = value * theta + *it;
  }
  return value;
}

DelayMeasure::DelayMeasure(double horizon, Eigen::Index out_dim,
                           Eigen::Index in_dim, std::vector<Atom> atoms,
                           std::vector<DensityPiece> density)
    : horizon_(horizon),
      out_dim_(out_dim),
      in_dim_(in_dim),
      atoms_(std::move(atoms)),
      density_(std::move(density)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw DomainError("measure: horizon r must be positive");
  }
  if (out_dim_ < 0 || in_dim_ < 0) {
    throw DimensionError("measure: negative dimension");
  }
  const double tol = 1e-12 * horizon_;
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    const Atom& atom = atoms_[j];
    std::ostringstream where;
    where << "atom " << j << ": ";
    if (atom.weight.rows() != out_dim_ || atom.weight.cols() != in_dim_) {
      throw DimensionError(where.str() + "matrix shape does not conform");
    }
    if (atom.theta == 0.0) {
      throw DomainError(where.str() +
                        "measure must be continuous at 0 (atom at theta = 0)");
    }
    if (!(atom.theta < 0.0) || atom.theta < -horizon_ - tol) {
      throw DomainError(where.str() + "location outside [-r, 0)");
    }
  }
  std::vector<double> locations;
  for (const Atom& atom : atoms_) locations.push_back(atom.theta);
  std::sort(locations.begin(), locations.end());
  if (std::adjacent_find(locations.begin(), locations.end()) !=
      locations.end()) {
    throw DomainError("measure: two atoms share a location");
  }

  for (std::size_t j = 0; j < density_.size(); ++j) {
    const DensityPiece& piece = density_[j];
    std::ostringstream where;
    where << "density piece " << j << ": ";
    if (!(piece.lower < piece.upper) || piece.lower < -horizon_ - tol ||
        piece.upper > tol) {
      throw DomainError(where.str() + "interval must satisfy -r <= a < b <= 0");
    }
    if (piece.coeffs.empty() || piece.coeffs.size() > 4) {
      throw DomainError(where.str() + "1 to 4 coefficient matrices required");
    }
    for (const Matrix& c : piece.coeffs) {
      if (c.rows() != out_dim_ || c.cols() != in_dim_) {
        throw DimensionError(where.str() + "matrix shape does not conform");
      }
    }
  }
  std::vector<std::pair<double, double>> spans;
  for (const DensityPiece& piece : density_) {
    spans.emplace_back(piece.lower, piece.upper);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t j = 1; j < spans.size(); ++j) {
    if (spans[j].first < spans[j - 1].second - tol) {
      throw DomainError("measure: density pieces overlap");
    }
  }
}

Vector measure_apply(const DelayMeasure& mu, const HistorySegment& seg) {
  if (seg.dimension() != mu.in_dim()) {
    throw DimensionError("measure_apply: segment dimension does not match");
  }
  const double r = mu.horizon();
  if (seg.horizon() < r * (1.0 - 1e-12)) {
    throw DomainError("measure_apply: segment does not span [-r, 0]");
  }
  Vector result = Vector::Zero(mu.out_dim());
  Vector tmp(mu.in_dim());
  for (const Atom& atom : mu.atoms()) {
    seg.eval_into(atom.theta, tmp);
    result.noalias() += atom.weight * tmp;
  }
  const Trajectory& traj = seg.trajectory();
  const double h = traj.step();
  const double origin = traj.start() - seg.anchor();  // theta of node 0
  const double tol = kGridTolerance * h;
  for (const DensityPiece& piece : mu.density()) {
    double k = std::floor((piece.lower - origin) / h) + 1.0;
    double c0 = piece.lower;
    while (c0 < piece.upper - tol) {
      double node = origin + k * h;
      if (node <= c0 + tol) {
        k += 1.0;
        continue;
      }
      const double c1 = std::min(node, piece.upper);
      integrate_cell(piece, seg, c0, c1, result, tmp);
      c0 = c1;
      k += 1.0;
    }
  }
  return result;
}

ComplexMatrix exp_moment(const DelayMeasure& mu, Complex lambda) {
  ComplexMatrix result = ComplexMatrix::Zero(mu.out_dim(), mu.in_dim());
  for (const Atom& atom : mu.atoms()) {
    result += std::exp(lambda * atom.theta) * atom.weight.cast<Complex>();
  }
  for (const DensityPiece& piece : mu.density()) {
    const double center = 0.5 * (piece.lower + piece.upper);
    const double delta = 0.5 * (piece.upper - piece.lower);
    const auto moments = centered_moments(lambda, delta);
    // Re-expand sum_k c_k theta^k around the center: sum_i b_i v^i.
    const int degree = static_cast<int>(piece.coeffs.size()) - 1;
    ComplexMatrix acc = ComplexMatrix::Zero(mu.out_dim(), mu.in_dim());
    for (int i = 0; i <= degree; ++i) {
      Matrix b = Matrix::Zero(mu.out_dim(), mu.in_dim());
      for (int k = i; k <= degree; ++k) {
        b += binomial(k, i) * std::pow(center, k - i) * piece.coeffs[k];
      }
      acc += moments[i] * b.cast<Complex>();
    }
    result += std::exp(lambda * center) * acc;
  }
  return result;
}

double total_variation(const DelayMeasure& mu, double window) {
  const double r = mu.horizon();
  if (!(window > 0.0) || window > r * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "total_variation: window " << window << " outside (0, " << r << "]";
    throw DomainError(msg.str());
  }
  const double edge = -window - 1e-12 * r;
  double total = 0.0;
  for (const Atom& atom : mu.atoms()) {
    if (atom.theta >= edge) total += spectral_norm(atom.weight);
  }
  const GaussRule& rule = gauss_legendre(16);
  for (const DensityPiece& piece : mu.density()) {
    const double lo = std::max(piece.lower, -window);
    const double hi = piece.upper;
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      total += half * rule.weights[i] *
               spectral_norm(piece(mid + half * rule.nodes[i]));
    }
  }
  return total;
}

Vector yosida_approx(const DelayMeasure& mu, const HistorySegment& seg,
                     double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("yosida_approx: s must be positive");
  }
  const double r = mu.horizon();
  if (seg.horizon() < r * (1.0 - 1e-12)) {
    throw DomainError("yosida_approx: segment does not span [-r, 0]");
  }
  const double h = seg.trajectory().step();
  const auto cells = static_cast<std::size_t>(
      std::max(1.0, std::ceil(r / h - kGridTolerance)));
  const double dx = r / static_cast<double>(cells);
  const double x = s * dx;
  const double decay = std::exp(-x);
  const double one_minus = -std::expm1(-x);
  // (1 - e^{-x}(1 + x)) / x
  const double slope_weight =
      x < 1e-2 ? x / 2.0 - x * x / 3.0 + x * x * x / 8.0 - x * x * x * x / 30.0
               : (1.0 - decay * (1.0 + x)) / x;

  // psi(theta) = s int_theta^0 e^{s(theta - sigma)} seg(sigma) d sigma on the
  // nodes theta_k = -k dx, swept from 0 towards -r.
  std::vector<Vector> psi(cells + 1, Vector::Zero(seg.dimension()));
  Vector upper = seg(0.0);
  for (std::size_t k = 0; k < cells; ++k) {
    const double theta_lo = -static_cast<double>(k + 1) * dx;
    Vector lower = seg(std::max(theta_lo, -seg.horizon()));
    psi[k + 1] = decay * psi[k] + one_minus * lower + slope_weight * (upper - lower);
    upper = std::move(lower);
  }
  std::reverse(psi.begin(), psi.end());
  const Trajectory profile(-r, dx, std::move(psi));
  return measure_apply(mu, history_at(profile, 0.0, r));
}

DelayStencil::DelayStencil(const DelayMeasure& mu, double step)
    : out_dim_(mu.out_dim()), in_dim_(mu.in_dim()) {
  if (!(step > 0.0)) throw DomainError("stencil: step must be positive");
  std::map<std::ptrdiff_t, StencilEntry> by_offset;
  auto entry = [&](std::ptrdiff_t offset) -> StencilEntry& {
    auto it = by_offset.find(offset);
    if (it == by_offset.end()) {
      it = by_offset
               .emplace(offset,
                        StencilEntry{offset, Matrix::Zero(out_dim_, in_dim_),
                                     Matrix::Zero(out_dim_, in_dim_)})
               .first;
    }
    return it->second;
  };

  for (const Atom& atom : mu.atoms()) {
    const double p = atom.theta / step;
    const double nearest = std::round(p);
    if (std::abs(p - nearest) <= kGridTolerance) {
      entry(static_cast<std::ptrdiff_t>(nearest)).right += atom.weight;
      continue;
    }
    const double k0 = std::floor(p);
    const double frac = p - k0;
    entry(static_cast<std::ptrdiff_t>(k0)).right += (1.0 - frac) * atom.weight;
    entry(static_cast<std::ptrdiff_t>(k0) + 1).left += frac * atom.weight;
  }

  const GaussRule& rule = gauss_legendre(4);
  const double tol = kGridTolerance * step;
  for (const DensityPiece& piece : mu.density()) {
    double k = std::floor(piece.lower / step + kGridTolerance);
    double c0 = piece.lower;
    while (c0 < piece.upper - tol) {
      const double cell_lo = k * step;
      const double cell_hi = (k + 1.0) * step;
      if (cell_hi <= c0 + tol) {
        k += 1.0;
        continue;
      }
      const double c1 = std::min(cell_hi, piece.upper);
      const double mid = 0.5 * (c0 + c1);
      const double half = 0.5 * (c1 - c0);
      StencilEntry& lo_entry = entry(static_cast<std::ptrdiff_t>(k));
      StencilEntry& hi_entry = entry(static_cast<std::ptrdiff_t>(k) + 1);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double theta = mid + half * rule.nodes[i];
        const double frac = (theta - cell_lo) / step;
        const Matrix weighted = (half * rule.weights[i]) * piece(theta);
        lo_entry.right += (1.0 - frac) * weighted;
        hi_entry.left += frac * weighted;
      }
      c0 = c1;
      k += 1.0;
    }
  }

  newest_ = Matrix::Zero(out_dim_, in_dim_);
  for (auto& [offset, e] : by_offset) {
    if (offset > 0) throw DomainError("stencil: positive offset");
    if (offset == 0) newest_ = e.left;
    entries_.push_back(std::move(e));
  }
}

}  // namespace delaysys
