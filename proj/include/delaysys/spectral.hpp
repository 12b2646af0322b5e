#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delaysys/errors.hpp"
#include "delaysys/linalg.hpp"
#include "delaysys/measures.hpp"
#include "delaysys/signals.hpp"

namespace delaysys {

/// Delta(lambda) = lambda I - (1 + a^(lambda)) A - L e_lambda.
class CharacteristicFunction {
 public:
  CharacteristicFunction(Matrix generator, Kernel kernel, DelayMeasure delay);

  Eigen::Index dimension() const noexcept { return generator_.rows(); }
  const Matrix& generator() const noexcept { return generator_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const DelayMeasure& delay() const noexcept { return delay_; }
  const std::vector<Complex>& kernel_poles() const noexcept { return poles_; }

 private:
  Matrix generator_;
  Kernel kernel_;
  DelayMeasure delay_;
  std::vector<Complex> poles_;
};

ComplexMatrix char_matrix(const CharacteristicFunction& cf, Complex lambda);

/// det Delta(lambda) by LU with partial pivoting.
Complex char_det(const CharacteristicFunction& cf, Complex lambda);

/// Thrown when lambda I - (1 + a^(lambda)) A is singular, i.e. lambda is a
/// root of the delay-free characteristic equation.
class FreeResolventSingularError : public SingularMatrixError {
 public:
  using SingularMatrixError::SingularMatrixError;
};

/// (det(I - L e_lambda H(lambda)), det(lambda I - (1 + a^(lambda)) A)) with
/// H(lambda) = (lambda I - (1 + a^(lambda)) A)^{-1}. Their product is
/// char_det(lambda).
std::pair<Complex, Complex> factored_det(const CharacteristicFunction& cf,
                                         Complex lambda);

/// Axis-aligned search region [re_min, re_max] x [im_min, im_max].
struct Rectangle {
  double re_min;
  double re_max;
  double im_min;
  double im_max;

  bool contains(Complex z, double slack = 0.0) const noexcept {
    return z.real() >= re_min - slack && z.real() <= re_max + slack &&
           z.imag() >= im_min - slack && z.imag() <= im_max + slack;
  }
};

/// Parses "re_min,re_max,im_min,im_max".
Rectangle parse_rectangle(const std::string& text);

struct RootInfo {
  Complex lambda;
  double abs_det;
  int newton_iterations;
  /// Winding number of det Delta around a small square centred at the root
  /// (the root's multiplicity when the square is clean).
  int winding;
  /// Re lambda <= 0. Reported, not acted on.
  bool outside_right_half_plane = false;
};

struct CellDiagnostic {
  int column;
  int row;
  int winding;
  bool unstable;     // an edge had an unresolved phase jump or hit a pole
  int refinements;   // edge resamplings beyond the base 32 samples
};

struct SpectrumReport {
  Rectangle region;
  std::vector<RootInfo> roots;  // sorted by (Re, Im)
  std::optional<double> abscissa;
  std::vector<CellDiagnostic> cells;  // flagged cells only
  std::vector<std::string> warnings;
  std::vector<std::string> failures;  // flagged cells where Newton failed
};

/// Locates zeros of det Delta in `region`: winding numbers on a grid x grid
/// cell partition, Newton refinement inside flagged cells, and a per-root
/// winding certificate.
SpectrumReport find_roots(const CharacteristicFunction& cf,
                          const Rectangle& region, int grid, double tol);

/// max Re lambda over roots in [re_min, re_max] x [0, im_max] (conjugate
/// symmetry covers the lower half plane); nullopt if none is found.
std::optional<double> spectral_abscissa(const CharacteristicFunction& cf,
                                        double re_min, double re_max,
                                        double im_max, int grid, double tol,
                                        SpectrumReport* report = nullptr);

/// CSV: re, im, abs_det, newton_iters.
void write_roots_csv(std::ostream& out, const SpectrumReport& report);

}  // namespace delaysys
