#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "delaysys/errors.hpp"
#include "delaysys/resolvent.hpp"
#include "delaysys/verification.hpp"

using namespace delaysys;

namespace {

Matrix m1(double a) { return Matrix::Constant(1, 1, a); }

Matrix random_matrix(std::mt19937_64& rng, int n, double norm) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return m * (norm / spectral_norm(m));
}

}  // namespace

TEST(Resolvent, StartsAtIdentity) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(rng, 3, 1.5);
  const ResolventFamily fam = compute_resolvent(a, Kernel::exponential(0.5, -1.0), 0.01, 1.0);
  EXPECT_EQ(fam[0], Matrix::Identity(3, 3));
  EXPECT_EQ(fam.size(), 101u);
  EXPECT_NEAR(fam.horizon(), 1.0, 1e-12);
  EXPECT_THROW(ResolventFamily(a, Kernel(), 0.1, {2.0 * Matrix::Identity(3, 3)}), DomainError);
}

TEST(Resolvent, ScalarDecay) {
  const ResolventFamily fam = compute_resolvent(m1(-1.0), Kernel(), 1e-3, 1.0);
  EXPECT_NEAR(fam[1000](0, 0), std::exp(-1.0), 1e-6);
}

TEST(Resolvent, MemoryKernelClosedForm) {
  // R^(lambda) = (lambda + 1) / ((lambda + 1)^2 + 1), so R(t) = e^{-t} cos t.
  const ResolventFamily fam = compute_resolvent(m1(-1.0), Kernel::exponential(1.0, -1.0), 1e-3, 4.0);
  const double t = std::numbers::pi;
  EXPECT_NEAR(fam[0](0, 0), 1.0, 0.0);
  EXPECT_NEAR(fam[3142](0, 0), -std::exp(-t), 1e-4);  // t_n = 3.142
  double worst = 0.0;
  for (std::size_t n = 0; n < fam.size(); ++n) {
    const double s = static_cast<double>(n) * 1e-3;
    worst = std::max(worst, std::abs(fam[n](0, 0) - std::exp(-s) * std::cos(s)));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Resolvent, SecondOrderConvergence) {
  auto err = [](double h) {
    const ResolventFamily fam = compute_resolvent(m1(-1.0), Kernel::exponential(1.0, -1.0), h, 5.0);
    double e = 0.0;
    for (std::size_t n = 0; n < fam.size(); ++n) {
      const double t = static_cast<double>(n) * h;
      e = std::max(e, std::abs(fam[n](0, 0) - std::exp(-t) * std::cos(t)));
    }
    return e;
  };
  const double ratio = err(2e-3) / err(1e-3);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(Resolvent, SemigroupCaseIsSecondOrder) {
  std::mt19937_64 rng(17);
  const Matrix a = random_matrix(rng, 3, 2.0);
  auto err = [&](double h) {
    const ResolventFamily fam = compute_resolvent(a, Kernel(), h, 2.0);
    double e = 0.0;
    for (std::size_t n = 0; n < fam.size(); ++n) {
      e = std::max(e, spectral_norm(fam[n] - expm_taylor(static_cast<double>(n) * h * a)));
    }
    return e;
  };
  const double ratio = err(2e-3) / err(1e-3);
  EXPECT_NEAR(ratio, 4.0, 0.1);
}

TEST(Resolvent, ExpmOracleSelfCheck) {
  Matrix rot(2, 2);
  rot << 0.0, -1.0, 1.0, 0.0;
  const Matrix e = expm_taylor(3.0 * rot);
  EXPECT_NEAR(e(0, 0), std::cos(3.0), 1e-14);
  EXPECT_NEAR(e(1, 0), std::sin(3.0), 1e-14);
  Matrix jordan(2, 2);
  jordan << -2.0, 1.0, 0.0, -2.0;
  const Matrix j = expm_taylor(jordan);
  EXPECT_NEAR(j(0, 1), std::exp(-2.0), 1e-14);
}

TEST(Resolvent, ResidualIsRoundoff) {
  std::mt19937_64 rng(21);
  const Matrix a = random_matrix(rng, 3, 1.0);
  const Kernel k({KernelTerm{0.7, 1, -1.5, 2.0, Phase::kSin}, KernelTerm{-0.4, 0, -0.5, 0.0, Phase::kCos}});
  const ResolventFamily fam = compute_resolvent(a, k, 0.01, 3.0);
  EXPECT_LE(resolvent_residual(fam), 1e-12);

  std::vector<Matrix> bumped = fam.matrices();
  bumped[150](1, 2) += 1e-3;
  const ResolventFamily perturbed(a, k, 0.01, bumped);
  EXPECT_GE(resolvent_residual(perturbed), 1e-4);
}

TEST(Resolvent, ExpmValuesLeaveQuadratureResidual) {
  std::mt19937_64 rng(22);
  const Matrix a = random_matrix(rng, 2, 1.0);
  std::vector<Matrix> exact;
  for (int n = 0; n <= 200; ++n) exact.push_back(expm_taylor(0.01 * n * a));
  const double r1 = resolvent_residual(ResolventFamily(a, Kernel(), 0.01, exact));
  std::vector<Matrix> half;
  for (int n = 0; n <= 400; ++n) half.push_back(expm_taylor(0.005 * n * a));
  const double r2 = resolvent_residual(ResolventFamily(a, Kernel(), 0.005, half));
  EXPECT_GT(r1, 1e-9);
  EXPECT_NEAR(r1 / r2, 4.0, 0.3);
}

TEST(Resolvent, CommutesWithGenerator) {
  const Kernel k = Kernel::exponential(0.8, -2.0);
  EXPECT_EQ(commutation_defect(compute_resolvent(m1(-3.0), k, 0.01, 2.0)), 0.0);
  Matrix diag = Matrix::Zero(3, 3);
  diag.diagonal() << -1.0, 0.5, -2.0;
  EXPECT_LE(commutation_defect(compute_resolvent(diag, k, 0.01, 2.0)), 1e-12);
  std::mt19937_64 rng(4);
  EXPECT_LE(commutation_defect(compute_resolvent(random_matrix(rng, 3, 2.0), k, 0.01, 2.0)), 1e-10);
}

TEST(Resolvent, LaplaceConsistency) {
  // Trapezoid transform of R over [0, 40] at lambda = 1 against H(1).
  Matrix a(2, 2);
  a << -1.0, 0.4, -0.3, -0.8;
  const Kernel k = Kernel::exponential(0.5, -2.0);
  const double h = 1e-3;
  const ResolventFamily fam = compute_resolvent(a, k, h, 40.0);
  Matrix sum = Matrix::Zero(2, 2);
  for (std::size_t n = 0; n < fam.size(); ++n) {
    const double w = (n == 0 || n + 1 == fam.size()) ? 0.5 : 1.0;
    sum += w * std::exp(-static_cast<double>(n) * h) * fam[n];
  }
  sum *= h;
  const double ahat = 0.5 / 3.0;
  const Matrix expected = (Matrix::Identity(2, 2) - (1.0 + ahat) * a).inverse();
  EXPECT_LE((sum - expected).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Resolvent, ExponentiallyBounded) {
  Matrix a(2, 2);
  a << -1.0, 1.0, 0.0, -0.5;
  const ResolventFamily fam = compute_resolvent(a, Kernel::exponential(0.3, -1.0), 0.01, 30.0);
  // Fit log |R_n| against t on [10, 30]; the slope must be negative.
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (std::size_t n = 1000; n < fam.size(); n += 10) {
    const double t = 0.01 * static_cast<double>(n);
    const double y = std::log(spectral_norm(fam[n]));
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  const double slope = (count * sty - st * sy) / (count * stt - st * st);
  EXPECT_LT(slope, 0.0);
  double constant = 0.0;
  for (std::size_t n = 0; n < fam.size(); ++n) {
    constant = std::max(constant, spectral_norm(fam[n]) * std::exp(-slope * 0.01 * n));
  }
  for (std::size_t n = 0; n < fam.size(); ++n) {
    EXPECT_LE(spectral_norm(fam[n]), constant * std::exp(slope * 0.01 * n) * (1 + 1e-12));
  }
}

TEST(Resolvent, StepErrors) {
  EXPECT_THROW(compute_resolvent(m1(4.0), Kernel(), 0.5, 1.0), SingularMatrixError);
  try {
    compute_resolvent(m1(4.0), Kernel(), 0.5, 1.0);
  } catch (const SingularMatrixError& e) {
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos);
  }
  EXPECT_THROW(compute_resolvent(m1(-1.0), Kernel(), 0.0, 1.0), DomainError);
  EXPECT_THROW(compute_resolvent(m1(-1.0), Kernel(), 0.1, 0.05), DomainError);
  EXPECT_THROW(compute_resolvent(Matrix::Zero(2, 3), Kernel(), 0.1, 1.0), DimensionError);
}

TEST(Upsilon, Examples) {
  const double h = 1e-3;
  const Trajectory zero = Trajectory::constant(0.0, h, 1001, Vector::Zero(2));
  const ResolventFamily id = compute_resolvent(Matrix::Zero(2, 2), Kernel(), h, 1.0);
  const Trajectory z = upsilon_apply(id, zero);
  for (std::size_t n = 0; n < z.size(); ++n) EXPECT_EQ(z[n].norm(), 0.0);

  Vector c(2);
  c << 2.0, -1.0;
  const Trajectory cf = Trajectory::constant(0.0, h, 1001, c);
  const Trajectory integ = upsilon_apply(id, cf);
  for (std::size_t n = 0; n < integ.size(); n += 100) {
    EXPECT_LT((integ[n] - static_cast<double>(n) * h * c).norm(), 1e-12);
  }

  const ResolventFamily dec = compute_resolvent(m1(-1.0), Kernel(), h, 3.0);
  const Trajectory one = Trajectory::constant(0.0, h, 3001, Vector::Ones(1));
  const Trajectory y = upsilon_apply(dec, one);
  for (std::size_t n = 0; n < y.size(); n += 250) {
    EXPECT_NEAR(y[n](0), 1.0 - std::exp(-static_cast<double>(n) * h), 1e-6);
  }
}

TEST(Upsilon, GridMismatchRejected) {
  const ResolventFamily fam = compute_resolvent(m1(-1.0), Kernel(), 0.01, 1.0);
  EXPECT_THROW(upsilon_apply(fam, Trajectory::constant(0.0, 0.02, 11, Vector::Ones(1))), DomainError);
  EXPECT_THROW(upsilon_apply(fam, Trajectory::constant(-0.01, 0.01, 11, Vector::Ones(1))), DomainError);
  EXPECT_THROW(upsilon_apply(fam, Trajectory::constant(0.0, 0.01, 200, Vector::Ones(1))), DomainError);
}

TEST(Resolvent, CsvLayout) {
  Matrix a(2, 2);
  a << -1.0, 2.0, 0.0, -3.0;
  const ResolventFamily fam = compute_resolvent(a, Kernel(), 0.5, 1.0);
  std::ostringstream out;
  write_resolvent_csv(out, fam);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,R[0][0],R[0][1],R[1][0],R[1][1]");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1,0,0,1");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
