#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "delaysys/delay_solver.hpp"
#include "delaysys/errors.hpp"
#include "delaysys/resolvent.hpp"

using namespace delaysys;

namespace {

Matrix m1(double a) { return Matrix::Constant(1, 1, a); }
Vector v1(double a) { return Vector::Constant(1, a); }

SystemSpec scalar_spec(double a, Kernel k, DelayMeasure L, double x0, double phi) {
  return SystemSpec{m1(a), std::move(k), std::move(L), v1(x0),
                    Trajectory::constant(-L.horizon(), L.horizon(), 2, v1(phi))};
}

SystemSpec steps_spec() {
  return scalar_spec(0.0, Kernel(), DelayMeasure(1.0, 1, 1, {Atom{-1.0, m1(1.0)}}), 1.0, 1.0);
}

// Two-dimensional system exercising every operator.
SystemSpec full_spec(double u_amp = 1.0, double f_amp = 1.0) {
  Matrix a(2, 2);
  a << -0.8, 0.4, -0.3, -0.6;
  Matrix la(2, 2);
  la << 0.3, -0.2, 0.1, 0.2;
  Matrix ld(2, 2);
  ld << 0.2, 0.1, 0.0, -0.3;
  const DelayMeasure L(0.8, 2, 2, {Atom{-0.5, la}}, {DensityPiece{-0.8, 0.0, {ld, 0.5 * ld}}});
  const DelayMeasure K(0.8, 2, 1, {Atom{-0.3, (Matrix(2, 1) << 1.0, -0.5).finished()}},
                       {DensityPiece{-0.6, -0.1, {(Matrix(2, 1) << 0.2, 0.4).finished()}}});
  const DelayMeasure C(0.8, 1, 2, {Atom{-0.8, (Matrix(1, 2) << 1.0, 1.0).finished()}},
                       {DensityPiece{-0.4, 0.0, {(Matrix(1, 2) << 0.5, -1.0).finished()}}});
  const DelayMeasure D(0.8, 1, 1, {Atom{-0.2, m1(2.0)}});
  SystemSpec s{a, Kernel::exponential(0.6, -1.5), L, (Vector(2) << 0.5, -1.0).finished(),
               Trajectory::sample(-0.8, 0.01, 81, [](double t) {
                 return (Vector(2) << std::cos(t), t).finished();
               })};
  s.K = K;
  s.C = C;
  s.D = D;
  s.u = Trajectory::sample(-0.8, 0.01, 481, [&](double t) { return v1(u_amp * std::sin(3.0 * t)); });
  s.f = Trajectory::sample(0.0, 0.01, 401, [&](double t) {
    return (Vector(2) << f_amp * std::exp(-t), f_amp * std::cos(t)).finished();
  });
  s.input_dim = 1;
  s.output_dim = 1;
  return s;
}

double at(const SolveReport& rep, double t) { return rep.x(t)(0); }

}  // namespace

TEST(Solver, FreeSystemFollowsResolvent) {
  Matrix a(2, 2);
  a << -1.0, 0.5, -0.5, -0.2;
  const Kernel k = Kernel::exponential(0.4, -2.0);
  SystemSpec s{a, k, DelayMeasure::zero(0.5, 2, 2), (Vector(2) << 1.0, 2.0).finished(),
               Trajectory::constant(-0.5, 0.5, 2, Vector::Zero(2))};
  const SolveReport rep = solve_mild(s, 0.01, 3.0);
  const ResolventFamily fam = compute_resolvent(a, k, 0.01, 3.0);
  const std::size_t zero = rep.x.node_index(0.0).value();
  for (std::size_t n = 0; n < fam.size(); ++n) {
    EXPECT_LT((rep.x[zero + n] - fam[n] * s.x0).norm(), 1e-12);
  }
}

TEST(Solver, MethodOfSteps) {
  const SystemSpec s = steps_spec();
  for (const SolveReport& rep : {solve_mild(s, 1e-3, 2.0), solve_direct_oracle(s, 1e-3, 2.0)}) {
    EXPECT_NEAR(at(rep, 1.0), 2.0, 1e-5);
    EXPECT_NEAR(at(rep, 2.0), 3.5, 1e-5);
    EXPECT_NEAR(at(rep, 0.5), 1.5, 1e-5);
    EXPECT_NEAR(at(rep, 1.5), 2.0 + 0.5 + 0.125, 1e-5);
  }
  EXPECT_LE(cross_validate(s, 1e-3, 2.0), 1e-5);
}

TEST(Solver, PureIntegration) {
  SystemSpec s = scalar_spec(0.0, Kernel(), DelayMeasure::zero(1.0, 1, 1), 0.0, 0.0);
  s.f = Trajectory::constant(0.0, 0.5, 9, v1(1.0));
  const SolveReport rep = solve_mild(s, 0.01, 4.0);
  const std::size_t zero = rep.x.node_index(0.0).value();
  for (std::size_t n = 0; n <= 400; n += 37) {
    EXPECT_NEAR(rep.x[zero + n](0), 0.01 * static_cast<double>(n), 1e-12);
  }
}

TEST(DirectOracle, ScalarDecayAndMemory) {
  const SystemSpec decay = scalar_spec(-1.0, Kernel(), DelayMeasure::zero(1.0, 1, 1), 1.0, 1.0);
  const SolveReport d = solve_direct_oracle(decay, 1e-3, 2.0);
  EXPECT_NEAR(at(d, 1.0), std::exp(-1.0), 1e-6);
  EXPECT_NEAR(at(d, 2.0), std::exp(-2.0), 1e-6);

  const SystemSpec mem = scalar_spec(-1.0, Kernel::exponential(1.0, -1.0), DelayMeasure::zero(1.0, 1, 1), 1.0, 0.0);
  const SolveReport m = solve_direct_oracle(mem, 1e-3, 4.0);
  EXPECT_NEAR(at(m, std::numbers::pi), -std::exp(-std::numbers::pi), 1e-4);
}

TEST(Solver, BothSchemesAreSecondOrder) {
  const SystemSpec mem = scalar_spec(-1.0, Kernel::exponential(1.0, -1.0), DelayMeasure::zero(1.0, 1, 1), 1.0, 0.0);
  auto err = [&](SolveMethod method, double h) {
    const SolveReport r = method == SolveMethod::kMild ? solve_mild(mem, h, 4.0)
                                                       : solve_direct_oracle(mem, h, 4.0);
    double e = 0.0;
    const std::size_t zero = r.x.node_index(0.0).value();
    for (std::size_t n = zero; n < r.x.size(); ++n) {
      const double t = r.x.time(n);
      e = std::max(e, std::abs(r.x[n](0) - std::exp(-t) * std::cos(t)));
    }
    return e;
  };
  for (SolveMethod method : {SolveMethod::kMild, SolveMethod::kDirect}) {
    const double ratio = err(method, 0.02) / err(method, 0.01);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
  }
}

TEST(Solver, SchemesAgreeWithoutDelays) {
  Matrix a(2, 2);
  a << -1.0, 0.5, -0.5, -0.2;
  SystemSpec s{a, Kernel(), DelayMeasure::zero(0.5, 2, 2), (Vector(2) << 1.0, 2.0).finished(),
               Trajectory::constant(-0.5, 0.5, 2, Vector::Zero(2))};
  EXPECT_LE(cross_validate(s, 1e-3, 2.0), 1e-8);
}

TEST(Solver, FullSystemAgreement) {
  EXPECT_LE(cross_validate(full_spec(), 1e-3, 4.0), 1e-3);
}

TEST(Solver, HistoryIsPreserved) {
  const SystemSpec s = full_spec();
  for (const SolveReport& rep : {solve_mild(s, 0.01, 1.0), solve_direct_oracle(s, 0.01, 1.0)}) {
    for (std::size_t k = 0; k < 80; ++k) {
      EXPECT_EQ(rep.x[k], s.phi[k]);
    }
    EXPECT_EQ(rep.x[80], s.x0);
  }
}

TEST(Solver, Causality) {
  const SystemSpec s = full_spec();
  SystemSpec t = s;
  // Change u and f after t* = 1.5 only.
  std::vector<Vector> u = s.u->samples();
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (s.u->time(k) > 1.5 + 1e-9) u[k] = v1(42.0);
  }
  t.u = Trajectory(s.u->start(), s.u->step(), u);
  std::vector<Vector> f = s.f->samples();
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (s.f->time(k) > 1.5 + 1e-9) f[k] = Vector::Constant(2, -7.0);
  }
  t.f = Trajectory(s.f->start(), s.f->step(), f);
  for (SolveMethod method : {SolveMethod::kMild, SolveMethod::kDirect}) {
    const SolveReport a = method == SolveMethod::kMild ? solve_mild(s, 0.01, 4.0) : solve_direct_oracle(s, 0.01, 4.0);
    const SolveReport b = method == SolveMethod::kMild ? solve_mild(t, 0.01, 4.0) : solve_direct_oracle(t, 0.01, 4.0);
    const std::size_t cut = a.x.node_index(1.5).value();
    for (std::size_t n = 0; n <= cut; ++n) EXPECT_LE((a.x[n] - b.x[n]).norm(), 1e-12);
    EXPECT_GT((a.x[cut + 10] - b.x[cut + 10]).norm(), 1e-6);
  }
}

TEST(Solver, LinearInData) {
  const SystemSpec z1 = full_spec(1.0, 1.0);
  SystemSpec z2 = full_spec(-0.5, 2.0);
  z2.x0 << 2.0, 0.25;
  z2.phi = Trajectory::sample(-0.8, 0.01, 81, [](double t) { return (Vector(2) << t * t, 1.0).finished(); });
  const double al = 1.5, be = -0.75;
  SystemSpec comb = z1;
  comb.x0 = al * z1.x0 + be * z2.x0;
  auto mix = [&](const Trajectory& p, const Trajectory& q) {
    std::vector<Vector> out;
    for (std::size_t k = 0; k < p.size(); ++k) out.push_back(al * p[k] + be * q[k]);
    return Trajectory(p.start(), p.step(), out);
  };
  comb.phi = mix(z1.phi, z2.phi);
  comb.u = mix(*z1.u, *z2.u);
  comb.f = mix(*z1.f, *z2.f);
  const SolveReport r1 = solve_mild(z1, 0.01, 4.0);
  const SolveReport r2 = solve_mild(z2, 0.01, 4.0);
  const SolveReport rc = solve_mild(comb, 0.01, 4.0);
  for (std::size_t n = 0; n < rc.x.size(); ++n) {
    EXPECT_LE((rc.x[n] - (al * r1.x[n] + be * r2.x[n])).norm(), 1e-10);
  }
  for (std::size_t n = 0; n < rc.y->size(); ++n) {
    EXPECT_LE(((*rc.y)[n] - (al * (*r1.y)[n] + be * (*r2.y)[n])).norm(), 1e-10);
  }
}

TEST(Solver, OutputMatchesDelayTerm) {
  SystemSpec s = full_spec();
  s.C = s.L;
  s.D.reset();
  s.output_dim = 2;
  for (SolveMethod method : {SolveMethod::kMild, SolveMethod::kDirect}) {
    const SolveReport rep = method == SolveMethod::kMild ? solve_mild(s, 0.01, 2.0) : solve_direct_oracle(s, 0.01, 2.0);
    ASSERT_TRUE(rep.y.has_value());
    ASSERT_EQ(rep.y->size(), 201u);
    for (std::size_t n = 0; n < rep.y->size(); n += 7) {
      const double t = 0.01 * static_cast<double>(n);
      const Vector ref = measure_apply(s.L, rep.segment(t, s.horizon()));
      EXPECT_LE(((*rep.y)[n] - ref).norm(), 1e-12) << "t=" << t;
    }
  }
}

TEST(Solver, InitialJumpIsHonoured) {
  // x' = x(t - 1) with phi = 0 and x0 = 1: x = 1 on [0, 1], then 1 + (t - 1).
  // The delayed integrand jumps at t = 1, which costs the trapezoid h/2 once.
  const SystemSpec s = scalar_spec(0.0, Kernel(), DelayMeasure(1.0, 1, 1, {Atom{-1.0, m1(1.0)}}), 1.0, 0.0);
  const double h = 0.01;
  for (const SolveReport& rep : {solve_mild(s, h, 2.0), solve_direct_oracle(s, h, 2.0)}) {
    EXPECT_NEAR(at(rep, 0.5), 1.0, 1e-12);
    EXPECT_NEAR(at(rep, 0.99), 1.0, 1e-12);
    EXPECT_NEAR(at(rep, 1.0), 1.0 + 0.5 * h, 1e-12);
    EXPECT_NEAR(at(rep, 2.0), 2.0, h);
  }
  // Without the jump-aware prehistory the window at t = 0.5 would interpolate
  // between phi(-0.01) = 0 and x0 = 1; the solution stays flat instead.
  const SolveReport rep = solve_mild(s, h, 2.0);
  EXPECT_EQ(rep.segment(0.5, 1.0)(-0.505)(0), 0.0);
}

TEST(Solver, StepValidation) {
  const SystemSpec s = steps_spec();
  EXPECT_THROW(solve_mild(s, 0.3, 2.0), DomainError);
  EXPECT_THROW(solve_direct_oracle(s, 0.01, 2.005), DomainError);
  EXPECT_THROW(solve_mild(s, -0.01, 2.0), DomainError);
  SystemSpec short_u = full_spec();
  short_u.u = Trajectory::constant(-0.8, 0.01, 100, v1(0.0));
  EXPECT_THROW(solve_mild(short_u, 0.01, 2.0), DomainError);
  SystemSpec bad = full_spec();
  bad.x0 = Vector::Zero(3);
  EXPECT_THROW(solve_mild(bad, 0.01, 1.0), SpecError);
  SystemSpec short_phi = steps_spec();
  short_phi.phi = Trajectory::constant(-0.5, 0.5, 2, v1(1.0));
  EXPECT_THROW(short_phi.validate(), SpecError);
}

TEST(Solver, StiffNewestCouplingReportsStepTooLarge) {
  const DelayMeasure L(1.0, 1, 1, {}, {DensityPiece{-0.5, 0.0, {m1(1e4)}}});
  const SystemSpec s = scalar_spec(-1.0, Kernel(), L, 1.0, 1.0);
  try {
    solve_mild(s, 0.01, 0.5);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step too large"), std::string::npos);
  }
}

TEST(Trace, RoundTripAndDeterminism) {
  const SystemSpec s = full_spec();
  const SolveReport rep = solve_mild(s, 0.01, 1.0);
  std::ostringstream a;
  write_trace_csv(a, rep);
  std::ostringstream b;
  write_trace_csv(b, solve_mild(s, 0.01, 1.0));
  EXPECT_EQ(a.str(), b.str());

  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x[0],x[1],y[0]");
  std::istringstream again(a.str());
  const TraceTable table = read_trace_csv(again);
  ASSERT_EQ(table.x.size(), rep.x.size());
  for (std::size_t k = 0; k < table.x.size(); ++k) {
    EXPECT_EQ(table.t[k], rep.x.time(k));
    EXPECT_EQ(table.x[k], rep.x[k]);
    if (k < 80) {
      EXPECT_FALSE(table.y[k].has_value());
    } else {
      ASSERT_TRUE(table.y[k].has_value());
      EXPECT_EQ(*table.y[k], (*rep.y)[k - 80]);
    }
  }
}
