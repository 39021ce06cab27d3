#include <cmath>
#include <random>

#include <doctest.h>

#include "katlas/error.hpp"
#include "katlas/rescale.hpp"
#include "support.hpp"

using namespace katlas;
using testing::rel;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("h values") {
  CHECK(h_eval(1.0, 1.0, 3) == 0.0);
  CHECK(rel(h_eval(std::sqrt(1.0 / 3.0), 1.0, 5), 2.0 / (3.0 * std::sqrt(3.0))) < 1e-15);
  CHECK(h_eval(2.0, 0.0, 6) == 4.0);
}

TEST_CASE("root sets per regime") {
  // t - t^3 = 0.3, both roots from an independent bisection.
  auto cubic = [](double t) { return t - t * t * t - 0.3; };
  const double lo = testing::bisect(cubic, 1e-9, std::sqrt(1.0 / 3.0));
  const double hi = testing::bisect(cubic, std::sqrt(1.0 / 3.0), 1.0);
  auto rs = h_roots(0.3, 1.0, 5);
  REQUIRE(rs.roots.size() == 2);
  CHECK(rs.roots[0].label == BranchLabel::Lower);
  CHECK(rs.roots[1].label == BranchLabel::Upper);
  CHECK(rel(rs.roots[0].t, lo) < 1e-13);
  CHECK(rel(rs.roots[1].t, hi) < 1e-13);
  CHECK(rs.roots[0].t == doctest::Approx(0.3389).epsilon(1e-3));
  CHECK(rs.roots[1].t == doctest::Approx(0.7866).epsilon(1e-3));

  rs = h_roots(2.0 / (3.0 * std::sqrt(3.0)), 1.0, 5);
  REQUIRE(rs.roots.size() == 1);
  CHECK(rs.roots[0].label == BranchLabel::Tangent);
  CHECK(rel(rs.roots[0].t, std::sqrt(1.0 / 3.0)) < 1e-15);

  rs = h_roots(1.5, 1.0, 3);
  REQUIRE(rs.roots.size() == 1);
  CHECK(rs.roots[0].label == BranchLabel::Unique);
  CHECK(rel(rs.roots[0].t, 0.5) < 1e-15);

  rs = h_roots(1.0, 0.0, 4);
  REQUIRE(rs.roots.size() == 1);
  CHECK(rs.roots[0].label == BranchLabel::ContinuumFree);

  CHECK(h_roots(2.0, 1.0, 4).roots.empty());
  CHECK(h_roots(0.9, 0.0, 4).roots.empty());
  CHECK(h_roots(0.5, 1.0, 5).roots.empty());
  rs = h_roots(-0.2, 1.0, 1);
  CHECK(rs.roots.empty());
  CHECK_FALSE(rs.diagnostic.empty());

  CHECK(rel(h_roots(8.0, 0.0, 1).roots.at(0).t, 0.5) < 1e-15);
  CHECK(rel(h_roots(3.0, 1.0, 2).roots.at(0).t, 0.5) < 1e-15);
  CHECK(rel(h_roots(16.0, 0.0, 6).roots.at(0).t, 4.0) < 1e-15);
}

TEST_CASE("property: every root solves h(t) = s and sits on its branch") {
  std::mt19937 gen(31337u);
  std::uniform_real_distribution<double> la(-1, 1), ls(-3, 1);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 2000; ++trial) {
    const int N = dim(gen);
    const double a = trial % 7 == 0 ? 0.0 : std::pow(10.0, la(gen));
    const double s = std::pow(10.0, ls(gen));
    for (const auto& r : h_roots(s, a, N).roots) {
      if (r.label == BranchLabel::ContinuumFree) continue;
      CHECK(std::fabs(h_eval(r.t, a, N) - s) <= 1e-12 * std::max(1.0, s));
      if (a > 0.0) CHECK(r.t < 1.0 / std::sqrt(a));
      if (N >= 5 && a > 0.0) {
        const double ts = *critical_scales(a, N).t_star;
        if (r.label == BranchLabel::Lower) CHECK(r.t < ts);
        if (r.label == BranchLabel::Upper) CHECK(r.t > ts);
      }
    }
  }
}

TEST_CASE("property: wide parameter ranges stay at rounding level") {
  // Near a^(-1/2) with large t^(N-4) the two terms of h cancel, so the
  // residual is measured against the size of the terms.
  std::mt19937 gen(4141u);
  std::uniform_real_distribution<double> la(-4, 2), ls(-6, 3);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 2000; ++trial) {
    const int N = dim(gen);
    const double a = trial % 7 == 0 ? 0.0 : std::pow(10.0, la(gen));
    const double s = std::pow(10.0, ls(gen));
    for (const auto& r : h_roots(s, a, N).roots) {
      if (r.label == BranchLabel::ContinuumFree) continue;
      const double terms = std::pow(r.t, N - 4) * std::max(1.0, a * r.t * r.t);
      CHECK(std::fabs(h_eval(r.t, a, N) - s) <= 1e-13 * std::max({1.0, s, terms}));
    }
  }
}

TEST_CASE("N = 1 root against a direct bisection on the decreasing branch") {
  std::mt19937 gen(8u);
  std::uniform_real_distribution<double> la(-2, 2), ls(-3, 3);
  for (int i = 0; i < 200; ++i) {
    const double a = std::pow(10.0, la(gen)), s = std::pow(10.0, ls(gen));
    const auto rs = h_roots(s, a, 1);
    REQUIRE(rs.roots.size() == 1);
    const double oracle = testing::bisect([&](double t) { return (1 - a * t * t) / (t * t * t) - s; },
                                          1e-9, 1 / std::sqrt(a));
    CHECK(rel(rs.roots[0].t, oracle) < 1e-12);
  }
}

TEST_CASE("branch ordering") {
  std::mt19937 gen(21u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int N : {5, 6, 7}) {
    const double a = 0.7;
    const auto cs = critical_scales(a, N);
    for (int i = 0; i < 100; ++i) {
      double s1 = u(gen) * *cs.s_star, s2 = u(gen) * *cs.s_star;
      if (s1 > s2) std::swap(s1, s2);
      if (s1 == s2 || s1 <= 0) continue;
      const auto r1 = h_roots(s1, a, N).roots, r2 = h_roots(s2, a, N).roots;
      REQUIRE(r1.size() == 2);
      REQUIRE(r2.size() == 2);
      CHECK(r1[0].t < r2[0].t);
      CHECK(r2[0].t < *cs.t_star);
      CHECK(*cs.t_star < r2[1].t);
      CHECK(r2[1].t < r1[1].t);
      CHECK(r1[1].t < 1 / std::sqrt(a));
    }
  }
}

TEST_CASE("critical scales") {
  auto cs = critical_scales(1.0, 5);
  CHECK(rel(*cs.t_star, std::sqrt(1.0 / 3.0)) < 1e-15);
  CHECK(rel(*cs.t_dstar, std::sqrt(1.0 / 5.0)) < 1e-15);
  CHECK(rel(*cs.s_star, 2.0 / (3.0 * std::sqrt(3.0))) < 1e-15);
  CHECK(rel(*cs.s_star, h_eval(*cs.t_star, 1.0, 5)) < 1e-15);
  cs = critical_scales(1.0, 1);
  CHECK(rel(*cs.tau, std::sqrt(3.0)) < 1e-15);
  CHECK(rel(*cs.s_tau, -2 * std::sqrt(3.0) / 9) < 1e-15);
  CHECK(rel(*cs.s_tau, h_eval(*cs.tau, 1.0, 1)) < 1e-14);
  cs = critical_scales(4.0, 6);
  CHECK(rel(*cs.t_star, std::sqrt(1.0 / 8.0)) < 1e-15);
  CHECK(rel(*cs.t_dstar, std::sqrt(1.0 / 12.0)) < 1e-15);
  CHECK(rel(*cs.s_star, 0.5 / 8.0) < 1e-15);
  CHECK(kind_of([] { critical_scales(1.0, 3); }) == ErrorKind::NotApplicable);
  CHECK(kind_of([] { critical_scales(0.0, 5); }) == ErrorKind::NotApplicable);
}

TEST_CASE("g energy values and shape") {
  CHECK(rel(g_energy(std::sqrt(1.0 / 3.0), 1, 1, 5), 0.2) < 1e-14);
  CHECK(std::fabs(g_energy(std::sqrt(1.0 / 5.0), 1, 1, 5)) < 1e-14);
  CHECK(rel(g_energy(0.5, 1, 1, 3), 1.75) < 1e-15);
  for (int N : {5, 6, 8}) {
    const double a = 1.3, b = 0.4;
    const auto cs = critical_scales(a, N);
    const double ts = *cs.t_star, tds = *cs.t_dstar, top = 1 / std::sqrt(a);
    double prev = -INFINITY;
    for (int i = 1; i < 200; ++i) {
      const double t = ts * i / 200.0;
      const double g = g_energy(t, a, b, N);
      CHECK(g > prev);
      prev = g;
      if (t < tds * (1 - 1e-12)) CHECK(g < 0);
      if (t > tds * (1 + 1e-12)) CHECK(g > 0);
    }
    prev = INFINITY;
    for (int i = 1; i < 200; ++i) {
      const double t = ts + (top - ts) * i / 200.0;
      const double g = g_energy(t, a, b, N);
      CHECK(g < prev);
      CHECK(g > 0);
      prev = g;
    }
    CHECK(rel(g_energy(ts, a, b, N), c_star(a, b, N)) < 1e-12);
  }
}

TEST_CASE("thresholds") {
  auto th = thresholds_b(1.0, 5, 1.0);
  CHECK(rel(*th.b_star, 2 / (3 * std::sqrt(3.0))) < 1e-15);
  CHECK(rel(*th.b_dstar, 4 / (5 * std::sqrt(5.0))) < 1e-15);
  CHECK(*th.b_dstar < *th.b_star);
  th = thresholds_b(1.0, 4, 2.0);
  CHECK(*th.b_star == 0.5);
  CHECK_FALSE(th.b_dstar);
  CHECK(kind_of([] { thresholds_b(1.0, 3, 1.0); }) == ErrorKind::NotApplicable);

  th = thresholds_a(1.0, 5, 1.0);
  CHECK(rel(*th.a_star, 4.0 / 27.0) < 1e-15);
  CHECK(rel(*th.a_dstar, 16.0 / 125.0) < 1e-15);
  CHECK(*th.a_dstar < *th.a_star);
  CHECK(kind_of([] { thresholds_a(1.0, 4, 1.0); }) == ErrorKind::NotApplicable);
  const auto dual = thresholds_b(*th.a_star, 5, 1.0);
  CHECK(rel(*dual.b_star, 1.0) < 1e-12);
  const auto dual2 = thresholds_b(*th.a_dstar, 5, 1.0);
  CHECK(rel(*dual2.b_dstar, 1.0) < 1e-12);
}

TEST_CASE("property: threshold consistency") {
  std::mt19937 gen(77u);
  std::uniform_real_distribution<double> la(-2, 2), lD(-1, 6), frac(0.01, 0.99);
  for (int i = 0; i < 300; ++i) {
    const int N = 5 + i % 4;
    const double a = std::pow(10.0, la(gen)), D1 = std::pow(10.0, lD(gen));
    const auto th = thresholds_b(a, N, D1);
    const auto cs = critical_scales(a, N);
    CHECK(rel(*th.b_star * D1, *cs.s_star) < 1e-14);
    CHECK(*th.b_dstar < *th.b_star);
    // Lower-branch energy is negative exactly below b_dstar.
    for (double b : {*th.b_dstar * frac(gen), *th.b_dstar + (*th.b_star - *th.b_dstar) * frac(gen)}) {
      const auto rs = h_roots(b * D1, a, N);
      REQUIRE(rs.roots.size() == 2);
      CHECK((g_energy(rs.roots[0].t, a, b, N) < 0) == (b < *th.b_dstar));
      CHECK(g_energy(rs.roots[1].t, a, b, N) > 0);
    }
    const auto ta = thresholds_a(1.0 / D1, N, D1);
    CHECK(rel(*thresholds_b(*ta.a_star, N, D1).b_star, 1.0 / D1) < 1e-10);
  }
}

TEST_CASE("closed forms agree with the generic root and energy pair") {
  CHECK(rel(psi_n3(1, 1, 1.5), 0.5) < 1e-15);
  CHECK(rel(phi_n3(1, 1, 1.5), 1.75) < 1e-14);
  CHECK(rel(psi_n3(1, 1e-12, 1), 1.0) < 1e-11);
  CHECK(kind_of([] { psi_n3(0, 1, 1); }) == ErrorKind::DegenerateRequiresA);
  CHECK(kind_of([] { phi_n3(0, 1, 1); }) == ErrorKind::DegenerateRequiresA);

  CHECK(rel(*t_n4(1, 0.5, 1), std::sqrt(0.5)) < 1e-15);
  CHECK(rel(*phi_n4(1, 0.5, 1), 0.5) < 1e-15);
  CHECK_FALSE(t_n4(1, 1, 1));
  CHECK_FALSE(phi_n4(1, 1, 1));
  CHECK(rel(*t_n4(1, 0.25, 2), std::sqrt(0.5)) < 1e-15);
  CHECK(rel(*phi_n4(1, 0.25, 2), 1.0) < 1e-15);

  CHECK(rel(beta_degenerate(1, 5, 1), -0.05) < 1e-15);
  // t = 4 from t^2 = b D, so (4 - N) / (4 b N t^4) = -1/49152.
  CHECK(rel(beta_degenerate(16, 6, 1), -1.0 / 49152.0) < 1e-15);
  CHECK(beta_degenerate(1, 5, 2) > beta_degenerate(1, 5, 1));

  std::mt19937 gen(5u);
  std::uniform_real_distribution<double> l(-2, 2);
  for (int i = 0; i < 500; ++i) {
    const double a = std::pow(10.0, l(gen)), b = std::pow(10.0, l(gen)), D = std::pow(10.0, l(gen));
    const double t3 = h_roots(b * D, a, 3).roots.at(0).t;
    CHECK(rel(psi_n3(a, b, D), t3) < 1e-10);
    CHECK(rel(phi_n3(a, b, D), g_energy(t3, a, b, 3)) < 1e-10);
    if (b * D < 0.99) {
      const double t4 = h_roots(b * D, a, 4).roots.at(0).t;
      CHECK(rel(*t_n4(a, b, D), t4) < 1e-10);
      CHECK(rel(*phi_n4(a, b, D), g_energy(t4, a, b, 4)) < 1e-10);
    }
    for (int N : {5, 6, 9}) {
      const double t = h_roots(b * D, 0.0, N).roots.at(0).t;
      CHECK(rel(beta_degenerate(b, N, D), g_energy(t, 0.0, b, N)) < 1e-10);
      CHECK(beta_degenerate(b, N, D) < 0);
    }
  }
}

TEST_CASE("N = 3 energy is stable where the generic formula cancels") {
  // Long double evaluation of g at the quadratic root as the oracle, with
  // 1 - a t^2 = b D t taken from h(t) = b D.
  std::mt19937 gen(6u);
  std::uniform_real_distribution<double> l(-4, 4);
  for (int i = 0; i < 500; ++i) {
    const double a = std::pow(10.0, l(gen)), b = std::pow(10.0, l(gen)), D = std::pow(10.0, l(gen));
    const long double bD = static_cast<long double>(b) * D;
    const long double t = 2.0L / (bD + std::sqrt(bD * bD + 4.0L * a));
    const long double x = bD * t;
    const long double phi = x * (4.0L - 3.0L * x) / (12.0L * b * t * t * t * t);
    CHECK(rel(phi_n3(a, b, D), static_cast<double>(phi)) < 1e-12);
    CHECK(rel(psi_n3(a, b, D), static_cast<double>(t)) < 1e-14);
  }
}

TEST_CASE("level roots of g") {
  const double a = 1, b = 1;
  const int N = 5;
  const double cs = c_star(a, b, N);
  CHECK(rel(cs, 0.2) < 1e-15);
  auto lr = level_roots_g(cs, a, b, N);
  CHECK(rel(lr.tau_c, std::sqrt(1.0 / 3.0)) < 1e-12);
  CHECK(rel(lr.tau_up_c, std::sqrt(1.0 / 3.0)) < 1e-12);
  lr = level_roots_g(1e-8 * cs, a, b, N);
  CHECK(std::fabs(lr.tau_c - std::sqrt(0.2)) < 1e-3);
  CHECK(std::fabs(lr.tau_up_c - 1.0) < 1e-3);
  CHECK(kind_of([&] { level_roots_g(0.0, a, b, N); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { level_roots_g(1.01 * cs, a, b, N); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { level_roots_g(0.1, a, b, 4); }) == ErrorKind::NotApplicable);

  const double ts = std::sqrt(1.0 / 3.0), tds = std::sqrt(0.2);
  for (int i = 1; i <= 20; ++i) {
    const double c = cs * i / 21.0;
    const auto r = level_roots_g(c, a, b, N);
    CHECK(rel(g_energy(r.tau_c, a, b, N), c) < 1e-10);
    CHECK(rel(g_energy(r.tau_up_c, a, b, N), c) < 1e-10);
    CHECK(r.tau_c > tds);
    CHECK(r.tau_c < ts);
    CHECK(r.tau_up_c > ts);
    CHECK(r.tau_up_c < 1.0);
    CHECK(r.gamma < 0);
    const double e = 1e-6 * c;
    const double fd = (level_roots_g(c + e, a, b, N).gamma - level_roots_g(c - e, a, b, N).gamma) / (2 * e);
    const double formula = N * b * (std::pow(r.tau_up_c, N) - std::pow(r.tau_c, N));
    CHECK(fd > 0);
    CHECK(rel(fd, formula) < 1e-6);
  }
}

TEST_CASE("existence classes and liftable counts") {
  CHECK(classify_existence(1, 0.3, 5, 1) == ExistenceClass::TwoBranches);
  CHECK(classify_existence(1, 1, 3, 7) == ExistenceClass::UniqueBranch);
  CHECK(classify_existence(0, 0.5, 4, 2) == ExistenceClass::Continuum);
  CHECK(classify_existence(0, 1, 4, 2) == ExistenceClass::NoBranch);
  CHECK(classify_existence(1, 2 / (3 * std::sqrt(3.0)), 5, 1) == ExistenceClass::TangentBranch);

  const double ss = *critical_scales(1, 5).s_star;
  auto counts = count_liftable(1, 0.5 * ss / 30, 5, {10, 20, 30});
  for (const auto& c : counts) CHECK(c.roots == 2);
  counts = count_liftable(1, 0.5 * (ss / 10 + ss / 20), 5, {10, 20});
  CHECK(counts[0].roots == 2);
  CHECK(counts[1].roots == 0);
  for (const auto& c : count_liftable(1, 3.7, 3, {1, 10, 100, 1000})) CHECK(c.roots == 1);
}

TEST_CASE("labels and params") {
  for (auto l : {BranchLabel::Unique, BranchLabel::Lower, BranchLabel::Upper, BranchLabel::Tangent,
                 BranchLabel::ContinuumFree}) {
    CHECK(branch_label_from_string(to_string(l)) == l);
  }
  CHECK(kind_of([] { branch_label_from_string("middle"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { KirchhoffParams{-1, 1, 3}.validate(); }) == ErrorKind::Precondition);
  CHECK(kind_of([] { KirchhoffParams{1, 0, 3}.validate(); }) == ErrorKind::Precondition);
  CHECK(kind_of([] { KirchhoffParams{1, 1, 0}.validate(); }) == ErrorKind::Precondition);
}

TEST_CASE("N = 4 boundary s = 1 rounds to no root") {
  CHECK(h_roots(1.0, 1.0, 4).roots.empty());
  CHECK(h_roots(std::nextafter(1.0, 0.0), 1.0, 4).roots.empty());
  const auto rs = h_roots(1.0 - 1e-6, 4.0, 4);
  REQUIRE(rs.roots.size() == 1);
  CHECK(rel(rs.roots[0].t, std::sqrt(1e-6 / 4.0)) < 1e-9);
}
