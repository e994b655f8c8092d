#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qspec/grid.hpp"
#include "qspec/radial.hpp"

using namespace qspec;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected qspec::Error");
  return ErrorCode::io;
}

bool nonnegative(const QEigenpair& pair) {
  const auto& v = pair.grid()->values;
  return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
}

double rel(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace

TEST_CASE("rasterization") {
  const auto sq = rasterize(DomainSpec::rectangle(1, 1), 0.25);
  CHECK(sq.interior_count() == 9);
  CHECK(component_count(sq) == 1);
  CHECK(code_of([] { rasterize(DomainSpec::ball(1.0), 2.5); }) == ErrorCode::empty_domain);

  const auto db = dumbbell_domain(0.125, 1.0 / 64);
  std::size_t left = 0, right = 0;
  for (int iy = 0; iy < db.ny; ++iy) {
    for (int ix = 0; ix < db.nx; ++ix) {
      if (!db.inside(ix, iy)) continue;
      const double x = db.x(ix);
      if (x < 0) ++left;
      if (x > 0) ++right;
      // Mirror node must be interior too.
      const int jx = static_cast<int>(std::lround(-x / db.h)) - db.i0;
      CHECK(db.inside(jx, iy));
    }
  }
  CHECK(left == right);
  CHECK(component_count(db) == 1);

  const auto two = rasterize(DomainSpec::disjoint_union({DomainSpec::ball(0.5), DomainSpec::ball(0.5)}),
                             1.0 / 16);
  CHECK(component_count(two) == 2);

  const auto line = rasterize(DomainSpec::interval(1.0), 0.125);
  CHECK(line.dim == 1);
  CHECK(line.interior_count() == 7);
}

TEST_CASE("linear square converges at second order") {
  ProblemParams lin(2, 2.0, true);
  const auto grid32 = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 32);
  const auto grid64 = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 64);
  const auto grid16 = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 16);
  const double l16 = minimize_rayleigh(lin, grid16).lambda;
  const double l32 = minimize_rayleigh(lin, grid32).lambda;
  const auto p64 = minimize_rayleigh(lin, grid64);
  const double exact = 2 * kPi * kPi;
  CHECK(rel(richardson(l32, p64.lambda), exact) < 1e-4);
  const double ratio = (l32 - l16) / (p64.lambda - l32);
  CHECK(ratio == Approx(4.0).epsilon(0.05));
  CHECK(nonnegative(p64));
  CHECK(p64.lq_norm == Approx(1.0).epsilon(1e-10));
  CHECK(residual(p64, lin) < 1e-6);
}

TEST_CASE("disk agrees with the radial solver") {
  ProblemParams lin(2, 2.0, true);
  const auto disk256 = rasterize(DomainSpec::ball(1.0), 1.0 / 256);
  const auto g = minimize_rayleigh(lin, disk256);
  CHECK(rel(g.lambda, ball_eigenvalue(lin, 1.0, 1).lambda) < 5e-3);

  const auto disk128 = rasterize(DomainSpec::ball(1.0), 1.0 / 128);
  for (double q : {1.5, 3.0}) {
    ProblemParams p(2, q);
    const auto pair = minimize_rayleigh(p, disk128);
    CHECK(rel(pair.lambda, ball_eigenvalue(p, 1.0, 1).lambda) < 0.02);
    CHECK(nonnegative(pair));
    CHECK(residual(pair, p) < 1e-6);
    CHECK(pair.sign_class == SignClass::positive);
  }
}

TEST_CASE("analytic eigenfunction has second-order residual") {
  ProblemParams lin(2, 2.0, true);
  double prev = 0.0;
  for (double h : {1.0 / 32, 1.0 / 64}) {
    auto grid = rasterize(DomainSpec::rectangle(1, 1), h);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix)
        grid.values[grid.index(ix, iy)] =
            grid.inside(ix, iy) ? std::cos(kPi * grid.x(ix)) * std::cos(kPi * grid.y(iy)) : 0.0;
    QEigenpair pair;
    pair.lambda = 2 * kPi * kPi;
    pair.eigenfunction = grid;
    const double r = residual(pair, lin);
    if (prev > 0.0) CHECK(prev / r == Approx(4.0).epsilon(0.05));
    prev = r;
  }
}

TEST_CASE("symmetric minimization") {
  ProblemParams lin(2, 2.0, true);
  const auto sq = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 32);
  CHECK(minimize_rayleigh_symmetric(lin, sq, Reflection::x1).lambda ==
        Approx(minimize_rayleigh(lin, sq).lambda).epsilon(1e-9));

  ProblemParams p(2, 3.0);
  const double full = minimize_rayleigh(p, sq).lambda;
  CHECK(rel(minimize_rayleigh_symmetric(p, sq, Reflection::x1).lambda, full) < 1e-8);
  CHECK(rel(minimize_rayleigh_symmetric(p, sq, Reflection::x2).lambda, full) < 1e-8);

  const auto shifted =
      rasterize_predicate([](double x, double y) { return x > -0.5 && x < 0.3 && std::abs(y) < 0.5; },
                          1.0, 1.0, 1.0 / 32);
  CHECK(code_of([&] { minimize_rayleigh_symmetric(p, shifted, Reflection::x1); }) ==
        ErrorCode::symmetry);
}

TEST_CASE("half domain reproduces the even ground state") {
  ProblemParams lin(2, 2.0, true);
  const auto sq = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 32);
  const auto half = half_domain(sq);
  CHECK(half.mirror_x1);
  const double mu = minimize_rayleigh(lin, half).lambda;
  CHECK(mu == Approx(minimize_rayleigh(lin, sq).lambda).epsilon(1e-8));
}

TEST_CASE("linearized spectrum on the disk") {
  ProblemParams p(2, 3.0);
  const auto disk = rasterize(DomainSpec::ball(1.0), 1.0 / 64);
  const auto pair = minimize_rayleigh(p, disk);
  const auto mu = linearized_spectrum(pair, p, 3);
  REQUIRE(mu.mu.size() == 3);
  CHECK(mu.mu[0] < 0.0);
  CHECK(mu.mu[1] > 0.0);
  CHECK(mu.mu[1] == Approx(mu.mu[2]).epsilon(1e-4));
  CHECK(mu.ground_state_sign == "constant");
  CHECK(mu.second_mode_changes_sign);
  double l2 = 0.0;
  const auto& g = *pair.grid();
  for (double v : g.values) l2 += g.cell_measure() * v * v;
  CHECK(mu.mu[0] <= (2.0 - 3.0) * pair.lambda / l2);
}

TEST_CASE("solver errors") {
  ProblemParams p(2, 3.0);
  const auto sq = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 16);
  RayleighOptions opts;
  opts.max_iter = 1;
  CHECK(code_of([&] { minimize_rayleigh(p, sq, opts); }) == ErrorCode::convergence);
  CHECK(richardson(1.0, 2.0) == Approx(7.0 / 3.0));
}

TEST_CASE("dumbbell breaks symmetry") {
  ProblemParams p(2, 3.0);
  DumbbellOptions opts;
  opts.estimate_discretization = false;
  const auto r = dumbbell_experiment(1.0 / 16, p, 1.0 / 32, opts);
  CHECK(r.ratio > 1.0);
  CHECK(r.localization > 0.9);
  CHECK(r.factor == Approx(std::cbrt(2.0)));
  CHECK(r.identity_gap < 1e-6);
  CHECK(r.mu_q_half <= r.upper_bound);
  CHECK(code_of([] { dumbbell_experiment(0.1, ProblemParams(2, 1.5), 1.0 / 16); }) ==
        ErrorCode::regime);
}
