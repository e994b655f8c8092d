#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qspec/compose.hpp"
#include "qspec/radial.hpp"

using namespace qspec;
using doctest::Approx;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Big big_spin(const std::vector<double>& lambdas, double q) {
  const Big p = Big(q) / (2 - Big(q));
  Big s = 0;
  for (double l : lambdas) s += pow(Big(l), -p);
  return pow(s, -1 / p);
}

double ulps(double a, Big b) {
  const double bd = static_cast<double>(b);
  const double spacing = std::nextafter(std::abs(bd), INFINITY) - std::abs(bd);
  return static_cast<double>(abs(Big(a) - b)) / spacing;
}

SpinVector spins(std::string_view s) {
  SpinVector v;
  for (char c : s) v.delta.push_back(c == '1' ? 1 : 0);
  return v;
}

}  // namespace

TEST_CASE("spin formula against a 50-digit oracle") {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> expo(-30.0, 30.0);
  for (double q : {1.1, 1.5, 1.9, 2.5, 3.0, 6.0}) {
    ProblemParams p(2, q);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + trial % 7;
      std::vector<double> lam(n);
      for (auto& l : lam) l = std::pow(10.0, expo(rng));
      const auto s = spin_eigenvalue(lam, SpinVector{std::vector<std::uint8_t>(n, 1)}, p);
      CHECK(ulps(s.value, big_spin(lam, q)) <= 2.0);
    }
  }
}

TEST_CASE("single spin and order independence") {
  ProblemParams p(2, 1.5);
  std::vector<double> lam{3.0, 1e-20, 7.5e12};
  for (std::size_t j = 0; j < lam.size(); ++j) {
    SpinVector v{std::vector<std::uint8_t>(lam.size(), 0)};
    v.delta[j] = 1;
    CHECK(spin_eigenvalue(lam, v, p).value == lam[j]);
  }
  const double a = spin_eigenvalue(lam, spins("111"), p).value;
  std::vector<double> rev(lam.rbegin(), lam.rend());
  CHECK(spin_eigenvalue(rev, spins("111"), p).value == a);

  CHECK(spin_eigenvalue({1.0, 1.0}, spins("11"), p).value == Approx(std::cbrt(0.5)).epsilon(1e-15));
  CHECK(spin_eigenvalue({1.0, 1.0}, spins("11"), ProblemParams(2, 3.0)).value ==
        Approx(std::cbrt(2.0)).epsilon(1e-15));

  const auto s = spin_eigenvalue({2.0, 5.0, 9.0}, spins("101"), p);
  CHECK(s.spins.active() == 2);
  CHECK(s.alpha[1] == 0.0);
  CHECK(s.component_eigenvalues.size() == 2);
  CHECK_THROWS_AS(spin_eigenvalue({1.0, 2.0}, spins("00"), p), Error);
  CHECK_THROWS_AS(spin_eigenvalue({1.0, 2.0}, spins("1"), p), Error);
  CHECK_THROWS_AS(spin_eigenvalue({1.0}, spins("1"), ProblemParams(2, 2.0, true)), Error);
}

TEST_CASE("regimes move the union value in opposite directions") {
  const std::vector<double> lam{2.0, 3.0, 4.0};
  const double sub = union_first_eigenvalue(lam, ProblemParams(2, 1.5));
  const double super = union_first_eigenvalue(lam, ProblemParams(2, 3.0));
  CHECK(sub < 2.0);
  CHECK(super == 2.0);
  ProblemParams p(2, 1.5);
  CHECK(spin_eigenvalue(lam, spins("110"), p).value > sub);
  ProblemParams r(2, 3.0);
  CHECK(spin_eigenvalue(lam, spins("111"), r).value > 4.0);
  CHECK(spin_eigenvalue(lam, spins("110"), r).value > super);
}

TEST_CASE("scaling commutes with composition") {
  for (double q : {1.5, 3.0}) {
    ProblemParams p(2, q);
    const std::vector<double> lam{1.3, 4.0, 11.0};
    for (double t : {0.25, 3.0}) {
      std::vector<double> scaled;
      for (double l : lam) scaled.push_back(scale_eigenvalue(l, t, p));
      const double a = union_first_eigenvalue(scaled, p);
      const double b = scale_eigenvalue(union_first_eigenvalue(lam, p), t, p);
      CHECK(std::abs(a / b - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("geometric union limit") {
  ProblemParams p(2, 1.5);
  const double l1 = 4.581119166412;
  const double closed = union_first_eigenvalue(GeometricRadii{1.0, 0.5}, l1, p);
  Big sum = 0;
  for (int i = 0; i < 200; ++i) sum += pow(Big(2), -8 * i);
  const double oracle = static_cast<double>(Big(l1) * pow(sum, Big(-1) / 3));
  CHECK(std::abs(closed - oracle) < 1e-10);
  CHECK(closed == Approx(l1 * std::cbrt(255.0 / 256.0)).epsilon(1e-14));
  CHECK_THROWS_AS(union_first_eigenvalue(GeometricRadii{1.0, 1.5}, l1, p), Error);

  const auto tail = geometric_union_tail(GeometricRadii{1.0, 0.5}, l1, p, 50);
  CHECK(tail.values.size() == 50);
  CHECK(tail.strictly_decreasing);
  CHECK(tail.above_limit);
  CHECK(tail.limit == closed);
  CHECK(tail.values[0] == l1);
  for (std::size_t k = 1; k < 6; ++k) CHECK(tail.excess[k] < tail.excess[k - 1]);
  for (double e : tail.excess) CHECK(e > 0.0);
  CHECK_THROWS_AS(geometric_union_tail(GeometricRadii{}, l1, ProblemParams(2, 3.0), 5), Error);
}

TEST_CASE("enumeration") {
  ProblemParams p(2, 1.5);
  const auto e = enumerate_spectrum({{1.0, 4.0}, {1.0, 4.0}}, p, {.ceiling = 5.0});
  // Off-spin pairs: (1,-), (-,1), (4,-), (-,4), (1,1), (1,4), (4,1), (4,4).
  std::vector<double> vals;
  for (const auto& s : e.samples) vals.push_back(s.value);
  CHECK(std::is_sorted(vals.begin(), vals.end()));
  CHECK(vals.front() == Approx(std::cbrt(0.5)).epsilon(1e-15));
  const auto one = std::find_if(e.samples.begin(), e.samples.end(),
                                [](const auto& s) { return s.value == 1.0; });
  REQUIRE(one != e.samples.end());
  CHECK(one->multiplicity() == 2);
  std::size_t total = 0;
  for (const auto& s : e.samples) total += s.multiplicity();
  CHECK(total == 8);
  CHECK_FALSE(e.truncated);

  const auto few = enumerate_spectrum({{1.0, 4.0}, {1.0, 4.0}}, p, {.ceiling = 5.0, .count = 2});
  CHECK(few.samples.size() == 2);
  CHECK(few.samples[1].value == Approx(std::cbrt(64.0 / 65.0)).epsilon(1e-15));

  const auto cut = enumerate_spectrum({{1.0, 4.0}, {1.0, 4.0}}, p, {.ceiling = 1.0});
  for (const auto& s : cut.samples) CHECK(s.value <= 1.0);

  // Brute force over all selections for a random three-component case.
  for (double q : {1.5, 3.0}) {
    ProblemParams pp(2, q);
    const std::vector<std::vector<double>> comp{{1.0, 2.5, 7.0}, {1.7, 3.1}, {0.9, 5.5}};
    const double ceiling = 6.0;
    std::vector<double> brute;
    for (int a = -1; a < 3; ++a)
      for (int b = -1; b < 2; ++b)
        for (int c = -1; c < 2; ++c) {
          if (a < 0 && b < 0 && c < 0) continue;
          std::vector<double> lam;
          if (a >= 0) lam.push_back(comp[0][a]);
          if (b >= 0) lam.push_back(comp[1][b]);
          if (c >= 0) lam.push_back(comp[2][c]);
          const double v = static_cast<double>(big_spin(lam, q));
          if (v <= ceiling) brute.push_back(v);
        }
    std::sort(brute.begin(), brute.end());
    const auto got = enumerate_spectrum(comp, pp, {.ceiling = ceiling});
    std::vector<double> flat;
    for (const auto& s : got.samples)
      for (std::size_t m = 0; m < s.multiplicity(); ++m) flat.push_back(s.value);
    REQUIRE(flat.size() == brute.size());
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i] == Approx(brute[i]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(enumerate_spectrum({{4.0, 1.0}}, p), Error);
}

TEST_CASE("accumulation detector") {
  std::vector<double> ap;
  for (int i = 0; i < 40; ++i) ap.push_back(1.0 + 0.01 * i);
  CHECK(accumulation_points(ap, 0.5, 5).empty());

  std::vector<double> down;
  for (int k = 1; k <= 30; ++k) down.push_back(2.0 - 1.0 / (k * k));
  down.push_back(2.0);
  std::sort(down.begin(), down.end());
  const auto c = accumulation_points(down, 0.3, 10);
  REQUIRE(c.size() == 1);
  CHECK(c[0].point == 2.0);
  CHECK_FALSE(c[0].from_above);
  CHECK(c[0].witnesses.size() >= 10);

  std::vector<double> up;
  for (int k = 0; k < 20; ++k) up.push_back(3.0 + std::pow(0.5, k));
  up.push_back(3.0);
  std::sort(up.begin(), up.end());
  const auto d = accumulation_points(up, 0.6, 10);
  REQUIRE(d.size() == 1);
  CHECK(d[0].point == 3.0);
  CHECK(d[0].from_above);
  CHECK_THROWS_AS(accumulation_points(std::vector<double>{2.0, 1.0}, 0.1, 3), Error);
}

TEST_CASE("two-ball family approaches the single-ball value") {
  ProblemParams p(2, 1.5);
  const auto fam = two_ball_family(p, 1.0, 20, 0.25 * 4.581119166412, 10);
  REQUIRE(fam.lambda_n1.size() == 20);
  CHECK(fam.lambda_n1[0] == Approx(fam.radial[0] * std::cbrt(0.5)).epsilon(1e-12));
  for (std::size_t n = 1; n < fam.lambda_n1.size(); ++n) {
    CHECK(fam.lambda_n1[n] > fam.lambda_n1[n - 1]);
    CHECK(fam.lambda_n1[n] < fam.radial[0]);
  }
  const auto it = std::find_if(fam.clusters.begin(), fam.clusters.end(), [&](const Cluster& c) {
    return std::abs(c.point - fam.radial[0]) < 1e-12 && !c.from_above;
  });
  REQUIRE(it != fam.clusters.end());
  CHECK(it->witnesses.size() >= 10);
  CHECK(it->witness_spins.size() == it->witnesses.size());
}
