// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cli.hpp"
#include "qspec/compose.hpp"
#include "qspec/grid.hpp"
#include "qspec/radial.hpp"
#include "qspec/verify.hpp"

using namespace qspec;
namespace fs = std::filesystem;
using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<300>>;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a / b - 1.0); }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void need(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

// Every first eigenpair produced in this run, for criterion 9.
std::vector<QEigenpair> g_first_pairs;

QEigenpair keep(QEigenpair pair) {
  if (pair.sign_class == SignClass::positive) g_first_pairs.push_back(pair);
  return pair;
}

bool nonnegative(const QEigenpair& pair) {
  if (const auto* g = pair.grid()) {
    return std::all_of(g->values.begin(), g->values.end(), [](double v) { return v >= 0.0; });
  }
  const auto& u = pair.radial()->u;
  return std::all_of(u.begin(), u.end(), [](double v) { return v >= 0.0; });
}

Outcome criterion1() {
  Outcome o;
  ProblemParams lin1(1, 2.0, true), lin2(2, 2.0, true);
  auto t0 = Clock::now();
  for (int k : {1, 2, 3}) {
    const double l = interval_eigenvalue(lin1, 1.0, k).lambda;
    o.need(rel(l, k * k * kPi * kPi) < 1e-3, fmt("interval k=%d rel %.2e", k, rel(l, k * k * kPi * kPi)));
  }
  const double t_interval = seconds_since(t0);
  o.need(t_interval < 1.0, fmt("interval %.3fs", t_interval));

  t0 = Clock::now();
  const auto sq = DomainSpec::rectangle(1, 1);
  const double c = keep(minimize_rayleigh(lin2, rasterize(sq, 1.0 / 64))).lambda;
  const double f = keep(minimize_rayleigh(lin2, rasterize(sq, 1.0 / 128))).lambda;
  const double ext = richardson(c, f);
  const double t_square = seconds_since(t0);
  o.need(rel(ext, 2 * kPi * kPi) < 1e-2,
         fmt("square h=1/128 %.7f, extrapolated %.7f, rel %.1e", f, ext, rel(ext, 2 * kPi * kPi)));
  o.need(t_square < 30.0, fmt("square %.2fs", t_square));

  const double j01sq = 5.783185962946784;
  const double radial = keep(ball_eigenvalue(lin2, 1.0, 1)).lambda;
  const double grid = keep(minimize_rayleigh(lin2, rasterize(DomainSpec::ball(1.0), 1.0 / 128))).lambda;
  o.need(rel(radial, j01sq) < 5e-3, fmt("disk radial %.7f", radial));
  o.need(rel(grid, j01sq) < 1e-2, fmt("disk grid %.5f (rel %.2e)", grid, rel(grid, j01sq)));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto disk = rasterize(DomainSpec::ball(1.0), 1.0 / 128);
  for (double q : {1.5, 3.0}) {
    ProblemParams p(2, q);
    const auto t0 = Clock::now();
    const double r = keep(ball_eigenvalue(p, 1.0, 1)).lambda;
    const double g = keep(minimize_rayleigh(p, disk)).lambda;
    const double dt = seconds_since(t0);
    o.need(rel(g, r) < 0.02 && dt < 120.0,
           fmt("q=%.1f radial %.6f grid %.6f rel %.2e in %.2fs", q, r, g, rel(g, r), dt));
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  ProblemParams sub(2, 1.5), sup(2, 3.0);
  auto t0 = Clock::now();
  const std::vector<double> lam{3.5, 0.25, 81.0};
  bool single = true;
  for (std::size_t j = 0; j < lam.size(); ++j) {
    SpinVector s{std::vector<std::uint8_t>(lam.size(), 0)};
    s.delta[j] = 1;
    single = single && spin_eigenvalue(lam, s, sub).value == lam[j] &&
             spin_eigenvalue(lam, s, sup).value == lam[j];
  }
  const SpinVector both{{1, 1}};
  const double a = spin_eigenvalue({1.0, 1.0}, both, sub).value;
  const double b = spin_eigenvalue({1.0, 1.0}, both, sup).value;
  const double t_exact = seconds_since(t0);
  o.need(single, "single-spin embedding returns lambda_j exactly");
  o.need(a == std::cbrt(0.5), fmt("q=1.5 (1,1) -> %.17g", a));
  o.need(b == std::cbrt(2.0), fmt("q=3 (1,1) -> %.17g", b));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> e(-30.0, 30.0);
  double worst = 0.0, slowest = 0.0;
  for (double q : {1.5, 3.0}) {
    ProblemParams p(2, q);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> l(2 + trial % 5);
      for (auto& x : l) x = std::pow(10.0, e(rng));
      const auto t1 = Clock::now();
      const double v = spin_eigenvalue(l, SpinVector{std::vector<std::uint8_t>(l.size(), 1)}, p).value;
      slowest = std::max(slowest, seconds_since(t1));
      const Big pb = Big(q) / (2 - Big(q));
      Big s = 0;
      for (double x : l) s += pow(Big(x), -pb);
      const double ref = static_cast<double>(pow(s, -1 / pb));
      const double ulp = std::nextafter(ref, INFINITY) - ref;
      worst = std::max(worst, std::abs(v - ref) / ulp);
    }
  }
  o.need(worst <= 2.0, fmt("log-space recomposition over 1e+-30: worst %.1f ulp", worst));
  o.need(slowest < 1e-3 && t_exact < 1e-3, fmt("slowest call %.1e s", slowest));
  return o;
}

Outcome criterion4() {
  Outcome o;
  ProblemParams p(2, 1.5);
  const auto t0 = Clock::now();
  const double unit = keep(ball_eigenvalue(p, 1.0, 1)).lambda;
  const auto tail = geometric_union_tail(GeometricRadii{1.0, 0.5}, unit, p, 50);
  std::vector<double> sorted = tail.values;
  std::sort(sorted.begin(), sorted.end());
  const auto clusters = accumulation_points(sorted, 0.01 * tail.limit, 3);
  const double dt = seconds_since(t0);

  // High-precision oracle for the partial unions: Lambda_k = lambda_1 S_k^{-1/3},
  // S_k = sum_{i<k} 2^{-8i}. Excess below 1e-120 needs ~300 bits.
  Big S = 0;
  bool dec = true, above = true;
  double worst_excess = 0.0;
  Big prev = 0;
  Big full = 0;
  for (int i = 0; i < 200; ++i) full += pow(Big(2), -8 * i);
  const Big limit_big = Big(unit) * pow(full, Big(-1) / 3);
  for (int k = 1; k <= 50; ++k) {
    S += pow(Big(2), -8 * (k - 1));
    const Big v = Big(unit) * pow(S, Big(-1) / 3);
    if (k > 1 && !(v < prev)) dec = false;
    if (!(v > limit_big)) above = false;
    const double ex = static_cast<double>(v / limit_big - 1);
    worst_excess = std::max(worst_excess, std::abs(tail.excess[k - 1] / ex - 1.0));
    prev = v;
  }
  o.need(tail.strictly_decreasing && dec, "Lambda_k strictly decreasing (library and 300-bit oracle)");
  o.need(tail.above_limit && above, "Lambda_k > limit for all k <= 50");
  o.need(worst_excess < 1e-9, fmt("excess Lambda_k/limit-1 matches oracle, worst rel %.1e", worst_excess));
  const double closed = unit * std::cbrt(255.0 / 256.0);
  const double series = static_cast<double>(limit_big);
  o.need(std::abs(closed - series) < 1e-10 && std::abs(tail.limit - series) < 1e-10,
         fmt("limit %.15f vs series oracle %.15f", tail.limit, series));
  const bool flagged = std::any_of(clusters.begin(), clusters.end(), [&](const Cluster& c) {
    return c.from_above && std::abs(c.point - tail.limit) <= 1e-12 * tail.limit;
  });
  o.need(flagged, fmt("detector flags the limit (%zu cluster(s))", clusters.size()));
  o.need(dt < 1.0, fmt("%.3fs", dt));
  return o;
}

Outcome criterion5() {
  Outcome o;
  ProblemParams p(2, 1.5);
  const auto t0 = Clock::now();
  const double l1 = keep(ball_eigenvalue(p, 1.0, 1)).lambda;
  const auto fam = two_ball_family(p, 1.0, 50, 0.25 * l1, 10);
  const double dt = seconds_since(t0);
  bool mono = true, below = true;
  for (std::size_t n = 0; n < fam.lambda_n1.size(); ++n) {
    if (n > 0 && !(fam.lambda_n1[n] > fam.lambda_n1[n - 1])) mono = false;
    if (!(fam.lambda_n1[n] < l1)) below = false;
  }
  o.need(mono && below, "Lambda_{n,1} increases monotonically below lambda_1(B_1)");
  const double gap = l1 - fam.lambda_n1.back();
  o.need(gap < 1e-3 * l1, fmt("lambda_1 - Lambda_{50,1} = %.2e", gap));
  std::size_t best = 0;
  for (const auto& c : fam.clusters) best = std::max(best, c.witnesses.size());
  o.need(!fam.clusters.empty() && best >= 10,
         fmt("%zu cluster(s), largest with %zu witnesses", fam.clusters.size(), best));
  o.need(dt < 10.0, fmt("%.2fs", dt));
  return o;
}

Outcome criterion6() {
  Outcome o;
  ProblemParams p(2, 3.0);
  const double eps = 1.0 / 16;
  const auto t0 = Clock::now();
  const auto r = dumbbell_experiment(eps, p, 1.0 / 128);
  const double dt = seconds_since(t0);
  const double disc = r.disc_error_lambda1 + r.disc_error_sym;
  o.need(r.ratio > 1.0 && r.margin > 3.0 * disc,
         fmt("ratio %.8f, margin %.4f vs 3 x disc. error %.2e", r.ratio, r.margin, 3.0 * disc));
  o.need(r.identity_gap <= 3.0 * r.solver_error,
         fmt("identity gap %.2e vs 3 x solver error %.2e", r.identity_gap, 3.0 * r.solver_error));
  o.need(r.localization > 0.9, fmt("localization %.6f", r.localization));
  const double stated = std::pow(1.0 - eps, -8.0 / 3.0) * r.lambda1_cube;
  o.need(r.mu_q_half <= stated, fmt("mu_q(half) %.6f <= (1-eps)^(-8/3) lambda_1(Q_1) = %.6f",
                                    r.mu_q_half, stated));
  o.need(r.mu_q_half <= r.upper_bound,
         fmt("and <= (1-eps)^(N-2-2N/q) lambda_1(Q_1) = %.6f", r.upper_bound));
  o.need(dt < 300.0, fmt("%.2fs", dt));
  return o;
}

Outcome criterion7() {
  Outcome o;
  ProblemParams p(2, 3.0);
  const auto t0 = Clock::now();
  const auto pair = keep(minimize_rayleigh(p, rasterize(DomainSpec::ball(1.0), 1.0 / 128)));
  const auto mu = linearized_spectrum(pair, p, 3);
  const double dt = seconds_since(t0);
  const auto& g = *pair.grid();
  double l2 = 0.0;
  for (double v : g.values) l2 += g.cell_measure() * v * v;
  const double bound = (2.0 - 3.0) * pair.lambda / l2;
  o.need(mu.mu[0] < 0.0 && mu.mu[1] > 0.0, fmt("mu_1 %.4f, mu_2 %.4f", mu.mu[0], mu.mu[1]));
  o.need(mu.mu[0] <= bound, fmt("mu_1 <= (2-q) lambda_1/|U|_2^2 = %.4f", bound));
  o.need(dt < 120.0, fmt("%.2fs", dt));
  return o;
}

Outcome criterion8() {
  Outcome o;
  ProblemParams p(2, 3.0);
  const auto ball = keep(ball_eigenvalue(p, 1.0, 1));
  const auto r = pohozaev_check(ball, DomainSpec::ball(1.0), p);
  o.need(r.measured < 1e-4, fmt("radial mismatch %.2e", r.measured));
  ProblemParams lin(2, 2.0, true);
  const auto sq = DomainSpec::rectangle(1, 1);
  const double m64 =
      pohozaev_check(keep(minimize_rayleigh(lin, rasterize(sq, 1.0 / 64))), sq, lin).measured;
  const double m128 =
      pohozaev_check(keep(minimize_rayleigh(lin, rasterize(sq, 1.0 / 128))), sq, lin).measured;
  const double order = std::log2(m64 / m128);
  o.need(order >= 1.0, fmt("grid mismatch %.2e -> %.2e, order %.2f", m64, m128, order));
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto grid = rasterize(DomainSpec::rectangle(1, 1), 1.0 / 128);
  ProblemParams sub(2, 1.5);
  int violations = 0;
  double worst = -kInf;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto psi = trig_polynomial_field(grid, 1000 + 2 * seed, 3, 0.5);
    const auto phi = trig_polynomial_field(grid, 1001 + 2 * seed, 3, 0.0);
    for (auto v : {PiconeVariant::classical, PiconeVariant::generalized}) {
      const auto rep = picone_check(psi, phi, v, sub);
      if (!rep.passed) ++violations;
      worst = std::max(worst, rep.measured);
    }
  }
  o.need(violations == 0, fmt("Picone: %d violations in 200 checks, worst lhs-rhs %.1e", violations, worst));

  ProblemParams p3(3, 3.0);
  std::vector<QEigenpair> pairs;
  for (double R : {0.5, 1.0, 2.0, 4.0}) pairs.push_back(keep(ball_eigenvalue(p3, R, 1)));
  const auto linf = linf_bound_ratio(pairs, p3);
  o.need(linf.measured <= 1.01, fmt("L-inf ratio spread %.12f", linf.measured));

  double round_trip = 0.0, commute = 0.0;
  for (double q : {1.5, 3.0}) {
    ProblemParams p(2, q);
    const std::vector<double> lam{1.3, 4.0, 11.0};
    for (double t : {0.1, 0.5, 3.0, 40.0}) {
      for (double l : lam) {
        round_trip = std::max(round_trip, rel(scale_eigenvalue(scale_eigenvalue(l, t, p), 1 / t, p), l));
      }
      std::vector<double> scaled;
      for (double l : lam) scaled.push_back(scale_eigenvalue(l, t, p));
      const SpinVector all{{1, 1, 1}};
      commute = std::max(commute, rel(spin_eigenvalue(scaled, all, p).value,
                                      scale_eigenvalue(spin_eigenvalue(lam, all, p).value, t, p)));
    }
  }
  o.need(round_trip < 1e-10 && commute < 1e-10,
         fmt("scaling round trip %.1e, composition commutes %.1e", round_trip, commute));

  const std::size_t n = g_first_pairs.size();
  const auto neg = std::count_if(g_first_pairs.begin(), g_first_pairs.end(),
                                 [](const QEigenpair& q) { return !nonnegative(q); });
  o.need(n > 0 && neg == 0, fmt("%zu first eigenfunctions nonnegative (%ld failures)", n, static_cast<long>(neg)));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

Outcome criterion10() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "qspec_acceptance";
  fs::create_directories(dir);
  std::ostringstream sink;
  const char* threads[] = {"1", "3"};
  for (const std::string ex : {"example-3.4", "example-3.5", "example-4.4"}) {
    for (const std::string format : {"csv", "json"}) {
      std::string out[2];
      bool ran = true;
      for (int run = 0; run < 2; ++run) {
        setenv("QSPEC_THREADS", threads[run], 1);
        const fs::path path = dir / (ex + "-" + std::to_string(run) + "." + format);
        ran = ran && cli::run({"repro", ex, "--seed", "7", "--format", format, "--out", path.string()},
                              sink, sink) == 0;
        out[run] = slurp(path);
      }
      o.need(ran && !out[0].empty() && out[0] == out[1],
             fmt("%s %s identical (%zu bytes)", ex.c_str(), format.c_str(), out[0].size()));
    }
  }
  unsetenv("QSPEC_THREADS");
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3,
                                                       criterion4, criterion5, criterion6,
                                                       criterion7, criterion8, criterion9,
                                                       criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("criterion %zu: %s [%.2fs] %s\n", i + 1, o.pass ? "PASS" : "FAIL", seconds_since(t0),
                detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
