#include "qspec/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <json.hpp>

#include "qspec/grid.hpp"
#include "qspec/radial.hpp"

namespace qspec {

std::string CheckReport::to_json() const {
  std::function<nlohmann::ordered_json(const CheckReport&)> build = [&](const CheckReport& r) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["passed"] = r.passed;
    j["measured"] = r.measured;
    j["bound_or_target"] = r.bound_or_target;
    j["tolerance"] = r.tolerance;
    j["context"] = r.context;
    if (!r.parts.empty()) {
      j["parts"] = nlohmann::ordered_json::array();
      for (const auto& p : r.parts) j["parts"].push_back(build(p));
    }
    return j;
  };
  return build(*this).dump();
}

double radial_integral(const RadialProfile& prof, const std::vector<double>& f) {
  const std::size_t n = prof.size();
  if (n < 2 || f.size() != n) throw Error(ErrorCode::invalid_input, "profile too short");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (prof.kind == ProfileKind::ball) {
      w = prof.N * unit_ball_measure(prof.N) * std::pow(prof.rho[i], prof.N - 1);
    }
    g[i] = w * f[i];
  }
  const double h = (prof.rho.back() - prof.rho.front()) / static_cast<double>(n - 1);
  const std::size_t m = (n - 1) % 2 == 0 ? n : n - 1;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 < m; i += 2) s += g[i] + 4.0 * g[i + 1] + g[i + 2];
  s *= h / 3.0;
  if (m != n) s += 0.5 * h * (g[n - 2] + g[n - 1]);
  return s;
}

GridField trig_polynomial_field(const GridField& grid, std::uint64_t seed, int degree,
                                double floor) {
  if (degree < 1) throw Error(ErrorCode::invalid_input, "degree must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), phase(0.0, 2.0 * M_PI);
  struct Term {
    int a, b;
    double c, px, py;
  };
  std::vector<Term> terms;
  for (int a = 0; a <= degree; ++a) {
    for (int b = 0; b <= degree; ++b) {
      const double c = coef(rng) / (1.0 + a * a + b * b);
      terms.push_back({a, b, c, phase(rng), phase(rng)});
    }
  }
  GridField f = grid;
  double lo = kInf;
  for (int iy = 0; iy < f.ny; ++iy) {
    for (int ix = 0; ix < f.nx; ++ix) {
      double v = 0.0;
      for (const auto& t : terms) {
        v += t.c * std::cos(t.a * M_PI * f.x(ix) + t.px) * std::cos(t.b * M_PI * f.y(iy) + t.py);
      }
      f.values[f.index(ix, iy)] = v;
      if (f.inside(ix, iy)) lo = std::min(lo, v);
    }
  }
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    f.values[k] = f.mask[k] ? f.values[k] - lo + floor : 0.0;
  }
  return f;
}

namespace {

CheckReport make_report(std::string name, double measured, double target, double tol,
                        std::string context, bool upper_bound = true) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = measured;
  r.bound_or_target = target;
  r.tolerance = tol;
  r.context = std::move(context);
  r.passed = upper_bound ? measured <= target + tol : std::abs(measured - target) <= tol;
  return r;
}

// Boundary integral of |du/dnu|^2 <x, nu> for a centred rectangle with
// lattice-aligned sides, by one-sided second-order differences.
double rectangle_flux(const GridField& g, const Rectangle& rect) {
  const double h = g.h;
  const double ax = 0.5 * rect.a, by = 0.5 * rect.b;
  if (std::abs(ax / h - std::round(ax / h)) > 1e-9 || std::abs(by / h - std::round(by / h)) > 1e-9) {
    throw Error(ErrorCode::unsupported_domain, "rectangle sides must lie on the lattice");
  }
  const int bx = static_cast<int>(std::lround(ax / h));
  const int byi = static_cast<int>(std::lround(by / h));
  if (g.i0 > -bx || g.j0 > -byi || g.i0 + g.nx - 1 < bx || g.j0 + g.ny - 1 < byi) {
    throw Error(ErrorCode::invalid_input, "grid does not cover the rectangle");
  }
  auto val = [&](int i, int j) {
    const int ix = i - g.i0, iy = j - g.j0;
    return g.inside(ix, iy) ? g.values[g.index(ix, iy)] : 0.0;
  };
  double flux = 0.0;
  for (int j = -byi + 1; j <= byi - 1; ++j) {
    const double right = (4.0 * val(bx - 1, j) - val(bx - 2, j)) / (2.0 * h);
    const double left = (4.0 * val(-bx + 1, j) - val(-bx + 2, j)) / (2.0 * h);
    flux += ax * h * (right * right + left * left);
  }
  for (int i = -bx + 1; i <= bx - 1; ++i) {
    const double top = (4.0 * val(i, byi - 1) - val(i, byi - 2)) / (2.0 * h);
    const double bottom = (4.0 * val(i, -byi + 1) - val(i, -byi + 2)) / (2.0 * h);
    flux += by * h * (top * top + bottom * bottom);
  }
  return flux;
}

}  // namespace

CheckReport pohozaev_check(const QEigenpair& pair, const DomainSpec& domain,
                           const ProblemParams& params, double tolerance) {
  const double C = pohozaev_constant(params);
  const double q = params.q();
  double lhs = 0.0, rhs = 0.0;
  if (const auto* prof = pair.radial()) {
    const auto* ball = std::get_if<Ball>(&domain.shape);
    if (ball == nullptr || prof->kind != ProfileKind::ball) {
      throw Error(ErrorCode::unsupported_domain, "radial pairs are checked on balls");
    }
    const int N = params.N();
    const double R = ball->radius;
    if (std::abs(prof->rho.back() - R) > 1e-9 * R) {
      throw Error(ErrorCode::invalid_input, "profile does not end on the sphere of radius R");
    }
    const double slope = prof->uprime.back();
    lhs = pair.lambda * std::pow(pair.lq_norm, 2.0);
    rhs = C * N * unit_ball_measure(N) * std::pow(R, N) * slope * slope;
  } else if (const auto* g = pair.grid()) {
    const auto* rect = std::get_if<Rectangle>(&domain.shape);
    if (rect == nullptr || g->dim != 2) {
      throw Error(ErrorCode::unsupported_domain, "grid pairs are checked on rectangles");
    }
    lhs = pair.lambda * std::pow(lq_mass(*g, q), 2.0 / q);
    rhs = C * rectangle_flux(*g, *rect);
  }
  const double mismatch = std::abs(lhs - rhs) / lhs;
  return make_report("pohozaev", mismatch, 0.0, tolerance, pair.provenance);
}

CheckReport linf_bound_ratio(const std::vector<QEigenpair>& pairs,
                             const ProblemParams& params, double spread_bound) {
  if (params.N() < 3) {
    throw Error(ErrorCode::invalid_dimension, "the L-infinity scaling test is for N >= 3");
  }
  if (pairs.empty()) throw Error(ErrorCode::invalid_input, "no eigenpairs");
  const double two_star = params.two_star();
  const double q = params.q();
  double lo = kInf, hi = 0.0;
  for (const auto& p : pairs) {
    double sup = 0.0;
    if (const auto* prof = p.radial()) {
      for (double u : prof->u) sup = std::max(sup, std::abs(u));
    } else if (const auto* g = p.grid()) {
      for (double u : g->values) sup = std::max(sup, std::abs(u));
    }
    const double rho = sup / (std::pow(std::sqrt(p.lambda), two_star / (two_star - q)) * p.lq_norm);
    lo = std::min(lo, rho);
    hi = std::max(hi, rho);
  }
  return make_report("linf-bound-ratio", hi / lo, 1.0, spread_bound - 1.0,
                     std::to_string(pairs.size()) + " radii");
}

CheckReport picone_check(const GridField& psi, const GridField& phi, PiconeVariant variant,
                         const ProblemParams& params, double slack_constant) {
  if (psi.dim != 2 || phi.dim != 2 || psi.nx != phi.nx || psi.ny != phi.ny ||
      psi.i0 != phi.i0 || psi.j0 != phi.j0 || psi.h != phi.h || psi.mask != phi.mask) {
    throw Error(ErrorCode::invalid_input, "fields must share one planar grid");
  }
  const double q = params.q();
  if (variant == PiconeVariant::generalized && !(q > 1.0 && q < 2.0)) {
    throw Error(ErrorCode::regime, "generalized Picone inequality needs 1 < q < 2");
  }
  const double h = psi.h;
  auto in_stencil = [&](int ix, int iy) {
    return psi.inside(ix, iy) && psi.inside(ix + 1, iy) && psi.inside(ix - 1, iy) &&
           psi.inside(ix, iy + 1) && psi.inside(ix, iy - 1);
  };
  std::vector<double> w(psi.values.size(), 0.0);
  for (int iy = 0; iy < psi.ny; ++iy) {
    for (int ix = 0; ix < psi.nx; ++ix) {
      if (!psi.inside(ix, iy)) continue;
      const auto k = psi.index(ix, iy);
      if (!(psi.values[k] > 0.0)) throw Error(ErrorCode::invalid_input, "psi must be positive");
      if (phi.values[k] < 0.0) throw Error(ErrorCode::invalid_input, "phi must be nonnegative");
      w[k] = variant == PiconeVariant::classical
                 ? phi.values[k] * phi.values[k] / psi.values[k]
                 : std::pow(phi.values[k], q) / std::pow(psi.values[k], q - 1.0);
    }
  }
  auto grad = [&](const std::vector<double>& f, int ix, int iy) {
    return std::pair{(f[psi.index(ix + 1, iy)] - f[psi.index(ix - 1, iy)]) / (2.0 * h),
                     (f[psi.index(ix, iy + 1)] - f[psi.index(ix, iy - 1)]) / (2.0 * h)};
  };
  double worst = -kInf;
  std::size_t points = 0;
  for (int iy = 0; iy < psi.ny; ++iy) {
    for (int ix = 0; ix < psi.nx; ++ix) {
      if (!in_stencil(ix, iy)) continue;
      const auto [px, py] = grad(psi.values, ix, iy);
      const auto [fx, fy] = grad(phi.values, ix, iy);
      const auto [wx, wy] = grad(w, ix, iy);
      const double lhs = px * wx + py * wy;
      const double gphi2 = fx * fx + fy * fy;
      const double rhs = variant == PiconeVariant::classical
                             ? gphi2
                             : std::pow(gphi2, 0.5 * q) * std::pow(px * px + py * py, 1.0 - 0.5 * q);
      worst = std::max(worst, lhs - rhs);
      ++points;
    }
  }
  if (points == 0) throw Error(ErrorCode::empty_domain, "no node has a full stencil");
  return make_report(variant == PiconeVariant::classical ? "picone-classical" : "picone-generalized",
                     worst, 0.0, slack_constant * h, "h=" + std::to_string(h));
}

CheckReport eigenpair_sanity(const QEigenpair& pair, double lambda1_of_domain,
                             const ProblemParams& params, double tol) {
  const double q = params.q();
  const bool first = pair.sign_class == SignClass::positive;
  double mass = 0.0, energy = 0.0, min_u = 0.0, max_u = 0.0;
  if (const auto* prof = pair.radial()) {
    std::vector<double> fu(prof->size()), fd(prof->size());
    for (std::size_t i = 0; i < prof->size(); ++i) {
      fu[i] = std::pow(std::abs(prof->u[i]), q);
      fd[i] = prof->uprime[i] * prof->uprime[i];
      min_u = std::min(min_u, prof->u[i]);
      max_u = std::max(max_u, prof->u[i]);
    }
    mass = radial_integral(*prof, fu);
    energy = radial_integral(*prof, fd);
  } else if (const auto* g = pair.grid()) {
    mass = lq_mass(*g, q);
    energy = dirichlet_energy(*g);
    for (double u : g->values) {
      min_u = std::min(min_u, u);
      max_u = std::max(max_u, u);
    }
  }
  const double norm = std::pow(mass, 1.0 / q);

  CheckReport r;
  r.name = "eigenpair-sanity";
  r.context = pair.provenance;
  r.measured = pair.lambda;
  r.bound_or_target = lambda1_of_domain;
  r.tolerance = tol;
  r.parts.push_back(make_report("lambda-at-least-lambda1", lambda1_of_domain - pair.lambda, 0.0,
                                tol * lambda1_of_domain, pair.provenance));
  const double amplitude = std::max(max_u, -min_u);
  double sign_defect = 0.0;
  if (first) {
    sign_defect = std::min(max_u, -min_u) / amplitude;
  } else {
    sign_defect = pair.sign_class == SignClass::sign_changing && min_u < 0.0 && max_u > 0.0 ? 0.0 : 1.0;
  }
  r.parts.push_back(make_report(first ? "first-eigenfunction-one-sign" : "higher-eigenfunction-sign",
                                sign_defect, 0.0, first ? 1e-8 : 0.0, pair.provenance));
  r.parts.push_back(make_report("unit-lq-norm", norm, 1.0, tol, pair.provenance, false));
  const double target = pair.lambda * norm * norm;
  r.parts.push_back(make_report("energy-identity", std::abs(energy - target) / target, 0.0, tol,
                                pair.provenance));
  r.passed = std::all_of(r.parts.begin(), r.parts.end(), [](const CheckReport& c) { return c.passed; });
  return r;
}

}  // namespace qspec
