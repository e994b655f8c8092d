#include "qspec/compose.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qspec/radial.hpp"

namespace qspec {

std::size_t SpinVector::active() const noexcept {
  return static_cast<std::size_t>(std::count(delta.begin(), delta.end(), std::uint8_t{1}));
}

std::string SpinVector::str() const {
  std::string s;
  for (auto d : delta) s.push_back(d ? '1' : '0');
  return s;
}

SpinVector Selection::spins() const {
  SpinVector s;
  for (int l : levels) s.delta.push_back(l >= 0 ? 1 : 0);
  return s;
}

namespace {

double spin_exponent(const ProblemParams& params) {
  return params.q() / (2.0 - params.q());
}

// (ref / lambda)^p, falling back to logarithms when the ratio leaves the
// normal range.
double relative_term(double ref, double lambda, double p) {
  const double ratio = ref / lambda;
  if (std::isnormal(ratio)) return std::pow(ratio, p);
  return std::exp(p * (std::log(ref) - std::log(lambda)));
}

// Lambda from the active eigenvalues; order independent.
double compose_values(std::vector<double> active, double p) {
  if (p > 0.0) {
    std::sort(active.begin(), active.end());
  } else {
    std::sort(active.begin(), active.end(), std::greater<>());
  }
  const double ref = active.front();
  double s = 0.0;
  for (auto it = active.rbegin(); it != active.rend(); ++it) s += relative_term(ref, *it, p);
  return ref * std::pow(s, -1.0 / p);
}

void check_positive(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::invalid_input, "component eigenvalues must be positive and finite");
  }
}

}  // namespace

SpectrumSample spin_eigenvalue(const std::vector<double>& lambdas,
                               const SpinVector& spins, const ProblemParams& params) {
  params.require_nonlinear("spin formula");
  if (lambdas.size() != spins.delta.size()) {
    throw Error(ErrorCode::invalid_input, "spin vector and eigenvalue list differ in length");
  }
  std::vector<double> active;
  SpectrumSample out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (spins.delta[i] > 1) throw Error(ErrorCode::invalid_spin, "spins must be 0 or 1");
    if (spins.delta[i] == 0) continue;
    check_positive(lambdas[i]);
    active.push_back(lambdas[i]);
    out.component_eigenvalues.emplace_back(static_cast<int>(i), lambdas[i]);
  }
  if (active.empty()) throw Error(ErrorCode::invalid_spin, "no active spin");
  const double q = params.q();
  out.value = compose_values(std::move(active), spin_exponent(params));
  out.spins = spins;
  out.alpha.assign(lambdas.size(), 0.0);
  for (const auto& [i, lambda] : out.component_eigenvalues) {
    out.alpha[static_cast<std::size_t>(i)] = std::pow(out.value / lambda, 1.0 / (2.0 - q));
  }
  Selection sel;
  for (std::size_t i = 0; i < lambdas.size(); ++i) sel.levels.push_back(spins.delta[i] ? 0 : -1);
  out.witnesses.push_back(std::move(sel));
  return out;
}

double union_first_eigenvalue(const std::vector<double>& component_lambda1s,
                              const ProblemParams& params) {
  params.require_nonlinear("union first eigenvalue");
  if (component_lambda1s.empty()) throw Error(ErrorCode::invalid_input, "no components");
  for (double l : component_lambda1s) check_positive(l);
  if (params.sub_homogeneous()) {
    return compose_values(component_lambda1s, spin_exponent(params));
  }
  return *std::min_element(component_lambda1s.begin(), component_lambda1s.end());
}

double union_first_eigenvalue(const GeometricRadii& rule, double lambda1_unit,
                              const ProblemParams& params) {
  params.require_nonlinear("union first eigenvalue");
  check_positive(lambda1_unit);
  const double lambda0 = scale_eigenvalue(lambda1_unit, rule.r0, params);
  if (!params.sub_homogeneous()) {
    if (!(rule.gamma > 0.0)) throw Error(ErrorCode::invalid_input, "ratio must be positive");
    return lambda0;  // lambda_i grows along the sequence below the critical exponent
  }
  if (check_ball_union_admissible(rule, params, 0).status != Admissibility::admissible) {
    throw Error(ErrorCode::inadmissible, "radii series diverges");
  }
  const double p = spin_exponent(params);
  const double rho = std::pow(rule.gamma, -params.scaling_exponent() * p);
  return lambda0 * std::exp(std::log1p(-rho) / p);
}

Enumeration enumerate_spectrum(const std::vector<std::vector<double>>& component_spectra,
                               const ProblemParams& params, const EnumerationOptions& opts) {
  params.require_nonlinear("spectrum enumeration");
  if (component_spectra.empty()) throw Error(ErrorCode::invalid_input, "no components");
  std::vector<double> firsts;
  for (const auto& list : component_spectra) {
    if (list.empty()) throw Error(ErrorCode::invalid_input, "empty component spectrum");
    for (std::size_t i = 0; i < list.size(); ++i) {
      check_positive(list[i]);
      if (i > 0 && list[i] < list[i - 1]) {
        throw Error(ErrorCode::invalid_input, "component spectra must be sorted ascending");
      }
    }
    firsts.push_back(list.front());
  }

  Enumeration out;
  out.ceiling = opts.ceiling ? *opts.ceiling : 10.0 * union_first_eigenvalue(firsts, params);
  if (!(out.ceiling > 0.0)) throw Error(ErrorCode::invalid_input, "ceiling must be positive");
  const double p = spin_exponent(params);
  const bool sub = params.sub_homogeneous();
  out.completeness =
      sub ? "Lambda increases with every active lambda_i and decreases when a spin is "
            "switched on; a branch is cut only when switching on every remaining "
            "component at its smallest value cannot reach the ceiling. Complete "
            "relative to the supplied component lists."
          : "Lambda increases with every active lambda_i and when a spin is switched "
            "on; a branch is cut once its partial value exceeds the ceiling. Complete "
            "relative to the supplied component lists.";

  // Pruning works with t(lambda) = (ceiling / lambda)^p: the selection stays
  // below the ceiling iff sum t >= 1 (p > 0) or sum t <= 1 (p < 0).
  const std::size_t c = component_spectra.size();
  auto t = [&](double lambda) {
    return std::exp(std::clamp(p * std::log(out.ceiling / lambda), -700.0, 700.0));
  };
  std::vector<double> best_rest(c + 1, 0.0);
  for (std::size_t j = c; j-- > 0;) best_rest[j] = best_rest[j + 1] + t(component_spectra[j].front());
  constexpr double slack = 1e-9;

  std::vector<SpectrumSample> raw;
  std::vector<int> levels(c, -1);
  std::function<void(std::size_t, double, bool)> walk = [&](std::size_t j, double S, bool any) {
    if (out.truncated) return;
    if (j == c) {
      if (!any) return;
      ++out.selections_visited;
      std::vector<double> lambdas(c, 1.0);
      SpinVector spins;
      spins.delta.assign(c, 0);
      for (std::size_t k = 0; k < c; ++k) {
        if (levels[k] >= 0) {
          lambdas[k] = component_spectra[k][static_cast<std::size_t>(levels[k])];
          spins.delta[k] = 1;
        }
      }
      SpectrumSample s = spin_eigenvalue(lambdas, spins, params);
      if (s.value > out.ceiling) return;
      s.witnesses.front().levels = levels;
      if (raw.size() >= opts.hard_cap) {
        out.truncated = true;
        return;
      }
      raw.push_back(std::move(s));
      return;
    }
    if (sub && S + best_rest[j] < 1.0 - slack) return;
    if (!sub && S > 1.0 + slack) return;
    levels[j] = -1;
    walk(j + 1, S, any);
    const auto& list = component_spectra[j];
    for (std::size_t l = 0; l < list.size() && !out.truncated; ++l) {
      const double tl = t(list[l]);
      if (sub && S + tl + best_rest[j + 1] < 1.0 - slack) break;
      if (!sub && S + tl > 1.0 + slack) break;
      levels[j] = static_cast<int>(l);
      walk(j + 1, S + tl, true);
    }
    levels[j] = -1;
  };
  walk(0, 0.0, false);

  std::sort(raw.begin(), raw.end(), [](const SpectrumSample& a, const SpectrumSample& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.witnesses.front().levels < b.witnesses.front().levels;
  });
  for (auto& s : raw) {
    if (!out.samples.empty() && out.samples.back().value == s.value) {
      out.samples.back().witnesses.push_back(std::move(s.witnesses.front()));
    } else {
      out.samples.push_back(std::move(s));
    }
  }
  if (opts.count && out.samples.size() > *opts.count) out.samples.resize(*opts.count);
  return out;
}

std::vector<Cluster> accumulation_points(const std::vector<double>& values, double tol,
                                         std::size_t min_cluster) {
  if (!std::is_sorted(values.begin(), values.end())) {
    throw Error(ErrorCode::invalid_input, "values must be sorted");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_input, "tolerance must be positive");
  std::vector<double> x;
  std::vector<std::size_t> first;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!x.empty() && v - x.back() <= 4.0 * (std::nextafter(x.back(), kInf) - x.back())) continue;
    x.push_back(v);
    first.push_back(i);
  }
  const std::size_t n = x.size();
  std::vector<Cluster> out;
  if (n < 2) return out;
  std::vector<double> g(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) g[i] = x[i + 1] - x[i];

  // Witness gaps must grow strictly away from the candidate point.
  auto grows = [&](double inner, double outer, double at) {
    const double ulp = std::nextafter(std::abs(at), kInf) - std::abs(at);
    return outer > inner * (1.0 + 1e-9) + 2.0 * ulp;
  };
  std::vector<std::pair<std::size_t, std::size_t>> runs_above, runs_below;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t k = j;
    while (k + 1 < n && x[k + 1] - x[j] <= tol &&
           (k < j + 2 || grows(g[k - 1], g[k], x[j]))) {
      ++k;
    }
    if (k - j >= min_cluster) runs_above.emplace_back(j, k);
    k = j;
    while (k > 0 && x[j] - x[k - 1] <= tol && (k + 2 > j || grows(g[k], g[k - 1], x[j]))) --k;
    if (j - k >= min_cluster) runs_below.emplace_back(j, k);
  }
  // A candidate that is itself a witness of a longer run on the same side is
  // part of that run, not a separate accumulation point.
  for (const auto& [j, k] : runs_above) {
    const bool inner = std::any_of(runs_above.begin(), runs_above.end(), [&](const auto& r) {
      return r.first < j && j <= r.second;
    });
    if (inner) continue;
    Cluster cl;
    cl.point = x[j];
    cl.from_above = true;
    for (std::size_t i = j + 1; i <= k; ++i) cl.witnesses.push_back(first[i]);
    out.push_back(std::move(cl));
  }
  for (const auto& [j, k] : runs_below) {
    const bool inner = std::any_of(runs_below.begin(), runs_below.end(), [&](const auto& r) {
      return r.first > j && j >= r.second;
    });
    if (inner) continue;
    Cluster cl;
    cl.point = x[j];
    cl.from_above = false;
    for (std::size_t i = j; i-- > k;) cl.witnesses.push_back(first[i]);
    out.push_back(std::move(cl));
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    return a.point != b.point ? a.point < b.point : a.from_above < b.from_above;
  });
  return out;
}

std::vector<Cluster> accumulation_points(const std::vector<SpectrumSample>& samples,
                                         double tol, std::size_t min_cluster) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.value);
  auto clusters = accumulation_points(values, tol, min_cluster);
  for (auto& cl : clusters) {
    for (auto i : cl.witnesses) cl.witness_spins.push_back(samples[i].spins);
  }
  return clusters;
}

TailSequence geometric_union_tail(const GeometricRadii& rule, double lambda1_unit,
                                  const ProblemParams& params, int K) {
  if (!params.sub_homogeneous()) {
    throw Error(ErrorCode::regime, "the decreasing tail needs 1 < q < 2");
  }
  if (K < 1) throw Error(ErrorCode::invalid_input, "truncation must be at least 1");
  TailSequence out;
  out.limit = union_first_eigenvalue(rule, lambda1_unit, params);
  const double p = spin_exponent(params);
  const double log_rho = -params.scaling_exponent() * p * std::log(rule.gamma);

  std::vector<double> lambdas;
  double r = rule.r0;
  for (int k = 1; k <= K; ++k) {
    lambdas.push_back(scale_eigenvalue(lambda1_unit, r, params));
    r *= rule.gamma;
    SpinVector all;
    all.delta.assign(lambdas.size(), 1);
    out.values.push_back(spin_eigenvalue(lambdas, all, params).value);
    // Lambda_k / limit = (1 - rho^k)^{-1/p}
    out.excess.push_back(std::expm1(-std::log1p(-std::exp(k * log_rho)) / p));
  }
  out.strictly_decreasing = true;
  out.above_limit = true;
  for (std::size_t k = 0; k < out.excess.size(); ++k) {
    if (!(out.excess[k] > 0.0)) out.above_limit = false;
    if (k > 0 && !(out.excess[k] < out.excess[k - 1] && out.values[k] <= out.values[k - 1])) {
      out.strictly_decreasing = false;
    }
  }
  return out;
}

TwoBallFamily two_ball_family(const ProblemParams& params, double R, int n_max,
                              double cluster_tol, std::size_t min_cluster) {
  if (n_max < 1) throw Error(ErrorCode::invalid_input, "need at least one radial level");
  TwoBallFamily out;
  for (int n = 1; n <= n_max; ++n) out.radial.push_back(ball_eigenvalue(params, R, n).lambda);
  const SpinVector both{{1, 1}};
  for (int n = 1; n <= n_max; ++n) {
    out.lambda_n1.push_back(
        spin_eigenvalue({out.radial.front(), out.radial[static_cast<std::size_t>(n - 1)]}, both, params)
            .value);
  }
  out.spectrum = enumerate_spectrum({out.radial, out.radial}, params);
  out.clusters = accumulation_points(out.spectrum.samples, cluster_tol, min_cluster);
  return out;
}

}  // namespace qspec
