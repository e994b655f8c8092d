#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "output.hpp"
#include "plot.hpp"
#include "qspec/compose.hpp"
#include "qspec/grid.hpp"
#include "qspec/radial.hpp"
#include "qspec/verify.hpp"

namespace qspec::cli {

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Options {
  double q = kUnset;
  int N = 0;
  double R = 1.0;
  double L = 1.0;
  int k = 1;
  double eps = kUnset;
  double h = kUnset;
  double tol = 1e-10;
  int max_iter = 100000;
  std::uint64_t seed = 0x5EED;
  std::string config;
  std::string out;
  std::string plot;
  std::string format = "csv";
  int precision = 10;
  std::string symmetric;
  std::string experiment;
  Json config_json;
  std::filesystem::path config_dir;
};

struct BadConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::convergence:
    case ErrorCode::solver:
    case ErrorCode::not_found:
    case ErrorCode::stiffness:
      return Exit::solver_failed;
    default:
      return Exit::bad_config;
  }
}

// Worker count from QSPEC_THREADS, else the hardware.
unsigned worker_count(std::size_t tasks) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QSPEC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

// Runs f(i) for i < n on a worker pool; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
  std::vector<T> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = worker_count(n);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

void table_row(std::ostream& out, const std::string& key, const std::string& value) {
  out << std::left << std::setw(22) << key << value << '\n';
}

std::string join(const std::vector<double>& v, int p) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i], p);
  return s;
}

double require_q(const Options& o) {
  if (std::isnan(o.q)) throw BadConfig("--q is required");
  return o.q;
}

void emit(const Options& o, const std::string& csv, const Json& json) {
  if (o.out.empty()) return;
  write_file(o.out, o.format == "json" ? json.dump(2) + "\n" : csv);
}

void emit_plot(const Options& o, const std::string& svg) {
  if (!o.plot.empty()) write_file(o.plot, svg);
}

// Config keys fill options whose flags were not given.
void apply_config(Options& o, const std::map<std::string, CLI::Option*>& flags) {
  if (o.config.empty()) return;
  std::ifstream f(o.config);
  if (!f) throw BadConfig("cannot read config " + o.config);
  try {
    o.config_json = Json::parse(f);
  } catch (const std::exception& e) {
    throw BadConfig(std::string("config is not valid JSON: ") + e.what());
  }
  if (!o.config_json.is_object()) throw BadConfig("config must be a JSON object");
  o.config_dir = std::filesystem::path(o.config).parent_path();
  auto unset = [&](const char* name) {
    auto it = flags.find(name);
    return it == flags.end() || it->second->count() == 0;
  };
  const Json& j = o.config_json;
  try {
    if (j.contains("q") && unset("--q")) o.q = j["q"].get<double>();
    if (j.contains("N") && unset("--N")) o.N = j["N"].get<int>();
    if (j.contains("R") && unset("--R")) o.R = j["R"].get<double>();
    if (j.contains("L") && unset("--L")) o.L = j["L"].get<double>();
    if (j.contains("k") && unset("--k")) o.k = j["k"].get<int>();
    if (j.contains("eps") && unset("--eps")) o.eps = j["eps"].get<double>();
    if (j.contains("h") && unset("--h")) o.h = j["h"].get<double>();
    if (j.contains("tol") && unset("--tol")) o.tol = j["tol"].get<double>();
    if (j.contains("max_iter") && unset("--max-iter")) o.max_iter = j["max_iter"].get<int>();
    if (j.contains("seed") && unset("--seed")) o.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("precision") && unset("--precision")) o.precision = j["precision"].get<int>();
  } catch (const Json::exception& e) {
    throw BadConfig(std::string("config value has the wrong type: ") + e.what());
  }
}

RayleighOptions rayleigh_options(const Options& o) {
  RayleighOptions r;
  r.tol = o.tol;
  r.max_iter = o.max_iter;
  r.seed = o.seed;
  return r;
}

// solve-ball / solve-interval --------------------------------------------

void print_pair(std::ostream& out, const QEigenpair& pair, int p) {
  table_row(out, "lambda", num(pair.lambda, p));
  table_row(out, "lq_norm", num(pair.lq_norm, p));
  table_row(out, "sign_class", std::string(to_string(pair.sign_class)));
  if (const auto* prof = pair.radial()) table_row(out, "zeros", join(prof->zeros, p));
  if (pair.iterations > 0) {
    table_row(out, "iterations", std::to_string(pair.iterations));
    table_row(out, "solver_error", num(pair.solver_error, p));
  }
  table_row(out, "label", pair.provenance);
}

int solve_ball(Options& o, std::ostream& out) {
  const ProblemParams params(o.N == 0 ? 2 : o.N, require_q(o), true);
  const QEigenpair pair = ball_eigenvalue(params, o.R, o.k);
  print_pair(out, pair, o.precision);
  emit(o, profile_csv(pair, o.precision), profile_json(pair, o.precision));
  const auto& prof = *pair.radial();
  emit_plot(o, profile_svg(prof.rho, prof.u, prof.zeros,
                           "radial family k=" + std::to_string(o.k) + ", q=" + num(params.q(), 6) +
                               ", N=" + std::to_string(params.N())));
  return Exit::ok;
}

int solve_interval(Options& o, std::ostream& out) {
  if (o.N != 0 && o.N != 1) throw BadConfig("solve-interval is one-dimensional");
  const ProblemParams params(1, require_q(o), true);
  const QEigenpair pair = interval_eigenvalue(params, o.L, o.k);
  print_pair(out, pair, o.precision);
  emit(o, profile_csv(pair, o.precision), profile_json(pair, o.precision));
  const auto& prof = *pair.radial();
  emit_plot(o, profile_svg(prof.rho, prof.u, prof.zeros,
                           "interval mode k=" + std::to_string(o.k) + ", q=" + num(params.q(), 6)));
  return Exit::ok;
}

// solve-grid -------------------------------------------------------------

DomainSpec config_domain(const Options& o) {
  if (!o.config_json.contains("domain")) return DomainSpec::ball(o.R);
  return parse_domain(o.config_json["domain"].dump(), o.config_dir);
}

int solve_grid(Options& o, std::ostream& out) {
  const DomainSpec domain = config_domain(o);
  const double h = std::isnan(o.h) ? 1.0 / 64 : o.h;
  const GridField grid = rasterize(domain, h);
  const ProblemParams params(grid.dim, require_q(o), true);
  QEigenpair pair;
  if (o.symmetric.empty()) {
    pair = minimize_rayleigh(params, grid, rayleigh_options(o));
  } else {
    const Reflection axis = o.symmetric == "x1" ? Reflection::x1 : Reflection::x2;
    pair = minimize_rayleigh_symmetric(params, grid, axis, rayleigh_options(o));
  }
  print_pair(out, pair, o.precision);
  table_row(out, "residual", num(residual(pair, params), o.precision));
  table_row(out, "interior_nodes", std::to_string(grid.interior_count()));
  emit(o, grid_csv(pair, o.precision), grid_json(pair, o.precision));
  if (!o.plot.empty()) {
    const auto& g = *pair.grid();
    std::vector<double> x, u;
    const int iy = g.dim == 1 ? 0 : -g.j0;
    for (int ix = 0; ix < g.nx; ++ix) {
      if (iy < 0 || iy >= g.ny) break;
      x.push_back(g.x(ix));
      u.push_back(g.values[g.index(ix, iy)]);
    }
    emit_plot(o, profile_svg(x, u, {}, "grid eigenfunction along x2 = 0"));
  }
  return Exit::ok;
}

// compose ----------------------------------------------------------------

int compose(Options& o, std::ostream& out) {
  if (o.config_json.is_null()) throw BadConfig("compose needs --config");
  const ProblemParams params(o.N == 0 ? 2 : o.N, require_q(o));
  const Json& j = o.config_json;
  if (!j.contains("components")) throw BadConfig("config has no components");
  std::vector<std::vector<double>> lists;
  Json extra;
  const Json& c = j["components"];
  try {
    if (c.is_array()) {
      for (const auto& list : c) lists.push_back(list.get<std::vector<double>>());
    } else if (c.is_object() && c.value("rule", "") == "geometric") {
      const GeometricRadii rule{c.value("r0", 1.0), c.value("gamma", 0.5)};
      const double unit = c.at("lambda1_unit").get<double>();
      const int count = c.value("count", 20);
      double r = rule.r0;
      for (int i = 0; i < count; ++i, r *= rule.gamma) {
        lists.push_back({scale_eigenvalue(unit, r, params)});
      }
      extra["union_first_eigenvalue"] = rounded(union_first_eigenvalue(rule, unit, params), o.precision);
    } else {
      throw BadConfig("components must be a list of lists or a geometric rule");
    }
  } catch (const Json::exception& e) {
    throw BadConfig(std::string("malformed components: ") + e.what());
  }
  EnumerationOptions eo;
  if (j.contains("ceiling")) eo.ceiling = j["ceiling"].get<double>();
  if (j.contains("count")) eo.count = j["count"].get<std::size_t>();
  const Enumeration e = enumerate_spectrum(lists, params, eo);
  const double tol = j.value("cluster_tol", 0.05 * (e.samples.empty() ? 1.0 : e.samples.front().value));
  const std::size_t min_cluster = j.value("min_cluster", std::size_t{5});
  const auto clusters = accumulation_points(e.samples, tol, min_cluster);

  table_row(out, "samples", std::to_string(e.samples.size()));
  table_row(out, "ceiling", num(e.ceiling, o.precision));
  table_row(out, "truncated", e.truncated ? "yes" : "no");
  out << "value                 multiplicity  spins\n";
  for (const auto& s : e.samples) {
    std::string spins;
    for (const auto& w : s.witnesses) spins += (spins.empty() ? "" : " ") + w.spins().str();
    out << std::left << std::setw(22) << num(s.value, o.precision) << std::setw(14)
        << s.multiplicity() << spins << '\n';
  }
  for (const auto& cl : clusters) {
    table_row(out, "accumulation", num(cl.point, o.precision) + (cl.from_above ? " from above" : " from below") +
                                       " (" + std::to_string(cl.witnesses.size()) + " witnesses)");
  }
  out << "note: experimental evidence only\n";

  Json js;
  js["q"] = rounded(params.q(), o.precision);
  js["N"] = params.N();
  js["ceiling"] = rounded(e.ceiling, o.precision);
  js["truncated"] = e.truncated;
  js["completeness"] = e.completeness;
  if (!extra.is_null()) js.update(extra);
  Json samples = Json::array();
  for (const auto& s : e.samples) samples.push_back(sample_json(s, o.precision));
  js["samples"] = samples;
  js["clusters"] = clusters_json(clusters, o.precision);
  js["note"] = "experimental evidence only";
  emit(o, spectrum_csv(e.samples, o.precision), js);
  std::vector<double> values, points;
  for (const auto& s : e.samples) values.push_back(s.value);
  for (const auto& cl : clusters) points.push_back(cl.point);
  emit_plot(o, spectrum_svg(values, points, "composed spectrum, q=" + num(params.q(), 6)));
  return Exit::ok;
}

// dumbbell ---------------------------------------------------------------

DumbbellReport run_dumbbell(const Options& o, double eps) {
  const ProblemParams params(2, std::isnan(o.q) ? 3.0 : o.q);
  DumbbellOptions d;
  d.rayleigh = rayleigh_options(o);
  return dumbbell_experiment(eps, params, std::isnan(o.h) ? 1.0 / 64 : o.h, d);
}

void print_dumbbell(std::ostream& out, const DumbbellReport& r, int p) {
  table_row(out, "epsilon", num(r.epsilon, p));
  table_row(out, "lambda1", num(r.lambda1, p));
  table_row(out, "lambda1_sym", num(r.lambda1_sym, p));
  table_row(out, "mu_q_half", num(r.mu_q_half, p));
  table_row(out, "ratio", num(r.ratio, p));
  table_row(out, "localization", num(r.localization, p));
  table_row(out, "identity_gap", num(r.identity_gap, p));
  table_row(out, "upper_bound", num(r.upper_bound, p));
}

int dumbbell(Options& o, std::ostream& out) {
  const DumbbellReport r = run_dumbbell(o, std::isnan(o.eps) ? 0.0625 : o.eps);
  print_dumbbell(out, r, o.precision);
  emit(o, dumbbell_csv({r}, o.precision), dumbbell_json(r, o.precision));
  return Exit::ok;
}

// verify -----------------------------------------------------------------

int verify(Options& o, std::ostream& out) {
  const double q = std::isnan(o.q) ? 3.0 : o.q;
  const int N = o.N == 0 ? 2 : o.N;
  const double h = std::isnan(o.h) ? 1.0 / 64 : o.h;
  const ProblemParams params(N, q);
  std::vector<CheckReport> reports;

  const QEigenpair first = ball_eigenvalue(params, o.R, 1);
  const QEigenpair second = ball_eigenvalue(params, o.R, 2);
  reports.push_back(pohozaev_check(first, DomainSpec::ball(o.R), params));
  reports.push_back(eigenpair_sanity(first, first.lambda, params));
  reports.push_back(eigenpair_sanity(second, first.lambda, params));

  const ProblemParams planar(2, q);
  const DomainSpec square = DomainSpec::rectangle(1.0, 1.0);
  const GridField grid = rasterize(square, h);
  const QEigenpair g = minimize_rayleigh(planar, grid, rayleigh_options(o));
  reports.push_back(eigenpair_sanity(g, g.lambda, planar));
  const ProblemParams linear(2, 2.0, true);
  reports.push_back(pohozaev_check(minimize_rayleigh(linear, grid, rayleigh_options(o)), square,
                                   linear, h));

  const double q3 = q > 2.0 && q < 6.0 ? q : 3.0;
  const ProblemParams space(3, q3);
  std::vector<QEigenpair> sweep;
  for (double R : {0.5, 1.0, 2.0, 4.0}) sweep.push_back(ball_eigenvalue(space, R, 1));
  reports.push_back(linf_bound_ratio(sweep, space));

  const ProblemParams sub(2, q > 1.0 && q < 2.0 ? q : 1.5);
  const int pairs = o.config_json.is_object() ? o.config_json.value("picone_pairs", 10) : 10;
  for (auto variant : {PiconeVariant::classical, PiconeVariant::generalized}) {
    CheckReport agg;
    agg.name = variant == PiconeVariant::classical ? "picone-classical" : "picone-generalized";
    agg.context = std::to_string(pairs) + " seeded pairs";
    agg.measured = -kInf;
    for (int i = 0; i < pairs; ++i) {
      const GridField psi = trig_polynomial_field(grid, o.seed + 2 * i, 3, 0.5);
      const GridField phi = trig_polynomial_field(grid, o.seed + 2 * i + 1, 3, 0.0);
      CheckReport r = picone_check(psi, phi, variant, sub);
      agg.measured = std::max(agg.measured, r.measured);
      agg.tolerance = r.tolerance;
    }
    agg.passed = agg.measured <= agg.tolerance;
    reports.push_back(agg);
  }

  bool all = true;
  std::string lines;
  out << "check                          passed  measured          bound/target\n";
  for (const auto& r : reports) {
    all = all && r.passed;
    lines += r.to_json() + "\n";
    out << std::left << std::setw(31) << r.name << std::setw(8) << (r.passed ? "yes" : "NO")
        << std::setw(18) << num(r.measured, o.precision) << num(r.bound_or_target, o.precision)
        << " +- " << num(r.tolerance, 3) << '\n';
  }
  if (!o.out.empty()) write_file(o.out, lines);
  return all ? Exit::ok : Exit::verify_failed;
}

// sweep ------------------------------------------------------------------

struct SweepRow {
  double param = 0.0;
  double value = 0.0;
  Json detail;
};

int sweep(Options& o, std::ostream& out) {
  if (o.config_json.is_null()) throw BadConfig("sweep needs --config");
  const Json& j = o.config_json;
  const std::string kind = j.value("kind", "ball");
  const std::string param = j.value("param", "R");
  if (!j.contains("values") || !j["values"].is_array()) throw BadConfig("sweep needs values");
  const auto values = j["values"].get<std::vector<double>>();
  static const std::map<std::string, std::vector<std::string>> allowed = {
      {"ball", {"R", "q", "k"}},        {"interval", {"L", "q", "k"}},
      {"grid", {"h", "q", "R"}},        {"dumbbell", {"eps", "h", "q"}}};
  auto it = allowed.find(kind);
  if (it == allowed.end()) throw BadConfig("unknown sweep kind " + kind);
  if (std::find(it->second.begin(), it->second.end(), param) == it->second.end()) {
    throw BadConfig("cannot sweep " + param + " for " + kind);
  }
  const Options base = o;
  auto task = [&](std::size_t i) -> SweepRow {
    Options t = base;
    const double v = values[i];
    if (param == "R") t.R = v;
    if (param == "L") t.L = v;
    if (param == "q") t.q = v;
    if (param == "k") t.k = static_cast<int>(v);
    if (param == "h") t.h = v;
    if (param == "eps") t.eps = v;
    SweepRow row;
    row.param = v;
    if (kind == "ball") {
      row.value = ball_eigenvalue(ProblemParams(t.N == 0 ? 2 : t.N, require_q(t), true), t.R, t.k).lambda;
    } else if (kind == "interval") {
      row.value = interval_eigenvalue(ProblemParams(1, require_q(t), true), t.L, t.k).lambda;
    } else if (kind == "grid") {
      const GridField g = rasterize(config_domain(t), std::isnan(t.h) ? 1.0 / 64 : t.h);
      row.value = minimize_rayleigh(ProblemParams(g.dim, require_q(t), true), g, rayleigh_options(t)).lambda;
    } else {
      const DumbbellReport r = run_dumbbell(t, std::isnan(t.eps) ? 0.0625 : t.eps);
      row.value = r.ratio;
      row.detail = dumbbell_json(r, t.precision);
    }
    return row;
  };
  const auto rows = parallel_map<SweepRow>(values.size(), task);

  const std::string ylabel = kind == "dumbbell" ? "ratio" : "lambda";
  std::ostringstream csv;
  csv << param << ',' << ylabel << '\n';
  Json js;
  js["kind"] = kind;
  js["param"] = param;
  js["rows"] = Json::array();
  std::vector<double> xs, ys;
  out << std::left << std::setw(22) << param << ylabel << '\n';
  for (const auto& r : rows) {
    csv << num(r.param, o.precision) << ',' << num(r.value, o.precision) << '\n';
    Json row;
    row[param] = rounded(r.param, o.precision);
    row[ylabel] = rounded(r.value, o.precision);
    if (!r.detail.is_null()) row["report"] = r.detail;
    js["rows"].push_back(row);
    xs.push_back(r.param);
    ys.push_back(r.value);
    table_row(out, num(r.param, o.precision), num(r.value, o.precision));
  }
  emit(o, csv.str(), js);
  emit_plot(o, sweep_svg(xs, ys, param, ylabel, kind + " sweep"));
  return Exit::ok;
}

// repro ------------------------------------------------------------------

int repro_two_balls(Options& o, std::ostream& out) {
  const ProblemParams params(o.N == 0 ? 2 : o.N, std::isnan(o.q) ? 1.5 : o.q);
  const int n_max = o.k > 1 ? o.k : 50;
  const double lambda1 = ball_eigenvalue(params, o.R, 1).lambda;
  const TwoBallFamily fam = two_ball_family(params, o.R, n_max, 0.25 * lambda1, 10);
  bool monotone = true;
  for (std::size_t n = 1; n < fam.lambda_n1.size(); ++n) {
    if (params.sub_homogeneous() ? !(fam.lambda_n1[n] > fam.lambda_n1[n - 1])
                                 : !(fam.lambda_n1[n] < fam.lambda_n1[n - 1])) {
      monotone = false;
    }
  }
  table_row(out, "lambda_1(B_R)", num(lambda1, o.precision));
  table_row(out, "Lambda_{n_max,1}", num(fam.lambda_n1.back(), o.precision));
  table_row(out, "monotone", monotone ? "yes" : "no");
  table_row(out, "spectrum_samples", std::to_string(fam.spectrum.samples.size()));
  for (const auto& cl : fam.clusters) {
    table_row(out, "accumulation", num(cl.point, o.precision) + (cl.from_above ? " from above" : " from below") +
                                       " (" + std::to_string(cl.witnesses.size()) + " witnesses)");
  }
  out << "note: experimental evidence only\n";

  Json js;
  js["experiment"] = "example-3.4";
  js["q"] = rounded(params.q(), o.precision);
  js["N"] = params.N();
  js["R"] = rounded(o.R, o.precision);
  js["n_max"] = n_max;
  Json radial = Json::array(), seq = Json::array();
  for (double v : fam.radial) radial.push_back(rounded(v, o.precision));
  for (double v : fam.lambda_n1) seq.push_back(rounded(v, o.precision));
  js["radial_family"] = radial;
  js["Lambda_n1"] = seq;
  js["monotone"] = monotone;
  js["spectrum_samples"] = fam.spectrum.samples.size();
  js["truncated"] = fam.spectrum.truncated;
  js["clusters"] = clusters_json(fam.clusters, o.precision);
  js["note"] = "experimental evidence only";
  std::ostringstream csv;
  csv << "n,lambda_n,Lambda_n1\n";
  for (std::size_t n = 0; n < fam.radial.size(); ++n) {
    csv << n + 1 << ',' << num(fam.radial[n], o.precision) << ',' << num(fam.lambda_n1[n], o.precision)
        << '\n';
  }
  emit(o, csv.str(), js);
  std::vector<double> values, points;
  for (const auto& s : fam.spectrum.samples) values.push_back(s.value);
  for (const auto& cl : fam.clusters) points.push_back(cl.point);
  emit_plot(o, spectrum_svg(values, points, "two balls, q=" + num(params.q(), 6)));
  return Exit::ok;
}

int repro_geometric(Options& o, std::ostream& out) {
  const ProblemParams params(o.N == 0 ? 2 : o.N, std::isnan(o.q) ? 1.5 : o.q);
  const int K = o.k > 1 ? o.k : 50;
  const GeometricRadii rule{1.0, 0.5};
  const double unit = ball_eigenvalue(params, 1.0, 1).lambda;
  const TailSequence tail = geometric_union_tail(rule, unit, params, K);
  std::vector<double> sorted = tail.values;
  std::sort(sorted.begin(), sorted.end());
  const auto clusters = accumulation_points(sorted, 0.01 * tail.limit, 3);

  table_row(out, "lambda_1(B_1)", num(unit, o.precision));
  table_row(out, "limit", num(tail.limit, o.precision));
  table_row(out, "strictly_decreasing", tail.strictly_decreasing ? "yes" : "no");
  table_row(out, "above_limit", tail.above_limit ? "yes" : "no");
  for (const auto& cl : clusters) {
    table_row(out, "accumulation", num(cl.point, o.precision) + (cl.from_above ? " from above" : " from below") +
                                       " (" + std::to_string(cl.witnesses.size()) + " distinct witnesses)");
  }
  Json js;
  js["experiment"] = "example-3.5";
  js["q"] = rounded(params.q(), o.precision);
  js["N"] = params.N();
  js["r0"] = rule.r0;
  js["gamma"] = rule.gamma;
  js["lambda1_unit"] = rounded(unit, o.precision);
  js["limit"] = rounded(tail.limit, o.precision);
  js["strictly_decreasing"] = tail.strictly_decreasing;
  js["above_limit"] = tail.above_limit;
  Json vals = Json::array(), exc = Json::array();
  for (double v : tail.values) vals.push_back(rounded(v, o.precision));
  for (double v : tail.excess) exc.push_back(rounded(v, o.precision));
  js["Lambda_k"] = vals;
  js["excess"] = exc;
  js["clusters"] = clusters_json(clusters, o.precision);
  std::ostringstream csv;
  csv << "k,Lambda_k,excess\n";
  for (std::size_t k = 0; k < tail.values.size(); ++k) {
    csv << k + 1 << ',' << num(tail.values[k], o.precision) << ',' << num(tail.excess[k], o.precision)
        << '\n';
  }
  emit(o, csv.str(), js);
  std::vector<double> points;
  for (const auto& cl : clusters) points.push_back(cl.point);
  emit_plot(o, spectrum_svg(tail.values, points, "partial unions of balls 2^-i, q=" + num(params.q(), 6)));
  return Exit::ok;
}

int repro_dumbbell(Options& o, std::ostream& out) {
  std::vector<double> eps_list = {0.25, 0.125, 0.0625};
  if (!std::isnan(o.eps)) eps_list = {o.eps};
  const auto rows = parallel_map<DumbbellReport>(
      eps_list.size(), [&](std::size_t i) { return run_dumbbell(o, eps_list[i]); });
  Json js;
  js["experiment"] = "example-4.4";
  js["reports"] = Json::array();
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    print_dumbbell(out, r, o.precision);
    js["reports"].push_back(dumbbell_json(r, o.precision));
    xs.push_back(r.epsilon);
    ys.push_back(r.ratio);
  }
  if (rows.size() == 1) js["ratio"] = rounded(rows.front().ratio, o.precision);
  emit(o, dumbbell_csv(rows, o.precision), js);
  emit_plot(o, sweep_svg(xs, ys, "epsilon", "lambda1_sym / lambda1", "dumbbell symmetry breaking"));
  return Exit::ok;
}

int repro(Options& o, std::ostream& out) {
  if (o.experiment == "example-3.4") return repro_two_balls(o, out);
  if (o.experiment == "example-3.5") return repro_geometric(o, out);
  return repro_dumbbell(o, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"q-eigenvalues of the Dirichlet Laplacian: solve, compose, verify", "qspec"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.footer("Environment: QSPEC_THREADS caps the worker pool of sweep and repro.\n"
             "Exit codes: 0 ok, 1 verification failed, 2 bad configuration, 3 solver error.");

  std::map<CLI::App*, std::map<std::string, CLI::Option*>> flags;
  auto common = [&](CLI::App* sub) {
    auto& f = flags[sub];
    f["--q"] = sub->add_option("--q", o.q, "exponent q");
    f["--N"] = sub->add_option("--N", o.N, "dimension N");
    f["--R"] = sub->add_option("--R", o.R, "ball radius")->capture_default_str();
    f["--L"] = sub->add_option("--L", o.L, "interval length")->capture_default_str();
    f["--k"] = sub->add_option("--k", o.k, "mode index or truncation")->capture_default_str();
    f["--eps"] = sub->add_option("--eps", o.eps, "dumbbell neck parameter");
    f["--h"] = sub->add_option("--h", o.h, "mesh width");
    f["--tol"] = sub->add_option("--tol", o.tol, "relative tolerance of iterations")->capture_default_str();
    f["--max-iter"] = sub->add_option("--max-iter", o.max_iter, "iteration cap")->capture_default_str();
    f["--seed"] = sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
    f["--config"] = sub->add_option("--config", o.config, "JSON configuration file");
    f["--out"] = sub->add_option("--out", o.out, "write results to this file");
    f["--plot"] = sub->add_option("--plot", o.plot, "write an SVG plot to this file");
    f["--format"] = sub->add_option("--format", o.format, "output file format")
                        ->check(CLI::IsMember({"csv", "json"}))
                        ->capture_default_str();
    f["--precision"] = sub->add_option("--precision", o.precision, "printed significant digits")
                           ->check(CLI::Range(1, 17))
                           ->capture_default_str();
  };

  std::map<std::string, std::function<int(Options&, std::ostream&)>> handlers = {
      {"solve-ball", solve_ball}, {"solve-interval", solve_interval}, {"solve-grid", solve_grid},
      {"compose", compose},       {"dumbbell", dumbbell},             {"verify", verify},
      {"sweep", sweep},           {"repro", repro}};
  const std::map<std::string, std::string> help = {
      {"solve-ball", "k-th radial eigenvalue of the ball B_R"},
      {"solve-interval", "k-th eigenvalue of the interval (0, L)"},
      {"solve-grid", "first eigenvalue on a rasterized domain (domain from --config)"},
      {"compose", "spectrum of a disjoint union from component spectra"},
      {"dumbbell", "symmetric versus free first eigenvalue on the dumbbell"},
      {"verify", "run the verification battery"},
      {"sweep", "sweep one parameter (kind, param, values from --config)"},
      {"repro", "canned reproductions: example-3.4, example-3.5, example-4.4"}};
  for (const auto& [name, text] : help) {
    CLI::App* sub = app.add_subcommand(name, text);
    sub->set_help_flag("--help", "Print this help message and exit");
    common(sub);
    if (name == "solve-grid") {
      sub->add_option("--symmetric", o.symmetric, "restrict to functions even in x1 or x2")
          ->check(CLI::IsMember({"x1", "x2"}));
    }
    if (name == "repro") {
      sub->add_option("experiment", o.experiment, "experiment name")
          ->required()
          ->check(CLI::IsMember({"example-3.4", "example-3.5", "example-4.4"}));
    }
  }

  std::vector<const char*> argv{"qspec"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Exit::ok : Exit::bad_config;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    apply_config(o, flags[sub]);
    return handlers.at(sub->get_name())(o, out);
  } catch (const BadConfig& e) {
    err << "qspec: " << e.what() << '\n';
    return Exit::bad_config;
  } catch (const Error& e) {
    err << "qspec: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "qspec: " << e.what() << '\n';
    return Exit::solver_failed;
  }
}

}  // namespace qspec::cli
