#include "qspec/core.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace qspec {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::regime: return "regime-error";
    case ErrorCode::invalid_spin: return "invalid-spin";
    case ErrorCode::inadmissible: return "inadmissible-error";
    case ErrorCode::stiffness: return "stiffness-error";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::empty_domain: return "empty-domain";
    case ErrorCode::symmetry: return "symmetry-error";
    case ErrorCode::convergence: return "convergence-error";
    case ErrorCode::solver: return "solver-error";
    case ErrorCode::unsupported_domain: return "unsupported-domain";
    case ErrorCode::io: return "io-error";
  }
  return "unknown";
}

std::string_view to_string(SignClass s) noexcept {
  return s == SignClass::positive ? "positive" : "sign_changing";
}

std::size_t GridField::interior_count() const noexcept {
  std::size_t n = 0;
  for (auto m : mask) n += m != 0;
  return n;
}

double GridField::cell_measure() const noexcept {
  return dim == 1 ? h : h * h;
}

double critical_exponent(int N) {
  if (N <= 0) {
    throw Error(ErrorCode::invalid_dimension,
                "dimension must be >= 1, got " + std::to_string(N));
  }
  if (N <= 2) return kInf;
  return 2.0 * N / (N - 2.0);
}

double unit_ball_measure(int N) {
  if (N <= 0) throw Error(ErrorCode::invalid_dimension, "dimension must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
}

ProblemParams::ProblemParams(int N, double q, bool allow_linear)
    : N_(N), q_(q), two_star_(critical_exponent(N)), allow_linear_(allow_linear) {
  if (!std::isfinite(q) || q <= 1.0) {
    throw Error(ErrorCode::invalid_input, "exponent q must satisfy q > 1");
  }
  if (q >= two_star_) {
    throw Error(ErrorCode::invalid_input,
                "exponent q must be below the critical exponent 2N/(N-2)");
  }
  if (q == 2.0 && !allow_linear) {
    throw Error(ErrorCode::regime,
                "q = 2 is only accepted in linear sanity-check mode");
  }
}

double ProblemParams::scaling_exponent() const noexcept {
  return N_ - 2.0 - 2.0 * N_ / q_;
}

void ProblemParams::require_nonlinear(const char* operation) const {
  if (q_ == 2.0) {
    throw Error(ErrorCode::regime,
                std::string(operation) + " is undefined for q = 2");
  }
}

double scale_eigenvalue(double lambda, double t, const ProblemParams& params) {
  if (!(lambda > 0.0) || !(t > 0.0)) {
    throw Error(ErrorCode::invalid_input, "scale_eigenvalue needs lambda > 0, t > 0");
  }
  if (t == 1.0) return lambda;
  return std::pow(t, params.scaling_exponent()) * lambda;
}

namespace {

double admissibility_exponent(const ProblemParams& params) {
  if (params.q() >= 2.0) {
    throw Error(ErrorCode::regime,
                "the radii summability test is stated for 1 < q < 2");
  }
  const double q = params.q();
  return params.N() + 2.0 * q / (2.0 - q);
}

}  // namespace

AdmissibilityReport check_ball_union_admissible(const GeometricRadii& rule,
                                                const ProblemParams& params,
                                                int truncation) {
  AdmissibilityReport rep;
  rep.exponent = admissibility_exponent(params);
  if (!(rule.r0 > 0.0) || !(rule.gamma > 0.0)) {
    throw Error(ErrorCode::invalid_input, "radii must be strictly positive");
  }
  const double ratio = std::pow(rule.gamma, rep.exponent);
  double term = std::pow(rule.r0, rep.exponent);
  for (int i = 0; i < truncation; ++i) {
    rep.partial_sum += term;
    term *= ratio;
  }
  if (rule.gamma >= 1.0) {
    rep.status = Admissibility::inadmissible;
    rep.series_value = kInf;
  } else {
    rep.status = Admissibility::admissible;
    rep.series_value = std::pow(rule.r0, rep.exponent) / (1.0 - ratio);
  }
  return rep;
}

AdmissibilityReport check_ball_union_admissible(const PowerRadii& rule,
                                                const ProblemParams& params,
                                                int truncation) {
  AdmissibilityReport rep;
  rep.exponent = admissibility_exponent(params);
  if (!(rule.r0 > 0.0) || !(rule.decay > 0.0)) {
    throw Error(ErrorCode::invalid_input, "radii must be strictly positive");
  }
  const double s = rule.decay * rep.exponent;
  const double scale = std::pow(rule.r0, rep.exponent);
  for (int i = 0; i < truncation; ++i) {
    rep.partial_sum += scale * std::pow(i + 1.0, -s);
  }
  if (s <= 1.0) {
    rep.status = Admissibility::inadmissible;
  } else {
    rep.status = Admissibility::admissible;
    rep.series_value = scale * std::riemann_zeta(s);
  }
  return rep;
}

AdmissibilityReport check_ball_union_admissible(
    const std::vector<double>& radii, const ProblemParams& params,
    std::optional<GeometricRadii> envelope, bool finite_union) {
  AdmissibilityReport rep;
  rep.exponent = admissibility_exponent(params);
  for (double r : radii) {
    if (!(r > 0.0)) throw Error(ErrorCode::invalid_input, "radii must be positive");
    rep.partial_sum += std::pow(r, rep.exponent);
  }
  if (finite_union) {
    rep.status = Admissibility::admissible;
    rep.series_value = rep.partial_sum;
    return rep;
  }
  rep.status = Admissibility::undecided;
  if (envelope && envelope->gamma < 1.0) {
    bool dominated = true;
    double bound = envelope->r0;
    for (double r : radii) {
      if (r > bound * (1.0 + 1e-15)) dominated = false;
      bound *= envelope->gamma;
    }
    if (dominated) {
      rep.status = Admissibility::admissible;
      rep.series_value = check_ball_union_admissible(*envelope, params, 0).series_value;
    }
  }
  return rep;
}

FreeFunctionalPoint free_functional_correspondence(double lambda,
                                                   const ProblemParams& params) {
  params.require_nonlinear("free functional correspondence");
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_input, "lambda must be positive");
  const double q = params.q();
  return {std::pow(lambda, 1.0 / (q - 2.0)),
          (0.5 - 1.0 / q) * std::pow(lambda, q / (q - 2.0))};
}

double eigenvalue_from_critical_value(double critical_value,
                                      const ProblemParams& params) {
  params.require_nonlinear("free functional correspondence");
  const double q = params.q();
  const double base = critical_value / (0.5 - 1.0 / q);
  if (!(base > 0.0)) throw Error(ErrorCode::invalid_input, "critical value has wrong sign");
  return std::pow(base, (q - 2.0) / q);
}

// Domains ------------------------------------------------------------------

DomainSpec DomainSpec::interval(double length) { return {Interval{length}}; }
DomainSpec DomainSpec::ball(double radius) { return {Ball{radius}}; }
DomainSpec DomainSpec::rectangle(double a, double b) { return {Rectangle{a, b}}; }
DomainSpec DomainSpec::mask(RasterMask m) { return {std::move(m)}; }
DomainSpec DomainSpec::disjoint_union(std::vector<DomainSpec> parts,
                                      double separation) {
  DisjointUnion u;
  u.components = std::move(parts);
  u.separation = separation;
  return {std::move(u)};
}

std::string DomainSpec::type_name() const {
  struct V {
    std::string operator()(const Interval&) const { return "interval"; }
    std::string operator()(const Ball&) const { return "ball"; }
    std::string operator()(const Rectangle&) const { return "rectangle"; }
    std::string operator()(const RasterMask&) const { return "mask"; }
    std::string operator()(const DisjointUnion&) const { return "union"; }
  };
  return std::visit(V{}, shape);
}

std::pair<double, double> DomainSpec::half_extent() const {
  struct V {
    std::pair<double, double> operator()(const Interval& s) const {
      return {0.5 * s.length, 0.0};
    }
    std::pair<double, double> operator()(const Ball& s) const {
      return {s.radius, s.radius};
    }
    std::pair<double, double> operator()(const Rectangle& s) const {
      return {0.5 * s.a, 0.5 * s.b};
    }
    std::pair<double, double> operator()(const RasterMask& s) const {
      return {0.5 * (s.nx - 1) * s.h, 0.5 * (s.ny - 1) * s.h};
    }
    std::pair<double, double> operator()(const DisjointUnion& s) const {
      const auto centers = s.layout();
      double hx = 0.0, hy = 0.0;
      for (std::size_t i = 0; i < s.components.size(); ++i) {
        const auto [ex, ey] = s.components[i].half_extent();
        hx = std::max(hx, std::abs(centers[i].first) + ex);
        hy = std::max(hy, std::abs(centers[i].second) + ey);
      }
      return {hx, hy};
    }
  };
  return std::visit(V{}, shape);
}

std::vector<std::pair<double, double>> DisjointUnion::layout() const {
  if (!centers.empty()) return centers;
  std::vector<std::pair<double, double>> out;
  double cursor = 0.0;
  for (const auto& c : components) {
    const double hw = c.half_extent().first;
    out.emplace_back(cursor + hw, 0.0);
    cursor += 2.0 * hw + separation;
  }
  const double total = cursor - separation;
  for (auto& p : out) p.first -= 0.5 * total;
  return out;
}

void DomainSpec::validate() const {
  struct V {
    void operator()(const Interval& s) const {
      if (!(s.length > 0.0)) throw Error(ErrorCode::invalid_input, "interval length must be positive");
    }
    void operator()(const Ball& s) const {
      if (!(s.radius > 0.0)) throw Error(ErrorCode::invalid_input, "ball radius must be positive");
    }
    void operator()(const Rectangle& s) const {
      if (!(s.a > 0.0) || !(s.b > 0.0)) {
        throw Error(ErrorCode::invalid_input, "rectangle sides must be positive");
      }
    }
    void operator()(const RasterMask& s) const {
      if (!(s.h > 0.0) || s.nx <= 0 || s.ny <= 0 ||
          s.cells.size() != static_cast<std::size_t>(s.nx) * s.ny) {
        throw Error(ErrorCode::invalid_input, "malformed raster mask");
      }
    }
    void operator()(const DisjointUnion& s) const {
      if (s.components.empty()) throw Error(ErrorCode::invalid_input, "empty union");
      if (!(s.separation > 0.0)) {
        throw Error(ErrorCode::invalid_input, "union separation must be positive");
      }
      if (!s.centers.empty() && s.centers.size() != s.components.size()) {
        throw Error(ErrorCode::invalid_input, "one center per union component required");
      }
      for (const auto& c : s.components) c.validate();
    }
  };
  std::visit(V{}, shape);
}

RasterMask read_mask_file(const std::filesystem::path& path, double h) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open mask file " + path.string());
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) throw Error(ErrorCode::invalid_input, "empty mask file");
  RasterMask m;
  m.h = h;
  m.ny = static_cast<int>(rows.size());
  m.nx = 0;
  for (const auto& r : rows) m.nx = std::max(m.nx, static_cast<int>(r.size()));
  m.cells.assign(static_cast<std::size_t>(m.nx) * m.ny, 0);
  for (int j = 0; j < m.ny; ++j) {
    const auto& r = rows[m.ny - 1 - j];
    for (int i = 0; i < static_cast<int>(r.size()); ++i) {
      m.cells[static_cast<std::size_t>(j) * m.nx + i] = (r[i] == '1' || r[i] == '#');
    }
  }
  m.origin_x = -0.5 * (m.nx - 1) * h;
  m.origin_y = -0.5 * (m.ny - 1) * h;
  return m;
}

namespace {

using nlohmann::json;

DomainSpec domain_from_json(const json& j, const std::filesystem::path& base) {
  const std::string type = j.at("type").get<std::string>();
  DomainSpec d;
  if (type == "ball") {
    d = DomainSpec::ball(j.at("radius").get<double>());
  } else if (type == "interval") {
    d = DomainSpec::interval(j.at("length").get<double>());
  } else if (type == "rectangle") {
    d = DomainSpec::rectangle(j.at("a").get<double>(), j.at("b").get<double>());
  } else if (type == "mask") {
    auto p = std::filesystem::path(j.at("path").get<std::string>());
    if (p.is_relative() && !base.empty()) p = base / p;
    d = DomainSpec::mask(read_mask_file(p, j.at("h").get<double>()));
  } else if (type == "union") {
    DisjointUnion u;
    for (const auto& c : j.at("components")) u.components.push_back(domain_from_json(c, base));
    if (j.contains("separation")) u.separation = j.at("separation").get<double>();
    if (j.contains("centers")) {
      for (const auto& c : j.at("centers")) {
        u.centers.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
      }
    }
    d = DomainSpec{std::move(u)};
  } else {
    throw Error(ErrorCode::invalid_input, "unknown domain type '" + type + "'");
  }
  d.validate();
  return d;
}

json domain_json(const DomainSpec& d) {
  struct V {
    json operator()(const Interval& s) const { return {{"type", "interval"}, {"length", s.length}}; }
    json operator()(const Ball& s) const { return {{"type", "ball"}, {"radius", s.radius}}; }
    json operator()(const Rectangle& s) const {
      return {{"type", "rectangle"}, {"a", s.a}, {"b", s.b}};
    }
    json operator()(const RasterMask& s) const {
      return {{"type", "mask"}, {"nx", s.nx}, {"ny", s.ny}, {"h", s.h}};
    }
    json operator()(const DisjointUnion& s) const {
      json comps = json::array();
      for (const auto& c : s.components) comps.push_back(domain_json(c));
      return {{"type", "union"}, {"components", comps}, {"separation", s.separation}};
    }
  };
  return std::visit(V{}, d.shape);
}

}  // namespace

DomainSpec parse_domain(const std::string& json_text,
                        const std::filesystem::path& base) {
  try {
    return domain_from_json(json::parse(json_text), base);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_input, std::string("domain JSON: ") + e.what());
  }
}

std::string domain_to_json(const DomainSpec& domain) {
  return domain_json(domain).dump();
}

}  // namespace qspec
