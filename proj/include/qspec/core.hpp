#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qspec/error.hpp"
#include "qspec/fields.hpp"

namespace qspec {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Critical Sobolev exponent 2N/(N-2), or +inf for N <= 2.
double critical_exponent(int N);

/// Lebesgue measure of the unit ball in R^N.
double unit_ball_measure(int N);

/// Dimension N and exponent q of the problem, validated on construction.
///
/// q = 2 is rejected unless `allow_linear` is set; operations whose
/// exponents degenerate at q = 2 reject it again on their own.
class ProblemParams {
 public:
  ProblemParams(int N, double q, bool allow_linear = false);

  int N() const noexcept { return N_; }
  double q() const noexcept { return q_; }
  double two_star() const noexcept { return two_star_; }
  bool linear() const noexcept { return q_ == 2.0; }
  bool sub_homogeneous() const noexcept { return q_ < 2.0; }
  bool allows_linear() const noexcept { return allow_linear_; }

  /// Exponent N - 2 - 2N/q of the scaling law.
  double scaling_exponent() const noexcept;

  /// Throws `ErrorCode::regime` when q == 2.
  void require_nonlinear(const char* operation) const;

 private:
  int N_;
  double q_;
  double two_star_;
  bool allow_linear_;
};

/// Eigenvalue of t*Omega given an eigenvalue of Omega.
double scale_eigenvalue(double lambda, double t, const ProblemParams& params);

struct GeometricRadii {
  double r0 = 1.0;
  double gamma = 0.5;
};

/// r_i = r0 (i+1)^{-decay}, i >= 0.
struct PowerRadii {
  double r0 = 1.0;
  double decay = 1.0;
};

enum class Admissibility { admissible, inadmissible, undecided };

struct AdmissibilityReport {
  Admissibility status = Admissibility::undecided;
  double exponent = 0.0;  ///< N + 2q/(2-q)
  double partial_sum = 0.0;
  double series_value = kInf;  ///< closed form when available
};

/// Summability of r_i^{N+2q/(2-q)} for a geometric radius rule.
AdmissibilityReport check_ball_union_admissible(const GeometricRadii& rule,
                                                const ProblemParams& params,
                                                int truncation);

AdmissibilityReport check_ball_union_admissible(const PowerRadii& rule,
                                                const ProblemParams& params,
                                                int truncation);

/// Same check for an explicit list of radii. A finite union is always
/// admissible; `envelope` is accepted for symmetry with the infinite case
/// and bounds the tail of a list that stands for a longer sequence.
AdmissibilityReport check_ball_union_admissible(
    const std::vector<double>& radii, const ProblemParams& params,
    std::optional<GeometricRadii> envelope = std::nullopt,
    bool finite_union = true);

struct FreeFunctionalPoint {
  double amplitude_factor = 1.0;
  double critical_value = 0.0;
};

/// Maps a q-eigenvalue to the scaling factor and critical value of the
/// free functional 1/2 |grad u|^2 - 1/q |u|^q.
FreeFunctionalPoint free_functional_correspondence(double lambda,
                                                   const ProblemParams& params);

/// Inverse of `free_functional_correspondence`: recovers lambda from the
/// critical value.
double eigenvalue_from_critical_value(double critical_value,
                                      const ProblemParams& params);

// Domains ------------------------------------------------------------------

struct Interval {
  double length = 1.0;
};
struct Ball {
  double radius = 1.0;
};
struct Rectangle {
  double a = 1.0;
  double b = 1.0;
};
/// Raster of lattice nodes; row 0 is the bottom row, node (i, j) sits at
/// origin + (i h, j h).
struct RasterMask {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<std::uint8_t> cells;
};

struct DomainSpec;

struct DisjointUnion {
  std::vector<DomainSpec> components;
  /// Translation of each component; defaults to a row along x1.
  std::vector<std::pair<double, double>> centers;
  double separation = 0.25;

  std::vector<std::pair<double, double>> layout() const;
};

/// Tagged domain description. Geometries are centred at the origin.
struct DomainSpec {
  std::variant<Interval, Ball, Rectangle, RasterMask, DisjointUnion> shape;

  static DomainSpec interval(double length);
  static DomainSpec ball(double radius);
  static DomainSpec rectangle(double a, double b);
  static DomainSpec mask(RasterMask mask);
  static DomainSpec disjoint_union(std::vector<DomainSpec> parts,
                                   double separation = 0.25);

  std::string type_name() const;
  /// Half-widths of the bounding box around the component's own center.
  std::pair<double, double> half_extent() const;
  void validate() const;
};

/// Parses the JSON domain schema. Mask paths are resolved against `base`.
DomainSpec parse_domain(const std::string& json_text,
                        const std::filesystem::path& base = {});
std::string domain_to_json(const DomainSpec& domain);

/// Reads a text raster: one line per row, top row first, '1' or '#' marks
/// an interior node.
RasterMask read_mask_file(const std::filesystem::path& path, double h);

// Eigenpairs ---------------------------------------------------------------

enum class SignClass { positive, sign_changing };

struct QEigenpair {
  double lambda = 0.0;
  std::variant<RadialProfile, GridField> eigenfunction;
  double lq_norm = 1.0;
  SignClass sign_class = SignClass::positive;
  /// Estimated relative error of lambda from the iteration alone.
  double solver_error = 0.0;
  int iterations = 0;
  std::string provenance;

  const RadialProfile* radial() const {
    return std::get_if<RadialProfile>(&eigenfunction);
  }
  const GridField* grid() const { return std::get_if<GridField>(&eigenfunction); }
};

std::string_view to_string(SignClass s) noexcept;

}  // namespace qspec
