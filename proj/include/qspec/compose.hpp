#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qspec/core.hpp"

namespace qspec {

struct SpinVector {
  std::vector<std::uint8_t> delta;

  std::size_t active() const noexcept;
  std::string str() const;  ///< e.g. "101"
};

/// One choice of eigenvalue per component; level -1 means the spin is off.
struct Selection {
  std::vector<int> levels;

  SpinVector spins() const;
};

struct SpectrumSample {
  double value = 0.0;
  SpinVector spins;
  std::vector<std::pair<int, double>> component_eigenvalues;  ///< active only
  std::vector<double> alpha;  ///< per component, 0 when inactive
  /// Every selection producing exactly this value; the first one is the
  /// selection that `spins` and `component_eigenvalues` describe.
  std::vector<Selection> witnesses;

  std::size_t multiplicity() const noexcept { return witnesses.size(); }
};

/// Lambda = [sum over active i of lambda_i^{-q/(2-q)}]^{(q-2)/q}; inactive
/// components are left out of the sum. The result does not depend on the
/// order of the components.
SpectrumSample spin_eigenvalue(const std::vector<double>& lambdas,
                               const SpinVector& spins, const ProblemParams& params);

/// First eigenvalue of a union from the first eigenvalues of its parts.
double union_first_eigenvalue(const std::vector<double>& component_lambda1s,
                              const ProblemParams& params);

/// Same for balls of radii r0 gamma^i (i >= 0), given lambda_1 of the unit
/// ball. Sums the series in closed form.
double union_first_eigenvalue(const GeometricRadii& rule, double lambda1_unit,
                              const ProblemParams& params);

struct EnumerationOptions {
  std::optional<double> ceiling;     ///< default 10 x first eigenvalue of the union
  std::optional<std::size_t> count;  ///< keep only the smallest `count` values
  std::size_t hard_cap = 1000000;
};

struct Enumeration {
  std::vector<SpectrumSample> samples;  ///< ascending
  double ceiling = 0.0;
  bool truncated = false;
  std::size_t selections_visited = 0;
  std::string completeness;  ///< why the list is complete below the ceiling
};

/// All values generated by the spin formula from the component lists that
/// do not exceed the ceiling.
Enumeration enumerate_spectrum(const std::vector<std::vector<double>>& component_spectra,
                               const ProblemParams& params,
                               const EnumerationOptions& opts = {});

struct Cluster {
  double point = 0.0;
  bool from_above = true;
  std::vector<std::size_t> witnesses;  ///< indices into the input, nearest first
  std::vector<SpinVector> witness_spins;  ///< filled by the sample overload
};

/// Points approached by at least `min_cluster` distinct values within `tol`
/// whose spacing shrinks strictly towards the point. Values closer than a
/// few ulps are treated as one.
std::vector<Cluster> accumulation_points(const std::vector<double>& sorted_values,
                                         double tol, std::size_t min_cluster);

std::vector<Cluster> accumulation_points(const std::vector<SpectrumSample>& samples,
                                         double tol, std::size_t min_cluster);

struct TailSequence {
  std::vector<double> values;  ///< Lambda_k, k = 1..K, by the spin formula
  /// Lambda_k / limit - 1 from the closed-form tail, resolved below the
  /// double spacing of the values themselves.
  std::vector<double> excess;
  double limit = 0.0;
  bool strictly_decreasing = false;
  bool above_limit = false;
};

/// Partial unions of balls of radii r0 gamma^i, all spins on (1 < q < 2).
TailSequence geometric_union_tail(const GeometricRadii& rule, double lambda1_unit,
                                  const ProblemParams& params, int K);

struct TwoBallFamily {
  std::vector<double> radial;           ///< lambda_n(B_R), n = 1..n_max
  std::vector<double> lambda_n1;        ///< Lambda_{n,1}, n = 1..n_max
  Enumeration spectrum;
  std::vector<Cluster> clusters;
};

/// Two disjoint balls of radius R with their radial families up to n_max.
TwoBallFamily two_ball_family(const ProblemParams& params, double R, int n_max,
                              double cluster_tol, std::size_t min_cluster);

}  // namespace qspec
