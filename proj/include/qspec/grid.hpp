#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qspec/core.hpp"

namespace qspec {

/// Lattice nodes of spacing h strictly inside `domain`. Intervals give a
/// one-dimensional grid. Throws `empty_domain` when no node is interior.
GridField rasterize(const DomainSpec& domain, double h);

/// Nodes of the lattice h Z^2 in [-half_x, half_x] x [-half_y, half_y] for
/// which `inside` holds.
GridField rasterize_predicate(const std::function<bool(double, double)>& inside,
                              double half_x, double half_y, double h);

/// The l1 ball {|x1| + |x2| < 1}.
GridField diamond_domain(double h);

/// Two l1 balls centred at (+-(1 - eps), 0), each cut at x1 = 0, glued
/// along the neck |x2| < eps.
GridField dumbbell_domain(double eps, double h);

/// Restriction of a mask symmetric under x1 -> -x1 to x1 >= 0 with the
/// reflection condition on x1 = 0.
GridField half_domain(const GridField& symmetric);

/// Number of 4-connected components of the mask.
int component_count(const GridField& grid);

struct RayleighOptions {
  double tol = 1e-10;       ///< relative change of the quotient
  double step_tol = 1e-8;   ///< relative sup-norm change of the iterate
  int max_iter = 100000;
  std::uint64_t seed = 0x5EED;
  /// Optional start values on the grid's bounding box (must be >= 0).
  std::optional<std::vector<double>> start;
};

/// Seeded positive start values, a function of lattice coordinates only.
std::vector<double> random_positive_start(const GridField& grid, std::uint64_t seed);

/// First q-eigenpair on the grid by normalized inverse iteration
/// -Delta_h v = u^{q-1}, u <- v / |v|_q.
QEigenpair minimize_rayleigh(const ProblemParams& params, const GridField& grid,
                             const RayleighOptions& opts = {});

enum class Reflection { x1, x2 };

/// Same iteration restricted to functions even under the reflection.
QEigenpair minimize_rayleigh_symmetric(const ProblemParams& params,
                                       const GridField& grid, Reflection axis,
                                       const RayleighOptions& opts = {});

/// Discrete Dirichlet integral of the field (edge differences).
double dirichlet_energy(const GridField& field);

/// Discrete integral of |u|^q.
double lq_mass(const GridField& field, double q);

/// Sup norm of -Delta_h u - lambda |u|^{q-2} u over interior nodes, scaled
/// by lambda |u|_inf^{q-1}.
double residual(const QEigenpair& pair, const ProblemParams& params);

struct LinearizedSpectrum {
  std::vector<double> mu;  ///< ascending
  int m = 0;
  std::string ground_state_sign;  ///< "constant" or "mixed"
  bool second_mode_changes_sign = false;
  std::vector<std::vector<double>> modes;  ///< on the grid's bounding box
  int iterations = 0;
};

struct SpectrumOptions {
  double tol = 1e-9;
  int max_iter = 5000;
  std::uint64_t seed = 0x5EED;
};

/// Smallest m eigenvalues of -Delta_h - (q-1) lambda_1 U^{q-2} for a first
/// positive unit-norm eigenpair, by shift-invert subspace iteration.
LinearizedSpectrum linearized_spectrum(const QEigenpair& pair,
                                       const ProblemParams& params, int m,
                                       const SpectrumOptions& opts = {});

/// (4 fine - coarse) / 3 for a second-order quantity at (h, h/2).
double richardson(double coarse, double fine);

struct DumbbellReport {
  double epsilon = 0.0;
  double h = 0.0;
  double q = 0.0;
  double lambda1 = 0.0;
  double lambda1_sym = 0.0;
  double mu_q_half = 0.0;
  double ratio = 0.0;         ///< lambda1_sym / lambda1
  double localization = 0.0;  ///< share of |u|_q^q in the heavier lobe
  double factor = 0.0;        ///< 2^{1-2/q}
  double identity_gap = 0.0;  ///< |lambda1_sym - factor mu| / lambda1_sym
  double solver_error = 0.0;  ///< combined iteration error of the two solves
  double lambda1_cube = 0.0;  ///< lambda_1(Q_1) on the same lattice
  double upper_bound = 0.0;   ///< (1-eps)^{N-2-2N/q} lambda_1(Q_1)
  double disc_error_lambda1 = -1.0;  ///< |lambda(h) - lambda(2h)| / 3
  double disc_error_sym = -1.0;
  double margin = 0.0;        ///< lambda1_sym - lambda1
};

struct DumbbellOptions {
  RayleighOptions rayleigh;
  bool estimate_discretization = true;
};

DumbbellReport dumbbell_experiment(double epsilon, const ProblemParams& params,
                                   double h, const DumbbellOptions& opts = {});

}  // namespace qspec
