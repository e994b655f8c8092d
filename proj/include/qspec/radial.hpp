#pragma once

#include <cstddef>

#include "qspec/core.hpp"

namespace qspec {

struct RadialTolerances {
  double rel = 1e-10;
  double abs = 1e-12;
  double zero = 1e-12;      ///< bisection width for sign changes
  double residual = 1e-6;   ///< bound on the scaled ODE residual at samples
  std::size_t samples = 4097;
  double radius_cap = 1e5;  ///< largest window searched for zeros
};

/// Integrates -(r^{N-1} u')' = r^{N-1} |u|^{q-2} u with u(0) = amplitude,
/// u'(0) = 0 on [0, rho_max] and returns uniform samples plus all sign
/// changes. `lq_mass` and `dirichlet_energy` integrate with the ball weight
/// N omega_N r^{N-1}.
RadialProfile shoot_free(const ProblemParams& params, double amplitude,
                         double rho_max, const RadialTolerances& tol = {});

/// Radius of the k-th zero of the shot profile.
double kth_zero_radius(const ProblemParams& params, double amplitude, int k,
                       const RadialTolerances& tol = {});

/// k-th member of the radial family on B_R, normalized to unit L^q norm.
/// k = 1 is the first eigenvalue; k >= 2 are radial nodal eigenvalues.
QEigenpair ball_eigenvalue(const ProblemParams& params, double R, int k,
                           const RadialTolerances& tol = {});

/// k-th eigenvalue of (0, L) (N = 1), built from k half-waves of the shot
/// profile.
QEigenpair interval_eigenvalue(const ProblemParams& params, double L, int k,
                               const RadialTolerances& tol = {});

/// C_{q,N} of the Rellich-Pohozaev identity, q / (2N - q(N-2)).
double pohozaev_constant(const ProblemParams& params);

struct BallConstants {
  double omega_N = 0.0;
  double C_qN = 0.0;
  double script_C = 0.0;  ///< |u'(R)| forced by the Pohozaev identity
};

BallConstants ball_constants(const ProblemParams& params, double lambda1,
                             double R);

/// |u'(R)| versus the boundary slope predicted from lambda; relative error.
double boundary_slope_check(const QEigenpair& pair, const BallConstants& constants);

}  // namespace qspec
