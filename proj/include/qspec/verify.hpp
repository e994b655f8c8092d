#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qspec/core.hpp"

namespace qspec {

struct CheckReport {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double bound_or_target = 0.0;
  double tolerance = 0.0;
  std::string context;
  std::vector<CheckReport> parts;

  /// One JSON object on a single line.
  std::string to_json() const;
};

/// Rellich-Pohozaev identity lambda |u|_q^2 = C_{q,N} int |du/dnu|^2 <x, nu>.
/// Radial pairs need a Ball, grid pairs a Rectangle whose sides lie on the
/// lattice. `measured` is the relative mismatch.
CheckReport pohozaev_check(const QEigenpair& pair, const DomainSpec& domain,
                           const ProblemParams& params, double tolerance = 1e-4);

/// Spread max/min of |U|_inf / (sqrt(lambda)^{2*/(2*-q)} |U|_q) over a
/// radius sweep of first eigenpairs (N >= 3).
CheckReport linf_bound_ratio(const std::vector<QEigenpair>& pairs,
                             const ProblemParams& params, double spread_bound = 1.01);

enum class PiconeVariant { classical, generalized };

/// Slack per unit mesh width allowed for the discrete Picone inequalities.
/// Calibrated on 2 + sin / 1 + cos pairs at h = 1/32 ... 1/128, where the
/// largest violation was 2.6e-10 h (rounding only).
inline constexpr double kPiconeSlack = 1e-6;

/// Pointwise <grad psi, grad(phi^2/psi)> <= |grad phi|^2 (classical) or
/// <grad psi, grad(phi^q/psi^{q-1})> <= |grad phi|^q |grad psi|^{2-q}
/// (generalized, 1 < q < 2) with centred differences at nodes whose four
/// neighbours are in the mask. `measured` is the largest violation.
CheckReport picone_check(const GridField& psi, const GridField& phi,
                         PiconeVariant variant, const ProblemParams& params,
                         double slack_constant = kPiconeSlack);

/// Ordering against lambda_1, sign of first eigenfunctions, unit L^q norm
/// and int |grad u|^2 = lambda |u|_q^2, all with independent quadrature.
CheckReport eigenpair_sanity(const QEigenpair& pair, double lambda1_of_domain,
                             const ProblemParams& params, double tol = 1e-6);

/// Seeded trigonometric polynomial of the given degree on the grid's mask,
/// shifted so that its minimum over the mask equals `floor`.
GridField trig_polynomial_field(const GridField& grid, std::uint64_t seed, int degree,
                                double floor);

/// Simpson quadrature of the radial weight times f on a uniform profile.
double radial_integral(const RadialProfile& prof, const std::vector<double>& f);

}  // namespace qspec
