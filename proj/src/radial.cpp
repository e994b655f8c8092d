#include "qspec/radial.hpp"

#include <array>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace qspec {

namespace {

namespace odeint = boost::numeric::odeint;

// u, u', cumulative |u|^q mass, cumulative |u'|^2 energy, and the
// dissipation (N-1) int_0^r u'^2 / s ds of the energy identity.
using State = std::array<double, 5>;

double signed_power(double u, double q) {
  return std::copysign(std::pow(std::abs(u), q - 1.0), u);
}

struct LaneEmden {
  int N;
  double q;
  double weight_scale;  // N * omega_N

  void operator()(const State& x, State& dxdt, double r) const {
    const double u = x[0];
    const double p = x[1];
    const double w = weight_scale * (N == 1 ? 1.0 : std::pow(r, N - 1));
    dxdt[0] = p;
    dxdt[1] = -(N - 1) / r * p - signed_power(u, q);
    dxdt[2] = w * std::pow(std::abs(u), q);
    dxdt[3] = w * p * p;
    dxdt[4] = (N - 1) * p * p / r;
  }
};

struct ShootRequest {
  double amplitude = 1.0;
  double rho_max = 1.0;
  int stop_after_zeros = 0;  // 0: integrate the whole window
  bool sample = true;
};

RadialProfile integrate(const ProblemParams& params, const ShootRequest& req,
                        const RadialTolerances& tol) {
  const int N = params.N();
  const double q = params.q();
  const double a = req.amplitude;
  if (!(a > 0.0)) throw Error(ErrorCode::invalid_input, "amplitude must be positive");
  if (!(req.rho_max > 0.0)) throw Error(ErrorCode::invalid_input, "rho_max must be positive");

  const LaneEmden system{N, q, N * unit_ball_measure(N)};
  const double forcing = std::pow(a, q - 1.0);

  // Two-term Taylor start away from the coordinate singularity.
  const double rho0 = std::min(1e-6 * std::max(1.0, std::pow(a, 0.5 * (2.0 - q))),
                               1e-3 * req.rho_max);
  State x0{};
  x0[0] = a - forcing * rho0 * rho0 / (2.0 * N);
  x0[1] = -forcing * rho0 / N;
  x0[2] = unit_ball_measure(N) * std::pow(a, q) * std::pow(rho0, N);
  x0[3] = system.weight_scale * forcing * forcing / (N * N) * std::pow(rho0, N + 2) / (N + 2);
  x0[4] = (N - 1) * forcing * forcing * rho0 * rho0 / (2.0 * N * N);
  const double energy0 = std::pow(a, q) / q;

  RadialProfile prof;
  prof.kind = ProfileKind::ball;
  prof.N = N;
  prof.q = q;
  prof.amplitude = a;

  const std::size_t n_samples = req.sample ? std::max<std::size_t>(tol.samples, 3) : 0;
  const double ds = n_samples > 1 ? req.rho_max / static_cast<double>(n_samples - 1) : 0.0;
  std::size_t next_sample = 0;
  if (req.sample) {
    prof.rho.reserve(n_samples);
    prof.u.reserve(n_samples);
    prof.uprime.reserve(n_samples);
  }
  auto push_taylor_sample = [&](double r) {
    prof.rho.push_back(r);
    prof.u.push_back(a - forcing * r * r / (2.0 * N));
    prof.uprime.push_back(-forcing * r / N);
  };
  while (req.sample && next_sample < n_samples && next_sample * ds <= rho0) {
    push_taylor_sample(next_sample * ds);
    ++next_sample;
  }

  auto stepper = odeint::make_dense_output(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(x0, rho0, rho0);

  bool have_end_state = false;
  State end_state{};
  State probe{};
  const std::size_t max_steps = 50'000'000;

  for (std::size_t step = 0; step < max_steps; ++step) {
    const State prev = stepper.current_state();
    const auto [t0, t1] = stepper.do_step(system);
    if (!(t1 - t0 > 1e-14 * std::max(1.0, t1))) {
      throw Error(ErrorCode::stiffness,
                  "step size underflow at rho = " + std::to_string(t1));
    }
    const State& cur = stepper.current_state();
    if (!std::isfinite(cur[0]) || !std::isfinite(cur[1])) {
      throw Error(ErrorCode::stiffness, "non-finite state at rho = " + std::to_string(t1));
    }

    // Samples and residuals inside this step.
    while (req.sample && next_sample < n_samples) {
      const double r = next_sample + 1 == n_samples ? req.rho_max : next_sample * ds;
      if (r > t1) break;
      stepper.calc_state(r, probe);
      prof.rho.push_back(r);
      prof.u.push_back(probe[0]);
      prof.uprime.push_back(probe[1]);
      // u'^2/2 + |u|^q/q + (N-1) int u'^2/s is conserved along solutions.
      const double energy = 0.5 * probe[1] * probe[1] +
                            std::pow(std::abs(probe[0]), q) / q + probe[4];
      prof.max_residual = std::max(prof.max_residual, std::abs(energy - energy0) / energy0);
      ++next_sample;
    }

    if (prev[0] * cur[0] < 0.0 || cur[0] == 0.0) {
      double lo = t0, hi = t1;
      const bool neg_at_lo = prev[0] < 0.0;
      if (cur[0] != 0.0) {
        while (hi - lo > tol.zero) {
          const double mid = 0.5 * (lo + hi);
          stepper.calc_state(mid, probe);
          if ((probe[0] < 0.0) == neg_at_lo) lo = mid; else hi = mid;
        }
      } else {
        lo = t1;
      }
      const double z = 0.5 * (lo + hi);
      if (z <= req.rho_max || req.stop_after_zeros > 0) prof.zeros.push_back(z);
    } else if (std::abs(cur[0]) < 1e-13) {
      ++prof.tangential_touches;
    }

    if (!have_end_state && t1 >= req.rho_max) {
      stepper.calc_state(req.rho_max, end_state);
      have_end_state = true;
    }
    if (req.stop_after_zeros > 0) {
      if (static_cast<int>(prof.zeros.size()) >= req.stop_after_zeros) break;
      if (t1 >= req.rho_max) break;
    } else if (have_end_state && (!req.sample || next_sample >= n_samples)) {
      break;
    }
    if (step + 1 == max_steps) {
      throw Error(ErrorCode::stiffness, "step budget exhausted");
    }
  }

  if (have_end_state) {
    prof.lq_mass = end_state[2];
    prof.dirichlet_energy = end_state[3];
  }
  if (req.sample && prof.max_residual > tol.residual) {
    throw Error(ErrorCode::convergence,
                "ODE residual " + std::to_string(prof.max_residual) +
                    " exceeds tolerance");
  }
  return prof;
}

// Truncates at `rho_end` and drops the terminal zero from the interior list.
void keep_interior_zeros(RadialProfile& prof, double rho_end) {
  std::erase_if(prof.zeros, [&](double z) { return z >= rho_end * (1.0 - 1e-9); });
}

}  // namespace

RadialProfile shoot_free(const ProblemParams& params, double amplitude,
                         double rho_max, const RadialTolerances& tol) {
  ShootRequest req;
  req.amplitude = amplitude;
  req.rho_max = rho_max;
  return integrate(params, req, tol);
}

double kth_zero_radius(const ProblemParams& params, double amplitude, int k,
                       const RadialTolerances& tol) {
  if (k < 1) throw Error(ErrorCode::invalid_input, "zero index must be >= 1");
  ShootRequest req;
  req.amplitude = amplitude;
  req.stop_after_zeros = k;
  req.sample = false;
  double window = 4.0 * (k + 1);
  while (true) {
    req.rho_max = std::min(window, tol.radius_cap);
    const RadialProfile prof = integrate(params, req, tol);
    if (static_cast<int>(prof.zeros.size()) >= k) return prof.zeros[k - 1];
    if (window >= tol.radius_cap) {
      throw Error(ErrorCode::not_found,
                  "found " + std::to_string(prof.zeros.size()) + " of " +
                      std::to_string(k) + " zeros within radius " +
                      std::to_string(req.rho_max));
    }
    window *= 2.0;
  }
}

QEigenpair ball_eigenvalue(const ProblemParams& params, double R, int k,
                           const RadialTolerances& tol) {
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_input, "radius must be positive");
  const int N = params.N();
  const double q = params.q();
  const double Rk = kth_zero_radius(params, 1.0, k, tol);
  RadialProfile prof = shoot_free(params, 1.0, Rk, tol);
  keep_interior_zeros(prof, Rk);

  // Critical point of the free functional on B_{Rk}: lambda = |U|_q^{q-2}.
  const double mass = prof.lq_mass;
  const double lambda_rk = q == 2.0 ? 1.0 : std::pow(mass, (q - 2.0) / q);
  const double t = R / Rk;
  const double lambda = scale_eigenvalue(lambda_rk, t, params);

  const double c = std::pow(mass * std::pow(t, N), -1.0 / q);
  for (std::size_t i = 0; i < prof.size(); ++i) {
    prof.rho[i] *= t;
    prof.u[i] *= c;
    prof.uprime[i] *= c / t;
  }
  for (double& z : prof.zeros) z *= t;
  // The last sample is the boundary; the shot only reaches it up to the
  // bisection width.
  prof.u.back() = 0.0;
  prof.amplitude *= c;
  prof.lq_mass = std::pow(c, q) * std::pow(t, N) * mass;
  prof.dirichlet_energy *= c * c * std::pow(t, N - 2);

  QEigenpair pair;
  pair.lambda = lambda;
  pair.lq_norm = std::pow(prof.lq_mass, 1.0 / q);
  pair.sign_class = k == 1 ? SignClass::positive : SignClass::sign_changing;
  pair.provenance = "radial family k=" + std::to_string(k);
  pair.eigenfunction = std::move(prof);
  return pair;
}

QEigenpair interval_eigenvalue(const ProblemParams& params, double L, int k,
                               const RadialTolerances& tol) {
  if (params.N() != 1) {
    throw Error(ErrorCode::invalid_dimension, "interval eigenvalues need N = 1");
  }
  if (!(L > 0.0)) throw Error(ErrorCode::invalid_input, "interval length must be positive");
  if (k < 1) throw Error(ErrorCode::invalid_input, "mode index must be >= 1");
  const double q = params.q();

  // Half-profile on [0, z1]; one half-wave of length 2 z1 is the even
  // extension, and k alternating half-waves give the k-th mode.
  const std::size_t half_intervals =
      std::max<std::size_t>(64, (tol.samples - 1) / static_cast<std::size_t>(k) / 2);
  const double z1 = kth_zero_radius(params, 1.0, 1, tol);
  RadialTolerances half_tol = tol;
  half_tol.samples = half_intervals + 1;
  const RadialProfile half = shoot_free(params, 1.0, z1, half_tol);

  const double wave_mass = half.lq_mass;  // weight 2 covers (-z1, z1)
  const double mass = k * wave_mass;
  const double lambda_native = q == 2.0 ? 1.0 : std::pow(mass, (q - 2.0) / q);
  const double t = L / (2.0 * k * z1);
  const double lambda = scale_eigenvalue(lambda_native, t, params);
  const double c = std::pow(mass * t, -1.0 / q);

  RadialProfile prof;
  prof.kind = ProfileKind::interval;
  prof.N = 1;
  prof.q = q;
  prof.amplitude = c * half.amplitude;
  const std::size_t S = half_intervals;
  const std::size_t total = 2 * S * static_cast<std::size_t>(k) + 1;
  prof.rho.resize(total);
  prof.u.resize(total);
  prof.uprime.resize(total);
  const double dx = L / static_cast<double>(total - 1);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t wave = std::min<std::size_t>(i / (2 * S), k - 1);
    const std::size_t m = i - wave * 2 * S;
    const double sgn = wave % 2 == 0 ? 1.0 : -1.0;
    const std::size_t idx = m >= S ? m - S : S - m;
    const double dir = m >= S ? 1.0 : -1.0;
    prof.rho[i] = i * dx;
    prof.u[i] = idx == S ? 0.0 : sgn * c * half.u[idx];
    prof.uprime[i] = sgn * dir * c * half.uprime[idx] / t;
  }
  prof.rho.back() = L;
  for (int j = 1; j < k; ++j) prof.zeros.push_back(L * j / k);
  prof.lq_mass = std::pow(c, q) * t * mass;
  prof.dirichlet_energy = c * c / t * k * half.dirichlet_energy;
  prof.max_residual = half.max_residual;

  QEigenpair pair;
  pair.lambda = lambda;
  pair.lq_norm = std::pow(prof.lq_mass, 1.0 / q);
  pair.sign_class = k == 1 ? SignClass::positive : SignClass::sign_changing;
  pair.provenance = "interval mode k=" + std::to_string(k);
  pair.eigenfunction = std::move(prof);
  return pair;
}

double pohozaev_constant(const ProblemParams& params) {
  const int N = params.N();
  const double q = params.q();
  if (N >= 3) {
    const double ts = params.two_star();
    return ts * q / (ts - q) / (2.0 * N);
  }
  return q / (2.0 * N - q * (N - 2.0));  // q/4 for N = 2, q/(q+2) for N = 1
}

BallConstants ball_constants(const ProblemParams& params, double lambda1, double R) {
  BallConstants c;
  const int N = params.N();
  c.omega_N = unit_ball_measure(N);
  c.C_qN = pohozaev_constant(params);
  c.script_C = std::sqrt(lambda1 / (N * c.omega_N * std::pow(R, N)) / c.C_qN);
  return c;
}

double boundary_slope_check(const QEigenpair& pair, const BallConstants& constants) {
  const RadialProfile* prof = pair.radial();
  if (prof == nullptr || prof->kind != ProfileKind::ball || prof->size() < 2) {
    throw Error(ErrorCode::invalid_input, "boundary slope needs a radial ball profile");
  }
  if (pair.sign_class != SignClass::positive) {
    throw Error(ErrorCode::invalid_input, "boundary slope needs a first (positive) eigenpair");
  }
  const double slope = std::abs(prof->uprime.back());
  return std::abs(slope - constants.script_C) / constants.script_C;
}

}  // namespace qspec
