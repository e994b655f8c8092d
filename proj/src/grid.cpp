#include "qspec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace qspec {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Lattice nodes closer than this to the boundary count as boundary nodes.
constexpr double kBoundarySlack = 1e-9;

struct Leaf {
  const DomainSpec* domain;
  double cx;
  double cy;
};

void flatten(const DomainSpec& d, double cx, double cy, std::vector<Leaf>& out) {
  if (const auto* u = std::get_if<DisjointUnion>(&d.shape)) {
    const auto centers = u->layout();
    for (std::size_t i = 0; i < u->components.size(); ++i) {
      flatten(u->components[i], cx + centers[i].first, cy + centers[i].second, out);
    }
  } else {
    out.push_back({&d, cx, cy});
  }
}

bool inside_leaf(const DomainSpec& d, double x, double y, double h) {
  const double t = kBoundarySlack * h;
  struct V {
    double x, y, h, t;
    bool operator()(const Interval& s) const { return std::abs(x) < 0.5 * s.length - t; }
    bool operator()(const Ball& s) const { return std::hypot(x, y) < s.radius - t; }
    bool operator()(const Rectangle& s) const {
      return std::abs(x) < 0.5 * s.a - t && std::abs(y) < 0.5 * s.b - t;
    }
    bool operator()(const RasterMask& s) const {
      const double fi = (x - s.origin_x) / s.h;
      const double fj = (y - s.origin_y) / s.h;
      const long i = std::lround(fi);
      const long j = std::lround(fj);
      if (std::abs(fi - i) > 1e-6 || std::abs(fj - j) > 1e-6) return false;
      if (i < 0 || j < 0 || i >= s.nx || j >= s.ny) return false;
      return s.cells[static_cast<std::size_t>(j) * s.nx + i] != 0;
    }
    bool operator()(const DisjointUnion&) const { return false; }
  };
  return std::visit(V{x, y, h, t}, d.shape);
}

GridField make_box(double xmin, double xmax, double ymin, double ymax, double h, int dim) {
  GridField g;
  g.dim = dim;
  g.h = h;
  g.i0 = static_cast<int>(std::floor(xmin / h)) - 1;
  const int i1 = static_cast<int>(std::ceil(xmax / h)) + 1;
  g.nx = i1 - g.i0 + 1;
  if (dim == 1) {
    g.j0 = 0;
    g.ny = 1;
  } else {
    g.j0 = static_cast<int>(std::floor(ymin / h)) - 1;
    const int j1 = static_cast<int>(std::ceil(ymax / h)) + 1;
    g.ny = j1 - g.j0 + 1;
  }
  g.mask.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
  g.values.assign(g.mask.size(), 0.0);
  return g;
}

// Labels 4-connected components; returns the count and fills `label`.
int label_components(const GridField& g, const std::vector<int>& owner,
                     std::vector<int>& label) {
  label.assign(g.mask.size(), -1);
  int count = 0;
  std::vector<std::pair<int, int>> stack;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const auto idx = g.index(ix, iy);
      if (!g.mask[idx] || label[idx] >= 0) continue;
      label[idx] = count;
      stack.emplace_back(ix, iy);
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& d : dirs) {
          const int nx = cx + d[0], ny = cy + d[1];
          if (!g.inside(nx, ny)) continue;
          const auto nidx = g.index(nx, ny);
          if (label[nidx] >= 0 || owner[nidx] != owner[g.index(cx, cy)]) continue;
          label[nidx] = count;
          stack.emplace_back(nx, ny);
        }
      }
      ++count;
    }
  }
  return count;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double lattice_uniform(std::uint64_t seed, int i, int j) {
  const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
                   static_cast<std::uint32_t>(j);
  const std::uint64_t r = splitmix64(seed ^ splitmix64(key));
  return static_cast<double>(r >> 11) * 0x1.0p-53;
}

double signed_power(double u, double q) {
  return std::copysign(std::pow(std::abs(u), q - 1.0), u);
}

// Weighted 5-point (or 3-point) Dirichlet form on the mask nodes.
struct Discretization {
  std::vector<std::size_t> cell;  // unknown -> bounding-box index
  std::vector<int> unknown;       // bounding-box index -> unknown, or -1
  SpMat A;
  Vec mass;
};

template <typename EdgeFn, typename BoundaryFn>
void for_each_edge(const GridField& g, EdgeFn&& edge, BoundaryFn&& boundary) {
  const int ndir = g.dim == 1 ? 2 : 4;
  const int dirs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (!g.inside(ix, iy)) continue;
      const bool on_mirror = g.mirror_x1 && g.i0 + ix == 0;
      for (int k = 0; k < ndir; ++k) {
        const int dk = g.dim == 1 ? (k == 0 ? 0 : 2) : k;
        const int dx = dirs[dk][0], dy = dirs[dk][1];
        if (on_mirror && dx < 0) continue;
        const double w = on_mirror && dy != 0 ? 0.5 : 1.0;
        const int nx = ix + dx, ny = iy + dy;
        if (g.inside(nx, ny)) {
          if (dx > 0 || dy > 0) edge(g.index(ix, iy), g.index(nx, ny), w);
        } else {
          boundary(g.index(ix, iy), w);
        }
      }
    }
  }
}

double node_weight(const GridField& g, std::size_t idx) {
  if (!g.mirror_x1) return 1.0;
  const int ix = static_cast<int>(idx % static_cast<std::size_t>(g.nx));
  return g.i0 + ix == 0 ? 0.5 : 1.0;
}

Discretization discretize(const GridField& g) {
  Discretization D;
  D.unknown.assign(g.mask.size(), -1);
  for (std::size_t idx = 0; idx < g.mask.size(); ++idx) {
    if (g.mask[idx]) {
      D.unknown[idx] = static_cast<int>(D.cell.size());
      D.cell.push_back(idx);
    }
  }
  const auto n = static_cast<Eigen::Index>(D.cell.size());
  if (n == 0) throw Error(ErrorCode::empty_domain, "grid has no interior nodes");
  const double stiff = g.dim == 1 ? 1.0 / g.h : 1.0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);
  for_each_edge(
      g,
      [&](std::size_t a, std::size_t b, double w) {
        const int ua = D.unknown[a], ub = D.unknown[b];
        trip.emplace_back(ua, ua, w * stiff);
        trip.emplace_back(ub, ub, w * stiff);
        trip.emplace_back(ua, ub, -w * stiff);
        trip.emplace_back(ub, ua, -w * stiff);
      },
      [&](std::size_t a, double w) {
        const int ua = D.unknown[a];
        trip.emplace_back(ua, ua, w * stiff);
      });
  D.A.resize(n, n);
  D.A.setFromTriplets(trip.begin(), trip.end());
  D.mass.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    D.mass[k] = g.cell_measure() * node_weight(g, D.cell[static_cast<std::size_t>(k)]);
  }
  return D;
}

Vec gather(const Discretization& D, const std::vector<double>& box) {
  Vec v(static_cast<Eigen::Index>(D.cell.size()));
  for (std::size_t k = 0; k < D.cell.size(); ++k) v[static_cast<Eigen::Index>(k)] = box[D.cell[k]];
  return v;
}

std::vector<double> scatter(const Discretization& D, const Vec& v, std::size_t box_size) {
  std::vector<double> box(box_size, 0.0);
  for (std::size_t k = 0; k < D.cell.size(); ++k) box[D.cell[k]] = v[static_cast<Eigen::Index>(k)];
  return box;
}

double lq_norm_of(const Vec& u, const Vec& mass, double q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += mass[i] * std::pow(std::abs(u[i]), q);
  return std::pow(s, 1.0 / q);
}

struct IterationResult {
  Vec u;
  double lambda = 0.0;
  int iterations = 0;
  double error = 0.0;
};

using Projector = std::function<void(Vec&)>;

IterationResult inverse_iteration(const Discretization& D, double q, Vec u,
                                  const RayleighOptions& opts, const Projector& project) {
  Eigen::SimplicialLDLT<SpMat> solver(D.A);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::solver, "factorization of the discrete Laplacian failed");
  }
  if (project) project(u);
  u /= lq_norm_of(u, D.mass, q);

  IterationResult res;
  double prev_q = std::numeric_limits<double>::quiet_NaN();
  double prev_change = std::numeric_limits<double>::quiet_NaN();
  Vec rhs(u.size());
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (Eigen::Index i = 0; i < u.size(); ++i) rhs[i] = D.mass[i] * signed_power(u[i], q);
    Vec v = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !v.allFinite()) {
      throw Error(ErrorCode::solver, "sparse solve failed");
    }
    if (project) project(v);
    v /= lq_norm_of(v, D.mass, q);
    const double quotient = v.dot(D.A * v);
    const double change = std::abs(quotient - prev_q) / quotient;
    const double step = (v - u).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
    u = std::move(v);
    res.iterations = it;
    res.lambda = quotient;
    if (it > 1 && change < opts.tol && step < opts.step_tol) {
      double rate = std::isfinite(prev_change) && prev_change > 0.0 ? change / prev_change : 0.0;
      rate = std::clamp(rate, 0.0, 0.999);
      res.error = std::max(change * rate / (1.0 - rate), 4.0 * std::numeric_limits<double>::epsilon());
      res.u = std::move(u);
      return res;
    }
    prev_q = quotient;
    prev_change = change;
  }
  throw Error(ErrorCode::convergence,
              "inverse iteration did not converge in " + std::to_string(opts.max_iter) +
                  " iterations; last quotient " + std::to_string(res.lambda));
}

// Start values on the unknowns, symmetrized across x1 = 0 for mirror grids.
Vec start_vector(const GridField& g, const Discretization& D, const RayleighOptions& opts) {
  if (opts.start) {
    if (opts.start->size() != g.mask.size()) {
      throw Error(ErrorCode::invalid_input, "start vector does not match the grid");
    }
    Vec s = gather(D, *opts.start);
    if (s.minCoeff() < 0.0 || s.maxCoeff() <= 0.0) {
      throw Error(ErrorCode::invalid_input, "start vector must be nonnegative and nonzero");
    }
    return s;
  }
  return gather(D, random_positive_start(g, opts.seed));
}

QEigenpair make_pair(const GridField& g, const Discretization& D,
                     const IterationResult& r, double q, const std::string& provenance) {
  QEigenpair pair;
  pair.lambda = r.lambda;
  GridField field = g;
  field.values = scatter(D, r.u, g.mask.size());
  pair.lq_norm = lq_norm_of(r.u, D.mass, q);
  pair.sign_class = r.u.minCoeff() >= 0.0 ? SignClass::positive : SignClass::sign_changing;
  pair.solver_error = r.error;
  pair.iterations = r.iterations;
  pair.provenance = provenance;
  pair.eigenfunction = std::move(field);
  return pair;
}

std::vector<int> mirror_map(const GridField& g, const Discretization& D, Reflection axis) {
  std::vector<int> map(D.cell.size(), -1);
  for (std::size_t k = 0; k < D.cell.size(); ++k) {
    const std::size_t idx = D.cell[k];
    const int ix = static_cast<int>(idx % static_cast<std::size_t>(g.nx));
    const int iy = static_cast<int>(idx / static_cast<std::size_t>(g.nx));
    int mx = ix, my = iy;
    if (axis == Reflection::x1) {
      mx = -(g.i0 + ix) - g.i0;
    } else {
      if (g.dim == 1) throw Error(ErrorCode::symmetry, "no x2 reflection on a 1-D grid");
      my = -(g.j0 + iy) - g.j0;
    }
    if (!g.inside(mx, my)) {
      throw Error(ErrorCode::symmetry, "mask is not invariant under the reflection");
    }
    map[k] = D.unknown[g.index(mx, my)];
  }
  return map;
}

}  // namespace

GridField rasterize(const DomainSpec& domain, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_input, "mesh width must be positive");
  domain.validate();
  std::vector<Leaf> leaves;
  flatten(domain, 0.0, 0.0, leaves);
  const bool any_interval = std::any_of(leaves.begin(), leaves.end(), [](const Leaf& l) {
    return std::holds_alternative<Interval>(l.domain->shape);
  });
  const bool all_interval = std::all_of(leaves.begin(), leaves.end(), [](const Leaf& l) {
    return std::holds_alternative<Interval>(l.domain->shape);
  });
  if (any_interval && !all_interval) {
    throw Error(ErrorCode::invalid_input, "cannot mix intervals with planar domains");
  }
  const int dim = all_interval ? 1 : 2;
  for (const auto& l : leaves) {
    // A mesh no finer than the half-width leaves at most the centre node,
    // which has no interior neighbour to carry a stencil.
    if (!std::holds_alternative<RasterMask>(l.domain->shape) &&
        !std::holds_alternative<DisjointUnion>(l.domain->shape)) {
      const auto [ex, ey] = l.domain->half_extent();
      if (h >= (dim == 1 ? ex : std::min(ex, ey))) {
        throw Error(ErrorCode::empty_domain, "mesh width h does not resolve the domain");
      }
    }
    if (const auto* m = std::get_if<RasterMask>(&l.domain->shape)) {
      if (std::abs(m->h - h) > 1e-12 * h) {
        throw Error(ErrorCode::invalid_input, "raster mask spacing differs from h");
      }
    }
  }

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const auto [ex, ey] = leaves[k].domain->half_extent();
    if (const auto* m = std::get_if<RasterMask>(&leaves[k].domain->shape)) {
      const double x0 = leaves[k].cx + m->origin_x, y0 = leaves[k].cy + m->origin_y;
      xmin = k == 0 ? x0 : std::min(xmin, x0);
      xmax = k == 0 ? x0 + (m->nx - 1) * h : std::max(xmax, x0 + (m->nx - 1) * h);
      ymin = k == 0 ? y0 : std::min(ymin, y0);
      ymax = k == 0 ? y0 + (m->ny - 1) * h : std::max(ymax, y0 + (m->ny - 1) * h);
      continue;
    }
    xmin = k == 0 ? leaves[k].cx - ex : std::min(xmin, leaves[k].cx - ex);
    xmax = k == 0 ? leaves[k].cx + ex : std::max(xmax, leaves[k].cx + ex);
    ymin = k == 0 ? leaves[k].cy - ey : std::min(ymin, leaves[k].cy - ey);
    ymax = k == 0 ? leaves[k].cy + ey : std::max(ymax, leaves[k].cy + ey);
  }
  GridField g = make_box(xmin, xmax, ymin, ymax, h, dim);

  std::vector<int> owner(g.mask.size(), -1);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const double x = g.x(ix), y = dim == 1 ? 0.0 : g.y(iy);
      for (std::size_t k = 0; k < leaves.size(); ++k) {
        if (!inside_leaf(*leaves[k].domain, x - leaves[k].cx, y - leaves[k].cy, h)) continue;
        const auto idx = g.index(ix, iy);
        if (owner[idx] >= 0) throw Error(ErrorCode::invalid_input, "union components overlap");
        owner[idx] = static_cast<int>(k);
        g.mask[idx] = 1;
      }
    }
  }
  if (g.interior_count() == 0) {
    throw Error(ErrorCode::empty_domain, "no lattice node of spacing h lies inside the domain");
  }
  if (leaves.size() > 1) {
    for (int iy = 0; iy < g.ny; ++iy) {
      for (int ix = 0; ix + 1 < g.nx; ++ix) {
        const auto a = owner[g.index(ix, iy)], b = owner[g.index(ix + 1, iy)];
        if (a >= 0 && b >= 0 && a != b) {
          throw Error(ErrorCode::invalid_input, "union components touch at this mesh width");
        }
        if (iy + 1 < g.ny) {
          const auto c = owner[g.index(ix, iy + 1)];
          if (a >= 0 && c >= 0 && a != c) {
            throw Error(ErrorCode::invalid_input, "union components touch at this mesh width");
          }
        }
      }
    }
  }
  std::vector<int> label;
  const int pieces = label_components(g, owner, label);
  std::vector<int> seen(leaves.size(), 0);
  for (std::size_t idx = 0; idx < owner.size(); ++idx) {
    if (owner[idx] >= 0) seen[static_cast<std::size_t>(owner[idx])] = 1;
  }
  const int occupied = std::accumulate(seen.begin(), seen.end(), 0);
  if (pieces != occupied) {
    throw Error(ErrorCode::invalid_input,
                "a domain component is not 4-connected at this mesh width");
  }
  return g;
}

GridField rasterize_predicate(const std::function<bool(double, double)>& inside,
                              double half_x, double half_y, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_input, "mesh width must be positive");
  GridField g = make_box(-half_x, half_x, -half_y, half_y, h, 2);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (inside(g.x(ix), g.y(iy))) g.mask[g.index(ix, iy)] = 1;
    }
  }
  if (g.interior_count() == 0) {
    throw Error(ErrorCode::empty_domain, "no lattice node of spacing h lies inside the domain");
  }
  return g;
}

GridField diamond_domain(double h) {
  const double t = kBoundarySlack * h;
  return rasterize_predicate(
      [t](double x, double y) { return std::abs(x) + std::abs(y) < 1.0 - t; }, 1.0, 1.0, h);
}

GridField dumbbell_domain(double eps, double h) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::invalid_input, "dumbbell parameter must lie in (0, 1)");
  }
  const double c = 1.0 - eps;
  const double t = kBoundarySlack * h;
  GridField g = rasterize_predicate(
      [c, t](double x, double y) { return std::abs(std::abs(x) - c) + std::abs(y) < 1.0 - t; },
      2.0 - eps, 1.0, h);
  if (component_count(g) != 1) {
    throw Error(ErrorCode::invalid_input, "dumbbell neck is not resolved at this mesh width");
  }
  return g;
}

GridField half_domain(const GridField& symmetric) {
  const Discretization D = discretize(symmetric);
  (void)mirror_map(symmetric, D, Reflection::x1);
  GridField g = symmetric;
  g.mirror_x1 = true;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (g.i0 + ix < 0) {
        g.mask[g.index(ix, iy)] = 0;
        g.values[g.index(ix, iy)] = 0.0;
      }
    }
  }
  return g;
}

int component_count(const GridField& grid) {
  std::vector<int> owner(grid.mask.size(), 0);
  std::vector<int> label;
  return label_components(grid, owner, label);
}

std::vector<double> random_positive_start(const GridField& grid, std::uint64_t seed) {
  std::vector<double> v(grid.mask.size(), 0.0);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (!grid.inside(ix, iy)) continue;
      const int i = grid.i0 + ix, j = grid.j0 + iy;
      double val = 0.5 + lattice_uniform(seed, i, j);
      if (grid.mirror_x1) val = 0.5 * (val + 0.5 + lattice_uniform(seed, -i, j));
      v[grid.index(ix, iy)] = val;
    }
  }
  return v;
}

QEigenpair minimize_rayleigh(const ProblemParams& params, const GridField& grid,
                             const RayleighOptions& opts) {
  if (grid.mask.size() != static_cast<std::size_t>(grid.nx) * grid.ny || !(grid.h > 0.0)) {
    throw Error(ErrorCode::invalid_input, "malformed grid");
  }
  const Discretization D = discretize(grid);
  const IterationResult r = inverse_iteration(D, params.q(), start_vector(grid, D, opts), opts, {});
  return make_pair(grid, D, r, params.q(),
                   "grid inverse iteration h=" + std::to_string(grid.h));
}

QEigenpair minimize_rayleigh_symmetric(const ProblemParams& params,
                                       const GridField& grid, Reflection axis,
                                       const RayleighOptions& opts) {
  const Discretization D = discretize(grid);
  const std::vector<int> map = mirror_map(grid, D, axis);
  const Projector average = [&map](Vec& v) {
    Vec w = v;
    for (std::size_t k = 0; k < map.size(); ++k) {
      w[static_cast<Eigen::Index>(k)] = 0.5 * (v[static_cast<Eigen::Index>(k)] + v[map[k]]);
    }
    v = std::move(w);
  };
  const IterationResult r = inverse_iteration(D, params.q(), start_vector(grid, D, opts), opts, average);
  return make_pair(grid, D, r, params.q(),
                   "grid symmetric inverse iteration h=" + std::to_string(grid.h));
}

double dirichlet_energy(const GridField& field) {
  const double stiff = field.dim == 1 ? 1.0 / field.h : 1.0;
  double e = 0.0;
  for_each_edge(
      field,
      [&](std::size_t a, std::size_t b, double w) {
        const double d = field.values[a] - field.values[b];
        e += w * d * d;
      },
      [&](std::size_t a, double w) { e += w * field.values[a] * field.values[a]; });
  return stiff * e;
}

double lq_mass(const GridField& field, double q) {
  double s = 0.0;
  for (std::size_t idx = 0; idx < field.mask.size(); ++idx) {
    if (field.mask[idx]) {
      s += node_weight(field, idx) * std::pow(std::abs(field.values[idx]), q);
    }
  }
  return s * field.cell_measure();
}

double residual(const QEigenpair& pair, const ProblemParams& params) {
  const GridField* g = pair.grid();
  if (g == nullptr) throw Error(ErrorCode::invalid_input, "residual needs a grid eigenpair");
  const Discretization D = discretize(*g);
  const Vec u = gather(D, g->values);
  if (u.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorCode::invalid_input, "zero field");
  const Vec Au = D.A * u;
  const double q = params.q();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    worst = std::max(worst, std::abs(Au[i] / D.mass[i] - pair.lambda * signed_power(u[i], q)));
  }
  return worst / (pair.lambda * std::pow(u.cwiseAbs().maxCoeff(), q - 1.0));
}

LinearizedSpectrum linearized_spectrum(const QEigenpair& pair,
                                       const ProblemParams& params, int m,
                                       const SpectrumOptions& opts) {
  const GridField* g = pair.grid();
  if (g == nullptr) throw Error(ErrorCode::invalid_input, "linearized spectrum needs a grid eigenpair");
  const double q = params.q();
  if (!(q > 2.0)) throw Error(ErrorCode::regime, "linearized spectrum is studied for 2 < q < 2*");
  if (pair.sign_class != SignClass::positive) {
    throw Error(ErrorCode::invalid_input, "linearization needs a positive first eigenpair");
  }
  if (std::abs(pair.lq_norm - 1.0) > 1e-8) {
    throw Error(ErrorCode::invalid_input, "linearization needs a unit L^q eigenfunction");
  }
  if (m < 1) throw Error(ErrorCode::invalid_input, "need at least one eigenvalue");

  const Discretization D = discretize(*g);
  const Vec U = gather(D, g->values);
  const auto n = U.size();
  const Vec inv_sqrt_mass = D.mass.cwiseSqrt().cwiseInverse();

  // B = M^{-1/2} A M^{-1/2} - (q-1) lambda diag(U^{q-2})
  SpMat B = inv_sqrt_mass.asDiagonal() * D.A * inv_sqrt_mass.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    B.coeffRef(i, i) -= (q - 1.0) * pair.lambda * std::pow(U[i], q - 2.0);
  }
  B.makeCompressed();
  const double shift = -(q - 1.0) * pair.lambda * std::pow(U.maxCoeff(), q - 2.0) - 1.0;
  SpMat K = B;
  for (Eigen::Index i = 0; i < n; ++i) K.coeffRef(i, i) -= shift;
  Eigen::SimplicialLDLT<SpMat> solver(K);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::solver, "shifted linearized operator is not positive definite");
  }

  const auto want = static_cast<Eigen::Index>(std::min<Eigen::Index>(m, n));
  const auto block = std::min<Eigen::Index>(n, want + std::max<Eigen::Index>(4, want));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);

  LinearizedSpectrum out;
  out.m = static_cast<int>(want);
  Eigen::VectorXd theta;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::MatrixXd Y = solver.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    Eigen::MatrixXd BQ = B * Q;
    Eigen::MatrixXd H = Q.transpose() * BQ;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    theta = eig.eigenvalues();
    X = Q * eig.eigenvectors();
    Eigen::MatrixXd R = BQ * eig.eigenvectors() - X * theta.asDiagonal();
    bool done = true;
    for (Eigen::Index j = 0; j < want; ++j) {
      if (R.col(j).norm() > opts.tol * (std::abs(theta[j]) + std::abs(shift))) done = false;
    }
    out.iterations = it;
    if (done) break;
    if (it == opts.max_iter) {
      throw Error(ErrorCode::convergence, "subspace iteration stagnated");
    }
  }

  for (Eigen::Index j = 0; j < want; ++j) {
    out.mu.push_back(theta[j]);
    const Vec phi = inv_sqrt_mass.cwiseProduct(X.col(j));
    out.modes.push_back(scatter(D, phi, g->mask.size()));
  }
  auto sign_counts = [](const Vec& v, double rel) {
    const double cut = rel * v.cwiseAbs().maxCoeff();
    int pos = 0, neg = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      pos += v[i] > cut;
      neg += v[i] < -cut;
    }
    return std::pair{pos, neg};
  };
  const auto [p0, n0] = sign_counts(X.col(0), 1e-10);
  out.ground_state_sign = (p0 == 0 || n0 == 0) ? "constant" : "mixed";
  if (want >= 2) {
    const auto [p1, n1] = sign_counts(X.col(1), 1e-3);
    out.second_mode_changes_sign = p1 > 0 && n1 > 0;
  }
  return out;
}

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

namespace {

std::vector<double> lobe_start(const GridField& g, std::uint64_t seed) {
  std::vector<double> v = random_positive_start(g, seed);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (g.x(ix) <= 0.0) v[g.index(ix, iy)] *= 1e-3;
    }
  }
  return v;
}

struct DumbbellSolve {
  QEigenpair full;
  QEigenpair sym;
  QEigenpair half;
};

DumbbellSolve solve_dumbbell(double eps, const ProblemParams& params, double h,
                             const RayleighOptions& base) {
  const GridField g = dumbbell_domain(eps, h);
  QEigenpair from_random = minimize_rayleigh(params, g, base);
  RayleighOptions lobe = base;
  lobe.start = lobe_start(g, base.seed);
  QEigenpair from_lobe = minimize_rayleigh(params, g, lobe);
  DumbbellSolve s{from_lobe.lambda <= from_random.lambda ? std::move(from_lobe)
                                                         : std::move(from_random),
                  minimize_rayleigh_symmetric(params, g, Reflection::x1, base),
                  minimize_rayleigh(params, half_domain(g), base)};
  return s;
}

}  // namespace

DumbbellReport dumbbell_experiment(double epsilon, const ProblemParams& params,
                                   double h, const DumbbellOptions& opts) {
  if (params.N() != 2) throw Error(ErrorCode::invalid_dimension, "dumbbell experiment is planar");
  if (!(params.q() > 2.0)) throw Error(ErrorCode::regime, "dumbbell experiment needs 2 < q");
  const double q = params.q();

  DumbbellReport rep;
  rep.epsilon = epsilon;
  rep.h = h;
  rep.q = q;
  rep.factor = std::pow(2.0, 1.0 - 2.0 / q);

  const DumbbellSolve s = solve_dumbbell(epsilon, params, h, opts.rayleigh);
  rep.lambda1 = s.full.lambda;
  rep.lambda1_sym = s.sym.lambda;
  rep.mu_q_half = s.half.lambda;
  rep.ratio = rep.lambda1_sym / rep.lambda1;
  rep.margin = rep.lambda1_sym - rep.lambda1;
  rep.identity_gap = std::abs(rep.lambda1_sym - rep.factor * rep.mu_q_half) / rep.lambda1_sym;
  rep.solver_error = s.sym.solver_error + s.half.solver_error;

  const GridField& u = *s.full.grid();
  double right = 0.0, total = 0.0;
  for (int iy = 0; iy < u.ny; ++iy) {
    for (int ix = 0; ix < u.nx; ++ix) {
      if (!u.inside(ix, iy)) continue;
      const double w = std::pow(std::abs(u.values[u.index(ix, iy)]), q);
      total += w;
      if (u.x(ix) > 0.0) right += w;
      else if (u.x(ix) == 0.0) right += 0.5 * w;
    }
  }
  rep.localization = std::max(right / total, 1.0 - right / total);

  rep.lambda1_cube = minimize_rayleigh(params, diamond_domain(h), opts.rayleigh).lambda;
  rep.upper_bound = scale_eigenvalue(rep.lambda1_cube, 1.0 - epsilon, params);

  if (opts.estimate_discretization) {
    const DumbbellSolve coarse = solve_dumbbell(epsilon, params, 2.0 * h, opts.rayleigh);
    rep.disc_error_lambda1 = std::abs(rep.lambda1 - coarse.full.lambda) / 3.0;
    rep.disc_error_sym = std::abs(rep.lambda1_sym - coarse.sym.lambda) / 3.0;
  }
  return rep;
}

}  // namespace qspec
