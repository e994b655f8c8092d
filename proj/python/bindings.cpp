#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qspec/compose.hpp"
#include "qspec/grid.hpp"
#include "qspec/radial.hpp"
#include "qspec/verify.hpp"

namespace py = pybind11;
using namespace qspec;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

// Grid values as a (ny, nx) array, row 0 at the bottom.
py::array_t<double> grid_array(const GridField& g) {
  py::array_t<double> a({g.ny, g.nx});
  auto m = a.mutable_unchecked<2>();
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) m(iy, ix) = g.values[g.index(ix, iy)];
  return a;
}

py::dict profile_dict(const RadialProfile& p) {
  py::dict d;
  d["kind"] = p.kind == ProfileKind::ball ? "ball" : "interval";
  d["N"] = p.N;
  d["q"] = p.q;
  d["amplitude"] = p.amplitude;
  d["rho"] = as_array(p.rho);
  d["u"] = as_array(p.u);
  d["uprime"] = as_array(p.uprime);
  d["zeros"] = p.zeros;
  d["lq_mass"] = p.lq_mass;
  d["dirichlet_energy"] = p.dirichlet_energy;
  d["max_residual"] = p.max_residual;
  return d;
}

py::object eigenfunction(const QEigenpair& pair) {
  if (const auto* r = pair.radial()) return profile_dict(*r);
  const GridField& g = *pair.grid();
  py::dict d;
  d["h"] = g.h;
  d["x0"] = g.x(0);
  d["y0"] = g.y(0);
  d["values"] = grid_array(g);
  return d;
}

}  // namespace

PYBIND11_MODULE(_qspec, m) {
  m.doc() = "q-eigenvalues of the Dirichlet Laplacian";
  m.attr("__version__") = "0.1.0";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object cls = error;
      py::object inst = cls(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      py::set_error(cls, inst);
    }
  });

  py::class_<ProblemParams>(m, "ProblemParams")
      .def(py::init<int, double, bool>(), py::arg("N"), py::arg("q"), py::arg("allow_linear") = false)
      .def_property_readonly("N", &ProblemParams::N)
      .def_property_readonly("q", &ProblemParams::q)
      .def_property_readonly("two_star", &ProblemParams::two_star)
      .def_property_readonly("scaling_exponent", &ProblemParams::scaling_exponent)
      .def("__repr__", [](const ProblemParams& p) {
        return "ProblemParams(N=" + std::to_string(p.N()) + ", q=" + py::repr(py::float_(p.q())).cast<std::string>() + ")";
      });

  py::class_<DomainSpec>(m, "Domain")
      .def_static("interval", &DomainSpec::interval, py::arg("length"))
      .def_static("ball", &DomainSpec::ball, py::arg("radius"))
      .def_static("rectangle", &DomainSpec::rectangle, py::arg("a"), py::arg("b"))
      .def_static("disjoint_union", &DomainSpec::disjoint_union, py::arg("parts"),
                  py::arg("separation") = 0.25)
      .def_static("from_json", [](const std::string& s) { return parse_domain(s); })
      .def("to_json", [](const DomainSpec& d) { return domain_to_json(d); })
      .def_property_readonly("type", &DomainSpec::type_name);

  py::class_<GridField>(m, "Grid")
      .def_readonly("h", &GridField::h)
      .def_readonly("dim", &GridField::dim)
      .def_property_readonly("interior_count", &GridField::interior_count)
      .def_property_readonly("mask", [](const GridField& g) {
        py::array_t<std::uint8_t> a({g.ny, g.nx});
        auto v = a.mutable_unchecked<2>();
        for (int iy = 0; iy < g.ny; ++iy)
          for (int ix = 0; ix < g.nx; ++ix) v(iy, ix) = g.mask[g.index(ix, iy)];
        return a;
      })
      .def_property_readonly("values", &grid_array);

  py::class_<QEigenpair>(m, "QEigenpair")
      .def_readonly("lam", &QEigenpair::lambda)
      .def_readonly("lq_norm", &QEigenpair::lq_norm)
      .def_readonly("solver_error", &QEigenpair::solver_error)
      .def_readonly("iterations", &QEigenpair::iterations)
      .def_readonly("provenance", &QEigenpair::provenance)
      .def_property_readonly("sign_class",
                             [](const QEigenpair& p) { return std::string(to_string(p.sign_class)); })
      .def_property_readonly("eigenfunction", &eigenfunction)
      .def("__repr__", [](const QEigenpair& p) {
        return "QEigenpair(lam=" + py::repr(py::float_(p.lambda)).cast<std::string>() + ", " +
               std::string(to_string(p.sign_class)) + ")";
      });

  m.def("critical_exponent", &critical_exponent, py::arg("N"));
  m.def("scale_eigenvalue", &scale_eigenvalue, py::arg("lam"), py::arg("t"), py::arg("params"));
  m.def(
      "free_functional_correspondence",
      [](double lam, const ProblemParams& p) {
        const auto r = free_functional_correspondence(lam, p);
        return py::make_tuple(r.amplitude_factor, r.critical_value);
      },
      py::arg("lam"), py::arg("params"), "Returns (amplitude_factor, critical_value).");
  m.def(
      "geometric_union_admissible",
      [](double r0, double gamma, const ProblemParams& p, int truncation) {
        const auto r = check_ball_union_admissible(GeometricRadii{r0, gamma}, p, truncation);
        py::dict d;
        d["admissible"] = r.status == Admissibility::admissible;
        d["exponent"] = r.exponent;
        d["partial_sum"] = r.partial_sum;
        d["series_value"] = r.series_value;
        return d;
      },
      py::arg("r0"), py::arg("gamma"), py::arg("params"), py::arg("truncation") = 64);

  // radial
  m.def(
      "shoot_free",
      [](const ProblemParams& p, double a, double rho_max) { return profile_dict(shoot_free(p, a, rho_max)); },
      py::arg("params"), py::arg("amplitude"), py::arg("rho_max"));
  m.def(
      "kth_zero_radius", [](const ProblemParams& p, double a, int k) { return kth_zero_radius(p, a, k); },
      py::arg("params"), py::arg("amplitude"), py::arg("k"));
  m.def(
      "ball_eigenvalue", [](const ProblemParams& p, double R, int k) { return ball_eigenvalue(p, R, k); },
      py::arg("params"), py::arg("R") = 1.0, py::arg("k") = 1);
  m.def(
      "interval_eigenvalue",
      [](const ProblemParams& p, double L, int k) { return interval_eigenvalue(p, L, k); },
      py::arg("params"), py::arg("L") = 1.0, py::arg("k") = 1);

  // grid
  m.def("rasterize", &rasterize, py::arg("domain"), py::arg("h"));
  m.def("dumbbell_domain", &dumbbell_domain, py::arg("eps"), py::arg("h"));
  m.def(
      "minimize_rayleigh",
      [](const ProblemParams& p, const GridField& g, double tol, int max_iter, std::uint64_t seed) {
        RayleighOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        o.seed = seed;
        return minimize_rayleigh(p, g, o);
      },
      py::arg("params"), py::arg("grid"), py::arg("tol") = 1e-10, py::arg("max_iter") = 100000,
      py::arg("seed") = 0x5EED);
  m.def(
      "minimize_rayleigh_symmetric",
      [](const ProblemParams& p, const GridField& g, const std::string& axis) {
        if (axis != "x1" && axis != "x2") throw Error(ErrorCode::invalid_input, "axis must be x1 or x2");
        return minimize_rayleigh_symmetric(p, g, axis == "x1" ? Reflection::x1 : Reflection::x2);
      },
      py::arg("params"), py::arg("grid"), py::arg("axis") = "x1");
  m.def(
      "residual", [](const QEigenpair& pair, const ProblemParams& p) { return residual(pair, p); },
      py::arg("pair"), py::arg("params"));
  m.def(
      "linearized_spectrum",
      [](const QEigenpair& pair, const ProblemParams& p, int count) {
        return linearized_spectrum(pair, p, count).mu;
      },
      py::arg("pair"), py::arg("params"), py::arg("m") = 3);
  m.def(
      "dumbbell_experiment",
      [](double eps, const ProblemParams& p, double h) {
        const auto r = dumbbell_experiment(eps, p, h);
        py::dict d;
        d["lambda1"] = r.lambda1;
        d["lambda1_sym"] = r.lambda1_sym;
        d["mu_q_half"] = r.mu_q_half;
        d["ratio"] = r.ratio;
        d["localization"] = r.localization;
        d["factor"] = r.factor;
        d["identity_gap"] = r.identity_gap;
        d["upper_bound"] = r.upper_bound;
        d["margin"] = r.margin;
        return d;
      },
      py::arg("eps"), py::arg("params"), py::arg("h"));

  // compose
  m.def(
      "spin_eigenvalue",
      [](const std::vector<double>& lam, const std::vector<int>& spins, const ProblemParams& p) {
        SpinVector s;
        for (int v : spins) s.delta.push_back(static_cast<std::uint8_t>(v));
        return spin_eigenvalue(lam, s, p).value;
      },
      py::arg("lambdas"), py::arg("spins"), py::arg("params"));
  m.def(
      "union_first_eigenvalue",
      [](const std::vector<double>& l, const ProblemParams& p) { return union_first_eigenvalue(l, p); },
      py::arg("lambdas"), py::arg("params"));
  m.def(
      "enumerate_spectrum",
      [](const std::vector<std::vector<double>>& spectra, const ProblemParams& p,
         std::optional<double> ceiling) {
        EnumerationOptions o;
        o.ceiling = ceiling;
        py::list out;
        for (const auto& s : enumerate_spectrum(spectra, p, o).samples) {
          out.append(py::make_tuple(s.value, s.multiplicity(), s.spins.str()));
        }
        return out;
      },
      py::arg("spectra"), py::arg("params"), py::arg("ceiling") = py::none(),
      "List of (value, multiplicity, spins) in ascending order.");
  m.def(
      "accumulation_points",
      [](std::vector<double> values, double tol, std::size_t min_cluster) {
        std::sort(values.begin(), values.end());
        py::list out;
        for (const auto& c : accumulation_points(values, tol, min_cluster)) {
          out.append(py::make_tuple(c.point, c.from_above, c.witnesses.size()));
        }
        return out;
      },
      py::arg("values"), py::arg("tol"), py::arg("min_cluster") = 5,
      "List of (point, from_above, witness_count).");
  m.def(
      "geometric_union_tail",
      [](double r0, double gamma, double lambda1_unit, const ProblemParams& p, int K) {
        const auto t = geometric_union_tail(GeometricRadii{r0, gamma}, lambda1_unit, p, K);
        py::dict d;
        d["values"] = as_array(t.values);
        d["excess"] = as_array(t.excess);
        d["limit"] = t.limit;
        d["strictly_decreasing"] = t.strictly_decreasing;
        d["above_limit"] = t.above_limit;
        return d;
      },
      py::arg("r0"), py::arg("gamma"), py::arg("lambda1_unit"), py::arg("params"), py::arg("K"));

  // verify
  m.def(
      "pohozaev_mismatch",
      [](const QEigenpair& pair, const DomainSpec& d, const ProblemParams& p) {
        return pohozaev_check(pair, d, p).measured;
      },
      py::arg("pair"), py::arg("domain"), py::arg("params"));
  m.def(
      "eigenpair_sanity",
      [](const QEigenpair& pair, double lambda1, const ProblemParams& p) {
        return eigenpair_sanity(pair, lambda1, p).passed;
      },
      py::arg("pair"), py::arg("lambda1"), py::arg("params"));
}
