#include "output.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qspec::cli {

std::string num(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, value == 0.0 ? 0.0 : value);
  return buf;
}

double rounded(double value, int precision) {
  if (!std::isfinite(value)) return value;
  return std::strtod(num(value, precision).c_str(), nullptr);
}

std::string mask_hash(const GridField& g) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (int v : {g.dim, g.i0, g.j0, g.nx, g.ny, g.mirror_x1 ? 1 : 0}) {
    for (int b = 0; b < 4; ++b) mix((static_cast<std::uint32_t>(v) >> (8 * b)) & 0xFF);
  }
  for (auto m : g.mask) mix(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json pair_header(const QEigenpair& pair, int p) {
  Json j;
  j["lambda"] = rounded(pair.lambda, p);
  j["lq_norm"] = rounded(pair.lq_norm, p);
  j["sign_class"] = std::string(to_string(pair.sign_class));
  j["solver_error"] = rounded(pair.solver_error, p);
  j["iterations"] = pair.iterations;
  j["provenance"] = pair.provenance;
  if (const auto* prof = pair.radial()) {
    j["kind"] = prof->kind == ProfileKind::ball ? "ball" : "interval";
    j["N"] = prof->N;
    j["q"] = rounded(prof->q, p);
    j["amplitude"] = rounded(prof->amplitude, p);
    Json zeros = Json::array();
    for (double z : prof->zeros) zeros.push_back(rounded(z, p));
    j["zeros"] = zeros;
    j["max_residual"] = rounded(prof->max_residual, p);
  } else if (const auto* g = pair.grid()) {
    j["h"] = rounded(g->h, p);
    j["bbox"] = {rounded(g->x(0), p), rounded(g->x(g->nx - 1), p), rounded(g->y(0), p),
                 rounded(g->y(g->ny - 1), p)};
    j["nx"] = g->nx;
    j["ny"] = g->ny;
    j["interior_nodes"] = g->interior_count();
    j["mask_hash"] = mask_hash(*g);
  }
  return j;
}

std::string profile_csv(const QEigenpair& pair, int p) {
  const auto* prof = pair.radial();
  if (prof == nullptr) throw Error(ErrorCode::invalid_input, "not a radial eigenpair");
  std::ostringstream os;
  os << "# " << pair_header(pair, p).dump() << "\n";
  os << "rho,u,uprime\n";
  for (std::size_t i = 0; i < prof->size(); ++i) {
    os << num(prof->rho[i], p) << ',' << num(prof->u[i], p) << ',' << num(prof->uprime[i], p)
       << '\n';
  }
  return os.str();
}

Json profile_json(const QEigenpair& pair, int p) {
  const auto* prof = pair.radial();
  if (prof == nullptr) throw Error(ErrorCode::invalid_input, "not a radial eigenpair");
  Json j = pair_header(pair, p);
  Json rho = Json::array(), u = Json::array(), du = Json::array();
  for (std::size_t i = 0; i < prof->size(); ++i) {
    rho.push_back(rounded(prof->rho[i], p));
    u.push_back(rounded(prof->u[i], p));
    du.push_back(rounded(prof->uprime[i], p));
  }
  j["rho"] = rho;
  j["u"] = u;
  j["uprime"] = du;
  return j;
}

std::string grid_csv(const QEigenpair& pair, int p) {
  const auto* g = pair.grid();
  if (g == nullptr) throw Error(ErrorCode::invalid_input, "not a grid eigenpair");
  std::ostringstream os;
  os << "# " << pair_header(pair, p).dump() << "\n";
  os << "x,y,value\n";
  for (int iy = 0; iy < g->ny; ++iy) {
    for (int ix = 0; ix < g->nx; ++ix) {
      if (!g->inside(ix, iy)) continue;
      os << num(g->x(ix), p) << ',' << num(g->y(iy), p) << ','
         << num(g->values[g->index(ix, iy)], p) << '\n';
    }
  }
  return os.str();
}

Json grid_json(const QEigenpair& pair, int p) {
  const auto* g = pair.grid();
  if (g == nullptr) throw Error(ErrorCode::invalid_input, "not a grid eigenpair");
  Json j = pair_header(pair, p);
  Json nodes = Json::array();
  for (int iy = 0; iy < g->ny; ++iy) {
    for (int ix = 0; ix < g->nx; ++ix) {
      if (!g->inside(ix, iy)) continue;
      nodes.push_back({rounded(g->x(ix), p), rounded(g->y(iy), p),
                       rounded(g->values[g->index(ix, iy)], p)});
    }
  }
  j["nodes"] = nodes;
  return j;
}

Json sample_json(const SpectrumSample& s, int p) {
  Json j;
  j["value"] = rounded(s.value, p);
  j["multiplicity"] = s.multiplicity();
  j["spins"] = s.spins.str();
  Json comps = Json::array();
  for (const auto& [i, l] : s.component_eigenvalues) comps.push_back({i, rounded(l, p)});
  j["component_eigenvalues"] = comps;
  Json alpha = Json::array();
  for (double a : s.alpha) alpha.push_back(rounded(a, p));
  j["alpha"] = alpha;
  Json wit = Json::array();
  for (const auto& w : s.witnesses) wit.push_back(w.levels);
  j["witness_levels"] = wit;
  return j;
}

std::string spectrum_csv(const std::vector<SpectrumSample>& samples, int p) {
  std::ostringstream os;
  os << "value,multiplicity,spins\n";
  for (const auto& s : samples) {
    os << num(s.value, p) << ',' << s.multiplicity() << ',';
    for (std::size_t i = 0; i < s.witnesses.size(); ++i) {
      if (i) os << ' ';
      os << s.witnesses[i].spins().str();
    }
    os << '\n';
  }
  return os.str();
}

Json clusters_json(const std::vector<Cluster>& clusters, int p) {
  Json out = Json::array();
  for (const auto& c : clusters) {
    Json j;
    j["point"] = rounded(c.point, p);
    j["approach"] = c.from_above ? "from above" : "from below";
    j["witnesses"] = c.witnesses.size();
    Json spins = Json::array();
    for (const auto& s : c.witness_spins) spins.push_back(s.str());
    if (!spins.empty()) j["witness_spins"] = spins;
    out.push_back(j);
  }
  return out;
}

Json dumbbell_json(const DumbbellReport& r, int p) {
  Json j;
  j["epsilon"] = rounded(r.epsilon, p);
  j["h"] = rounded(r.h, p);
  j["q"] = rounded(r.q, p);
  j["lambda1"] = rounded(r.lambda1, p);
  j["lambda1_sym"] = rounded(r.lambda1_sym, p);
  j["mu_q_half"] = rounded(r.mu_q_half, p);
  j["ratio"] = rounded(r.ratio, p);
  j["localization"] = rounded(r.localization, p);
  j["factor"] = rounded(r.factor, p);
  j["identity_gap"] = rounded(r.identity_gap, p);
  j["solver_error"] = rounded(r.solver_error, p);
  j["lambda1_cube"] = rounded(r.lambda1_cube, p);
  j["upper_bound"] = rounded(r.upper_bound, p);
  j["disc_error_lambda1"] = rounded(r.disc_error_lambda1, p);
  j["disc_error_sym"] = rounded(r.disc_error_sym, p);
  j["margin"] = rounded(r.margin, p);
  return j;
}

std::string dumbbell_csv(const std::vector<DumbbellReport>& rows, int p) {
  std::ostringstream os;
  os << "epsilon,h,lambda1,lambda1_sym,mu_q_half,ratio,localization,identity_gap,upper_bound,"
        "disc_error_lambda1,disc_error_sym\n";
  for (const auto& r : rows) {
    os << num(r.epsilon, p) << ',' << num(r.h, p) << ',' << num(r.lambda1, p) << ','
       << num(r.lambda1_sym, p) << ',' << num(r.mu_q_half, p) << ',' << num(r.ratio, p) << ','
       << num(r.localization, p) << ',' << num(r.identity_gap, p) << ','
       << num(r.upper_bound, p) << ',' << num(r.disc_error_lambda1, p) << ','
       << num(r.disc_error_sym, p) << '\n';
  }
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace qspec::cli
