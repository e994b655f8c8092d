#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qspec {

enum class ProfileKind { ball, interval };

/// Radial samples of a solution of the Lane-Emden ODE.
///
/// For `ProfileKind::ball` the abscissa is the radius and the profile
/// represents u(|x|) on B_R. For `ProfileKind::interval` the abscissa is the
/// coordinate x on (0, L) and the samples are the function itself.
struct RadialProfile {
  ProfileKind kind = ProfileKind::ball;
  int N = 1;
  double q = 2.0;
  double amplitude = 1.0;  ///< u at the first sample
  std::vector<double> rho;
  std::vector<double> u;
  std::vector<double> uprime;
  std::vector<double> zeros;  ///< interior sign changes, strictly increasing
  double lq_mass = 0.0;  ///< integral of |u|^q over the sampled region
  double dirichlet_energy = 0.0;  ///< integral of |u'|^2 over the sampled region
  double max_residual = 0.0;  ///< scaled ODE residual over the samples
  int tangential_touches = 0;  ///< |u| < 1e-13 without crossing

  std::size_t size() const noexcept { return rho.size(); }
};

/// Values on the lattice {(i h, j h)} restricted to a raster mask.
///
/// Node (ix, iy) of the bounding box sits at ((i0 + ix) h, (j0 + iy) h).
/// Nodes outside the mask carry value 0 (homogeneous Dirichlet data). The
/// box always has at least one exterior node on each side of the mask.
/// `dim == 1` means a single row with neighbours only along x.
struct GridField {
  int dim = 2;
  double h = 0.0;
  /// Reflection (natural) condition across x1 = 0: the column at x1 = 0 is
  /// the mirror line and carries half weight.
  bool mirror_x1 = false;
  int i0 = 0;
  int j0 = 0;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> mask;
  std::vector<double> values;

  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(ix);
  }
  bool inside(int ix, int iy) const noexcept {
    return ix >= 0 && iy >= 0 && ix < nx && iy < ny && mask[index(ix, iy)] != 0;
  }
  double x(int ix) const noexcept { return (i0 + ix) * h; }
  double y(int iy) const noexcept { return (j0 + iy) * h; }
  std::size_t interior_count() const noexcept;
  /// Measure of a lattice cell: h^dim.
  double cell_measure() const noexcept;
};

}  // namespace qspec
