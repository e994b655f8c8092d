#pragma once

#include <string>
#include <vector>

namespace qspec::cli {

/// u against the abscissa, with circles at the zeros.
std::string profile_svg(const std::vector<double>& x, const std::vector<double>& u,
                        const std::vector<double>& zeros, const std::string& title);

/// Rug of values; cluster points drawn as highlighted markers.
std::string spectrum_svg(const std::vector<double>& values,
                         const std::vector<double>& cluster_points, const std::string& title);

/// y against a swept parameter.
std::string sweep_svg(const std::vector<double>& x, const std::vector<double>& y,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::string& title);

}  // namespace qspec::cli
