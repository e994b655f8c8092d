#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qspec/compose.hpp"
#include "qspec/core.hpp"
#include "qspec/grid.hpp"

namespace qspec::cli {

using Json = nlohmann::ordered_json;

/// `value` printed with `precision` significant digits.
std::string num(double value, int precision);

/// `value` rounded to `precision` significant digits, for JSON output.
double rounded(double value, int precision);

/// FNV-1a hash of the grid shape and mask, as 16 hex digits.
std::string mask_hash(const GridField& g);

Json pair_header(const QEigenpair& pair, int precision);
std::string profile_csv(const QEigenpair& pair, int precision);
Json profile_json(const QEigenpair& pair, int precision);
std::string grid_csv(const QEigenpair& pair, int precision);
Json grid_json(const QEigenpair& pair, int precision);

Json sample_json(const SpectrumSample& s, int precision);
std::string spectrum_csv(const std::vector<SpectrumSample>& samples, int precision);
Json clusters_json(const std::vector<Cluster>& clusters, int precision);

Json dumbbell_json(const DumbbellReport& r, int precision);
std::string dumbbell_csv(const std::vector<DumbbellReport>& rows, int precision);

/// Writes `text` to `path`; throws `io` when the file cannot be written.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qspec::cli
