#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gmt/raster.hpp"
#include "gmt/report.hpp"

namespace gmt::scenarios::detail {

ExperimentReport start_report(const std::string& id, const ParamTable& p, std::uint64_t seed);

/// Writes the raster as <out>/<name> and lists it; no-op for an empty out.
void save_pgm(ExperimentReport& report, const std::filesystem::path& out, const std::string& name,
              const raster::GridRaster& raster);

/// Independent seed for the k-th random stream of a scenario.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

/// Square grid [lo, hi]^2 from the keys box_lo, box_hi, n.
raster::GridSpec square_grid(const ParamTable& p);

/// Largest relative change between consecutive values.
double max_relative_step(const std::vector<double>& values);

}  // namespace gmt::scenarios::detail
