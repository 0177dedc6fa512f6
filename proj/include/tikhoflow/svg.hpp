#ifndef TIKHOFLOW_SVG_HPP
#define TIKHOFLOW_SVG_HPP

#include "tikhoflow/csv.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tikhoflow::svg {

struct PlotSpec {
  std::string x_column = "t";
  std::vector<std::string> y_columns;
  bool loglog = true;
  /// Dashed power-law guides, one per slope, anchored on the first y series.
  std::vector<double> reference_slopes;
  std::string title;
};

/// Self-contained SVG: axes with decade ticks, one polyline per y column,
/// dashed t^slope guide lines with annotated exponents. Byte-deterministic
/// for fixed input. Points with nonpositive coordinates are dropped in
/// log-log mode; fewer than 2 drawable points raise EmptyData.
void render_svg(const std::filesystem::path& path, const csv::Table& table,
                const PlotSpec& spec);

} // namespace tikhoflow::svg

#endif
