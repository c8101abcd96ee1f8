#pragma once

#include "mlescape/field_io.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

namespace mlescape {

/// Values mapped linearly onto [lo, hi]; outside values are clamped.
struct ColorScale {
    double lo = 0.0;
    double hi = 1.0;
};

/// Diverging cool-warm map: blue at 0, light grey at 0.5, red at 1.
std::array<std::uint8_t, 3> coolwarm(double t);

/// Raster of nx by ny cells, `values[j * nx + i]` with j = 0 the bottom row,
/// each cell drawn as a `cell_px` square. NaN cells are drawn black. Throws IoError.
void write_heatmap_png(const std::filesystem::path& file, std::span<const double> values, int nx, int ny,
                       ColorScale scale, int cell_px = 2);

/// Field CSV rendering: v to the right, w upwards.
void write_field_png(const std::filesystem::path& file, const FieldTable& field, ColorScale scale, int cell_px = 2);

} // namespace mlescape
