#pragma once

#include <filesystem>
#include <string>

#include "tvjump/grid.hpp"

namespace tvjump::io {

enum class PgmEncoding { Ascii /* P2 */, Binary /* P5 */ };

/// Value range that the PGM grey levels map onto linearly. Stored in a
/// sidecar "<file>.json" next to the image as {"min": .., "max": .., "spacing": ..}.
struct PgmRange {
  double min = 0.0;
  double max = 1.0;
};

std::filesystem::path sidecar_path(const std::filesystem::path& image);

/// Writes `img` as PGM and its sidecar. maxval is 255 or 65535. Values are
/// mapped from `range` onto [0, maxval] and clamped.
void write_pgm(const std::filesystem::path& path, const GridImage& img, const PgmRange& range,
               int maxval = 65535, PgmEncoding encoding = PgmEncoding::Binary);

/// Writes with the range taken from the image itself (constant images get [v, v+1]).
void write_pgm(const std::filesystem::path& path, const GridImage& img, int maxval = 65535,
               PgmEncoding encoding = PgmEncoding::Binary);

/// Reads P2 or P5. Without a sidecar the range defaults to [0,1] and the
/// spacing to 1/width.
GridImage read_pgm(const std::filesystem::path& path);

/// One row per grid row, comma separated decimal floats (17 significant digits).
void write_csv(const std::filesystem::path& path, const GridImage& img);
GridImage read_csv(const std::filesystem::path& path, double spacing = 0.0);

/// Dispatches on the extension (.pgm or .csv).
GridImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const GridImage& img);

}  // namespace tvjump::io
