#include "tvjump/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tvjump::io {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path sidecar_path(const fs::path& image) {
  fs::path p = image;
  p += ".json";
  return p;
}

void write_pgm(const fs::path& path, const GridImage& img, const PgmRange& range, int maxval,
               PgmEncoding encoding) {
  if (maxval != 255 && maxval != 65535) throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
  if (!(range.max > range.min)) throw std::invalid_argument("write_pgm: empty value range");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
  out << (encoding == PgmEncoding::Binary ? "P5" : "P2") << "\n"
      << img.width() << " " << img.height() << "\n"
      << maxval << "\n";

  auto level = [&](double v) {
    double t = (v - range.min) / (range.max - range.min);
    t = std::clamp(t, 0.0, 1.0);
    return static_cast<unsigned>(std::lround(t * maxval));
  };

  for (std::size_t i = 0; i < img.height(); ++i) {
    for (std::size_t j = 0; j < img.width(); ++j) {
      unsigned q = level(img(i, j));
      if (encoding == PgmEncoding::Ascii) {
        out << q << (j + 1 == img.width() ? '\n' : ' ');
      } else if (maxval == 255) {
        out.put(static_cast<char>(q));
      } else {
        out.put(static_cast<char>(q >> 8));
        out.put(static_cast<char>(q & 0xff));
      }
    }
  }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path.string());

  json side = {{"min", range.min}, {"max", range.max}, {"spacing", img.spacing()}};
  std::ofstream sc(sidecar_path(path));
  sc << side.dump(2) << "\n";
}

void write_pgm(const fs::path& path, const GridImage& img, int maxval, PgmEncoding encoding) {
  PgmRange r{img.min(), img.max()};
  if (!(r.max > r.min)) r.max = r.min + 1.0;
  write_pgm(path, img, r, maxval, encoding);
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw std::runtime_error("read_pgm: truncated header");
  return tok;
}

}  // namespace

GridImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path.string());
  const std::string magic = header_token(in);
  if (magic != "P2" && magic != "P5") throw std::runtime_error("read_pgm: unsupported magic " + magic);
  const auto w = static_cast<std::size_t>(std::stoul(header_token(in)));
  const auto h = static_cast<std::size_t>(std::stoul(header_token(in)));
  const int maxval = std::stoi(header_token(in));
  if (maxval <= 0 || maxval > 65535) throw std::runtime_error("read_pgm: bad maxval");

  PgmRange range;
  double spacing = 1.0 / static_cast<double>(w);
  if (fs::exists(sidecar_path(path))) {
    std::ifstream sc(sidecar_path(path));
    json side = json::parse(sc);
    range.min = side.value("min", 0.0);
    range.max = side.value("max", 1.0);
    spacing = side.value("spacing", spacing);
  }

  std::vector<double> values(w * h);
  for (std::size_t k = 0; k < w * h; ++k) {
    unsigned q = 0;
    if (magic == "P2") {
      q = static_cast<unsigned>(std::stoul(header_token(in)));
    } else if (maxval < 256) {
      q = static_cast<unsigned char>(in.get());
    } else {
      unsigned hi = static_cast<unsigned char>(in.get());
      unsigned lo = static_cast<unsigned char>(in.get());
      q = (hi << 8) | lo;
    }
    if (!in) throw std::runtime_error("read_pgm: truncated pixel data");
    values[k] = range.min + (range.max - range.min) * static_cast<double>(q) / maxval;
  }
  return GridImage(w, h, spacing, std::move(values));
}

void write_csv(const fs::path& path, const GridImage& img) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  out << std::setprecision(17);
  for (std::size_t i = 0; i < img.height(); ++i) {
    for (std::size_t j = 0; j < img.width(); ++j) out << (j ? "," : "") << img(i, j);
    out << "\n";
  }
}

GridImage read_csv(const fs::path& path, double spacing) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  std::vector<double> values;
  std::size_t width = 0, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++n;
    }
    if (rows == 0) width = n;
    else if (n != width) throw std::runtime_error("read_csv: ragged row " + std::to_string(rows));
    ++rows;
  }
  if (spacing <= 0.0) spacing = width ? 1.0 / static_cast<double>(width) : 1.0;
  return GridImage(width, rows, spacing, std::move(values));
}

GridImage read_image(const fs::path& path) {
  if (path.extension() == ".csv") return read_csv(path);
  return read_pgm(path);
}

void write_image(const fs::path& path, const GridImage& img) {
  if (path.extension() == ".csv") write_csv(path, img);
  else write_pgm(path, img);
}

}  // namespace tvjump::io
