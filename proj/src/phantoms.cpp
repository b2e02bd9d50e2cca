#include "tvjump/phantoms.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tvjump {

namespace {

struct KindName {
  PhantomKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {PhantomKind::HalfPlane, "half-plane"},     {PhantomKind::Square, "square"},
    {PhantomKind::Disk, "disk"},                {PhantomKind::Checkerboard, "checkerboard"},
    {PhantomKind::SmoothBump, "smooth-bump"},   {PhantomKind::Nested, "nested"},
};

bool in_nested_square(const PhantomSpec& s, const Vec2& x, std::size_t k) {
  const double half = 0.5 * s.side - static_cast<double>(k) * s.gap;
  return std::max(std::abs(x.x() - s.centre.x()), std::abs(x.y() - s.centre.y())) < half;
}

}  // namespace

void PhantomSpec::validate() const {
  if (size == 0) throw std::invalid_argument("phantom: size must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("phantom: noise sigma must be nonnegative");
  switch (kind) {
    case PhantomKind::Disk:
      if (!(radius > 0.0)) throw std::invalid_argument("phantom: disk radius must be positive");
      break;
    case PhantomKind::Square:
      if (!(side > 0.0)) throw std::invalid_argument("phantom: square side must be positive");
      break;
    case PhantomKind::Checkerboard:
      if (cells == 0) throw std::invalid_argument("phantom: checkerboard needs at least one tile");
      break;
    case PhantomKind::SmoothBump:
      if (!(width > 0.0)) throw std::invalid_argument("phantom: bump width must be positive");
      break;
    case PhantomKind::Nested:
      if (levels == 0 || !(gap > 0.0) || !(0.5 * side - static_cast<double>(levels - 1) * gap > 0.0))
        throw std::invalid_argument("phantom: nested squares do not fit");
      break;
    case PhantomKind::HalfPlane:
      break;
  }
}

PhantomKind phantom_kind_from_string(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  throw std::invalid_argument("unknown phantom kind '" + name + "'");
}

std::string to_string(PhantomKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "?";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "uniform") return NoiseKind::Uniform;
  if (name == "gaussian") return NoiseKind::Gaussian;
  throw std::invalid_argument("unknown noise kind '" + name + "'");
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Uniform: return "uniform";
    case NoiseKind::Gaussian: return "gaussian";
  }
  return "?";
}

GridImage generate_phantom(const PhantomSpec& s) {
  s.validate();
  const std::size_t n = s.size;
  GridImage img(n, n, 1.0 / static_cast<double>(n), s.low);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 x = img.cell_centre(i, j);
      double v = s.low;
      switch (s.kind) {
        case PhantomKind::HalfPlane:
          v = x.y() > s.level ? s.high : s.low;
          break;
        case PhantomKind::Square:
          v = std::abs(x.x() - s.centre.x()) < 0.5 * s.side && std::abs(x.y() - s.centre.y()) < 0.5 * s.side ? s.high
                                                                                                          : s.low;
          break;
        case PhantomKind::Disk:
          v = (x - s.centre).norm() < s.radius ? s.high : s.low;
          break;
        case PhantomKind::Checkerboard: {
          const auto c = static_cast<double>(s.cells);
          const auto ti = std::min(s.cells - 1, static_cast<std::size_t>(x.y() * c));
          const auto tj = std::min(s.cells - 1, static_cast<std::size_t>(x.x() * c));
          v = (ti + tj) % 2 == 0 ? s.high : s.low;
          break;
        }
        case PhantomKind::SmoothBump:
          v = s.low + (s.high - s.low) * std::exp(-(x - s.centre).squaredNorm() / (2.0 * s.width * s.width));
          break;
        case PhantomKind::Nested:
          for (std::size_t k = 0; k < s.levels; ++k)
            if (in_nested_square(s, x, k)) v += s.step;
          break;
      }
      img(i, j) = v;
    }
  }
  if (s.noise != NoiseKind::None && s.sigma > 0.0) {
    std::mt19937_64 rng(s.seed);
    if (s.noise == NoiseKind::Uniform) {
      std::uniform_real_distribution<double> dist(-s.sigma, s.sigma);
      for (std::size_t k = 0; k < img.size(); ++k) img[k] += dist(rng);
    } else {
      std::normal_distribution<double> dist(0.0, s.sigma);
      for (std::size_t k = 0; k < img.size(); ++k) img[k] += dist(rng);
    }
  }
  return img;
}

GridImage generate_phantom(const std::string& kind, std::size_t size, std::uint64_t seed) {
  PhantomSpec s;
  std::string base = kind;
  const std::string suffix = "-noisy";
  if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    base.resize(base.size() - suffix.size());
    s.noise = NoiseKind::Gaussian;
    s.sigma = 0.1;
  }
  s.kind = phantom_kind_from_string(base);
  s.size = size;
  s.seed = seed;
  return generate_phantom(s);
}

NestedDecomposition nested_decomposition(const PhantomSpec& s) {
  if (s.kind != PhantomKind::Nested) throw std::invalid_argument("nested_decomposition: not a nested phantom");
  s.validate();
  const double h = 1.0 / static_cast<double>(s.size);
  NestedDecomposition d;
  for (std::size_t k = 0; k < s.levels; ++k) {
    Mask m(s.size, s.size);
    for (std::size_t i = 0; i < s.size; ++i)
      for (std::size_t j = 0; j < s.size; ++j)
        m.set(i, j, in_nested_square(s, Vec2((j + 0.5) * h, (i + 0.5) * h), k));
    d.sets.push_back(std::move(m));
    d.heights.push_back(s.step);
  }
  return d;
}

}  // namespace tvjump
