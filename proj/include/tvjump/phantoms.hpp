#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvjump/grid.hpp"

namespace tvjump {

enum class PhantomKind { HalfPlane, Square, Disk, Checkerboard, SmoothBump, Nested };
enum class NoiseKind { None, Uniform, Gaussian };

/// Closed-form test images on the unit square, sampled at cell centres with
/// no anti-aliasing.
///
///   half-plane    high where y > level
///   square        high on |x - cx| < side/2, |y - cy| < side/2
///   disk          high on |x - centre| < radius
///   checkerboard  cells x cells tiles, high on tiles with even i + j
///   smooth bump   low + (high - low) exp(-|x - centre|^2 / (2 width^2))
///   nested        sum over k of step * [|x - centre|_inf < side/2 - k spacing_between],
///                 `levels` concentric squares
///
/// Noise is added afterwards: uniform on [-sigma, sigma] or Gaussian with
/// standard deviation sigma, from a mt19937_64 seeded with `seed`.
struct PhantomSpec {
  PhantomKind kind = PhantomKind::Disk;
  std::size_t size = 256;
  double low = 0.0;
  double high = 1.0;
  Vec2 centre{0.5, 0.5};
  double radius = 0.25;  ///< disk
  double side = 0.5;     ///< square, outermost nested square
  double level = 0.5;    ///< half-plane
  std::size_t cells = 4; ///< checkerboard
  double width = 0.15;   ///< smooth bump
  std::size_t levels = 3;
  double step = 1.0;     ///< nested height increment
  double gap = 0.1;      ///< nested distance between consecutive boundaries
  NoiseKind noise = NoiseKind::None;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

PhantomKind phantom_kind_from_string(const std::string& name);
std::string to_string(PhantomKind kind);
NoiseKind noise_kind_from_string(const std::string& name);
std::string to_string(NoiseKind kind);

GridImage generate_phantom(const PhantomSpec& spec);

/// Default-parameter phantom of the named kind ("half-plane", "square",
/// "disk", "checkerboard", "smooth-bump", "nested"); a kind with the suffix
/// "-noisy" adds Gaussian noise of standard deviation 0.1 drawn with `seed`.
GridImage generate_phantom(const std::string& kind, std::size_t size, std::uint64_t seed);

/// Sets and heights of the nested phantom: u = sum heights[k] * 1_{sets[k]}.
struct NestedDecomposition {
  std::vector<Mask> sets;
  std::vector<double> heights;
};
NestedDecomposition nested_decomposition(const PhantomSpec& spec);

}  // namespace tvjump
