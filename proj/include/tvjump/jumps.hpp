#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tvjump/energies.hpp"
#include "tvjump/grid.hpp"
#include "tvjump/pushforward.hpp"

namespace tvjump {

/// A detected jump across one between-cell edge. `normal` points from the
/// `lower` side to the `upper` side (upper/lower refer to the axis direction,
/// not to the values).
struct JumpSample {
  Vec2 location;
  Vec2 normal;
  double upper = 0.0;  ///< mean on the side the normal points to
  double lower = 0.0;
  double magnitude = 0.0;
  std::size_t row = 0;  ///< cell on the lower side
  std::size_t col = 0;
  bool vertical_edge = true;  ///< edge between (row, col) and (row, col + 1)
};

struct JumpSet {
  std::vector<JumpSample> samples;
  double spacing = 1.0;
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct JumpDetection {
  std::size_t window = 3;
  /// Minimum jump; 0 selects 0.25 (max u - min u) for the image analysed.
  double threshold = 0.0;
};

/// One-sided means over `window` cells on either side of every edge, clipped
/// at the border. An edge is a jump when the means differ by more than the
/// threshold while each side varies by less than half of it.
JumpSet detect_jumps(const GridImage& u, const JumpDetection& params = {});

/// Default threshold used by detect_jumps for an image: 0.25 (max - min).
double default_jump_threshold(const GridImage& u);

/// Share of Ju samples (by edge length) farther than `dilation` cells from
/// every sample of Jf. Both sets must come from the same grid.
double containment_excess(const JumpSet& ju, const JumpSet& jf, double dilation = 1.0);

/// Level lines of u through bilinear interpolation between cell centres,
/// joined into polylines (closed ones repeat their first point at the end).
std::vector<std::vector<Vec2>> extract_contours(const GridImage& u, double level);

struct CircleFit {
  Vec2 centre{0.0, 0.0};
  double radius = 0.0;
  double curvature = 0.0;  ///< 1 / radius, 0 for collinear points
  double rms_residual = 0.0;
};

/// Algebraic (Pratt-normalised) circle fit; collinear points give curvature 0.
/// Needs at least three points.
CircleFit fit_circle(std::span<const Vec2> points);

struct CurvatureReport {
  std::vector<Vec2> points;
  std::vector<double> curvature;  ///< unsigned, from a circle fit per window
  std::vector<double> residuals;
  /// Radius of the circle fitted to the selected points (or all points).
  double fitted_radius = 0.0;
  Vec2 fitted_centre{0.0, 0.0};
  double fit_residual = 0.0;
};

/// Marching-squares contour of u at `level` with a circle fit over
/// 2 * half_window + 1 consecutive points at every point. When `region`
/// is given only the longest contour's points inside it are used for the
/// overall fit. Throws on an empty level line.
CurvatureReport level_line_curvature(const GridImage& u, double level, std::size_t half_window = 7,
                                     const std::optional<std::pair<Vec2, Vec2>>& region = std::nullopt);

struct CornerFit {
  /// Radius of the circle tangent to both edges, fitted to the arc points.
  double radius = 0.0;
  Vec2 centre{0.0, 0.0};
  /// Edge lines x = edges.x() and y = edges.y() (medians of the straight parts).
  Vec2 edges{0.0, 0.0};
  /// Unconstrained circle through the same arc points.
  CircleFit free_circle;
  std::size_t points = 0;
  std::size_t iterations = 0;
  double rms_residual = 0.0;
};

/// Radius of the rounded corner of an axis-aligned level line near `corner`,
/// where the two edges leave the corner towards `inward` (a diagonal such as
/// (1, 1) for the lower-left corner). The edges are located from contour
/// points between search_radius / 2 and search_radius along each edge; the
/// circle tangent to both is then fitted to the points lying in the quadrant
/// facing the corner as seen from its centre, reselecting until stable.
/// search_radius should exceed twice the expected radius.
CornerFit corner_radius(const GridImage& u, double level, const Vec2& corner, const Vec2& inward, double search_radius);

/// -(q_{i+1/2} - q_{i-1/2}) / dx with q = f' / sqrt(1 + f'^2) from forward
/// differences; one value per interior sample (size n - 2).
std::vector<double> mean_curvature_of_graph(std::span<const double> f, double spacing);

struct RCurvature {
  double estimate = 0.0;  ///< central stencil in rho
  double forward = 0.0;   ///< (R(u_rho) - R(u)) / (rho I_r)
  double backward = 0.0;  ///< (R(u) - R(u_-rho)) / (rho I_r)
  double bump_mass = 0.0; ///< I_r = int h_r
  double rho = 0.0;
  double radius = 0.0;
};

/// Finite-difference R-curvature of u at the graph point over `centre_v`.
RCurvature r_curvature_estimate(const FunctionalImage& u, const LipschitzGraph& graph, double centre_v,
                                const Bump& bump, double radius, double rho, const RegulariserSpec& reg,
                                const QuadratureSpec& quad = {});

}  // namespace tvjump
