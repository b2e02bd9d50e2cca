#pragma once

#include <functional>
#include <optional>

#include "tvjump/energies.hpp"
#include "tvjump/grid.hpp"
#include "tvjump/shift.hpp"

namespace tvjump {

/// A jump of u across a Lipschitz graph with one-sided traces given per
/// graph coordinate v: `upper` on the +z side, `lower` on the -z side.
struct GraphJump {
  LipschitzGraph graph;
  std::function<double(double)> upper;
  std::function<double(double)> lower;

  double magnitude(double v) const { return std::abs(upper(v) - lower(v)); }
};

/// A function on the unit square given by closures. Away from an optional
/// jump graph it is smooth; `gradient` may be empty, in which case central
/// differences with step 1e-6 are used.
struct FunctionalImage {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
  std::optional<GraphJump> jump;
  std::string name;

  Vec2 grad(const Vec2& x) const;
  bool analytic_gradient() const { return static_cast<bool>(gradient); }
  /// Max |analytic gradient - central differences| over `samples` seeded
  /// random points of the unit square, skipping points within 1e-4 of the
  /// jump graph. Zero when the gradient is not analytic.
  double gradient_consistency(std::size_t samples = 100, std::uint64_t seed = 1) const;
};

/// amplitude * exp(-|x - centre|^2 / (2 width^2)) + offset.
FunctionalImage gaussian_image(const Vec2& centre, double width, double amplitude = 1.0, double offset = 0.0);
/// offset + <slope, x>.
FunctionalImage linear_image(const Vec2& slope, double offset = 0.0);
/// `above` on the +z side of the graph, `below` on the other, plus an optional
/// smooth background added on both sides.
FunctionalImage graph_jump_image(const LipschitzGraph& graph, double above, double below,
                                 const std::optional<FunctionalImage>& background = std::nullopt);
/// `inside` on the disk, `outside` elsewhere; the jump is described by the
/// upper arc of the circle over centre.x +- half_width.
FunctionalImage disk_jump_image(const Vec2& centre, double radius, double inside, double outside, double half_width);

/// Samples the function at the cell centres.
GridImage rasterise(const FunctionalImage& u, std::size_t n);

/// u_gamma = u o gamma^{-1} on the grid. Since gamma moves points only along z,
/// bilinear sampling at gamma^{-1}(cell centre) is linear interpolation along
/// the z axis whenever z is a grid axis.
GridImage pushforward_grid(const GridImage& u, const ShiftTransform& tr);

struct QuadratureSpec {
  std::size_t nodes = 512;  ///< midpoint nodes per axis of the support box
  bool richardson = true;   ///< repeat at nodes / 2 and report the difference
};

struct TvPushforward {
  double outside = 0.0;  ///< |Du|(Omega \ U_r) by midpoint quadrature on the unit square
  double inside = 0.0;   ///< integral over U_r of |W^T grad u|
  double total() const { return outside + inside; }
};

/// Absolutely continuous variation of u_gamma for smooth u. The integrand is
/// |W(x)^T grad u(x)|, the chain rule for grad(u o gamma^{-1}) after the
/// change of variables y = gamma(x). Throws if u carries a jump or U_r leaves
/// the unit square.
TvPushforward tv_pushforward_quadrature(const FunctionalImage& u, const ShiftTransform& tr,
                                        const QuadratureSpec& quad = {});

struct RegulariserChange {
  double smooth = 0.0;    ///< change of alpha int psi(|grad|)
  double singular = 0.0;  ///< change of alpha psi_inf int lambda dH^1 on the jump
  double total() const { return smooth + singular; }
};

/// R(u_gamma) - R(u) for a convex regulariser, computed as an integral of
/// pointwise differences over U_r plus the exact change of the weighted jump
/// length. A jump of u must lie on the transform's graph.
RegulariserChange regulariser_change(const FunctionalImage& u, const ShiftTransform& tr, const RegulariserSpec& reg,
                                     const QuadratureSpec& quad = {});

struct DoubleLipGap {
  double lhs = 0.0;  ///< R(u_g1) + R(u_g2) - 2 R(u)
  double lhs_smooth = 0.0;
  double lhs_singular = 0.0;
  double variation = 0.0;  ///< |Du|(closure of U_r)
  ComparisonConstants constants;
  double g_bound = 0.0;  ///< alpha G |Du|
  double t_bound = 0.0;  ///< alpha T |Du|
  double g_ratio = 0.0;  ///< lhs / g_bound (0 when both vanish)
  double t_ratio = 0.0;
  double richardson_delta = 0.0;  ///< |lhs(nodes) - lhs(nodes / 2)|
  bool violation = false;         ///< lhs > g_bound (1 + 1e-6) for TV, lhs > t_bound otherwise
};

/// Two-sided comparison of R under the pair (t1, t2), which must share their
/// graph, centre and radius. Smooth parts use the quadrature path; the jump
/// part is the exact difference of weighted graph lengths.
DoubleLipGap double_lip_gap(const FunctionalImage& u, const ShiftTransform& t1, const ShiftTransform& t2,
                            const RegulariserSpec& reg, const QuadratureSpec& quad = {},
                            std::size_t constant_density = 64);

/// |Du|(closure of U_r): smooth variation over the box plus the weighted jump length.
double variation_on_support(const FunctionalImage& u, const ShiftTransform& tr, std::size_t nodes = 512);

struct TransportCheck {
  double integral = 0.0;  ///< sum |u(gamma(x)) - u(x)| h^2
  double bound = 0.0;     ///< M_gamma |Du|(U_r) on the grid
  double ratio() const { return bound > 0.0 ? integral / bound : (integral > 0.0 ? INFINITY : 0.0); }
};

TransportCheck transport_check(const GridImage& u, const ShiftTransform& tr);

/// Cells whose centre lies in the support box of the transform.
Mask support_mask(const GridImage& u, const ShiftTransform& tr);

struct WedgeArea {
  double analytic = 0.0;
  double pixel_count = 0.0;
};

/// Area between the graph and its shifted image: |rho| r^2 int bump
/// analytically, and a raster count over the bounding box of the wedge
/// (pixels whose side of the graph differs from the side of gamma^{-1}(pixel)).
WedgeArea wedge_area(const ShiftTransform& tr, std::size_t raster = 512);

/// int_{-1}^{1} bump by Gauss-Legendre panels split at 0.
double bump_integral(const Bump& bump);

/// int_V lambda(v) sqrt(1 + (f' + rho h_r')^2) dv over the graph domain; the
/// perturbation is taken from `shift` when given. Composite Gauss-Legendre
/// with breakpoints at the bump centre and support ends.
double weighted_graph_area(const LipschitzGraph& graph, const std::function<double(double)>& lambda,
                           const ShiftTransform* shift = nullptr, std::size_t panels = 64);

}  // namespace tvjump
