#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tvjump/grid.hpp"

namespace tvjump {

/// A Lipschitz graph Gamma = { v e + f(v) z : v in V } in the plane.
///
/// z is the unit normal axis and e = (z_y, -z_x) spans its orthogonal
/// complement, so a point x has graph coordinates (v, t) = (<x, e>, <x, z>).
/// The domain V is the interval centre_v +- domain_radius.
struct LipschitzGraph {
  Vec2 normal{0.0, 1.0};
  std::function<double(double)> height;
  /// Optional analytic f'; central differences with step 1e-6 otherwise.
  std::function<double(double)> slope;
  double lipschitz = 0.0;
  double centre_v = 0.5;
  double domain_radius = 0.5;
  std::string name;

  Vec2 tangent() const { return {normal.y(), -normal.x()}; }
  double derivative(double v) const;
  /// (v, t) of a world point.
  Vec2 coords(const Vec2& x) const { return {x.dot(tangent()), x.dot(normal)}; }
  Vec2 from_coords(double v, double t) const { return v * tangent() + t * normal; }
  Vec2 point(double v) const { return from_coords(v, height(v)); }
  bool in_domain(double v) const { return std::abs(v - centre_v) <= domain_radius; }

  void validate() const;
};

/// Horizontal line t = level over the whole unit interval (z = (0, 1)).
LipschitzGraph flat_graph(double level = 0.5);

/// Upper arc of the circle |x - centre| = radius, as a graph over the
/// horizontal axis on centre.x +- half_width (half_width < radius).
LipschitzGraph circle_arc_graph(const Vec2& centre, double radius, double half_width);

/// Largest difference quotient of the height over `samples` evenly spaced
/// points of V (all pairs of neighbours and a strided subset of far pairs).
double sampled_lipschitz(const LipschitzGraph& graph, std::size_t samples = 2001);

/// Bump profile on the unit interval of z-perp, zero outside, |bump| <= 1.
struct Bump {
  std::function<double(double)> value;
  /// Optional analytic derivative; central differences with step 1e-6 otherwise.
  std::function<double(double)> slope;
  double sup = 1.0;  ///< sup |bump|
  std::string name;

  double derivative(double v) const;
};

/// max(0, 1 - |v|).
double standard_bump(double v);
Bump standard_bump_profile();

/// The Lipschitz shift of a graph: moves points near Gamma along z by
/// rho h_r(v) on Gamma, tapering linearly to zero at distance s = 3r.
///
/// h_r(v) = r bump((v - v0) / r). The transform is the identity outside
/// U_r = { |v - v0| < r, |t - f(v0)| < (3 + Lip) r }.
class ShiftTransform {
public:
  ShiftTransform(LipschitzGraph graph, double centre_v, double radius, double magnitude,
                 Bump bump = standard_bump_profile());

  const LipschitzGraph& graph() const { return graph_; }
  const Bump& bump() const { return bump_; }
  double centre_v() const { return v0_; }
  Vec2 centre() const { return graph_.point(v0_); }
  double radius() const { return r_; }
  double magnitude() const { return rho_; }
  double taper() const { return 3.0 * r_; }

  /// Displacement on the graph, rho h_r(v).
  double shift(double v) const;
  double shift_slope(double v) const;

  /// Half height of U_r along z, (3 + Lip) r.
  double box_half_height() const { return (3.0 + graph_.lipschitz) * r_; }
  bool in_support_box(const Vec2& x) const;

  /// Same transform with magnitude -rho (or any other magnitude).
  ShiftTransform with_magnitude(double magnitude) const;

private:
  LipschitzGraph graph_;
  Bump bump_;
  double v0_;
  double r_;
  double rho_;
};

/// Local derivative data of the transform in graph coordinates:
/// grad = [[1, 0], [c, d]] acting on (v, t).
struct ShiftJet {
  enum class Branch { Identity, Lower, Upper };
  Branch branch = Branch::Identity;
  double c = 0.0;
  double d = 1.0;
};

/// Lower branch is f - s <= t <= f (interfaces included), upper is f < t < f + s.
ShiftJet shift_jet(const ShiftTransform& tr, const Vec2& x);

/// The same from column data: offset delta = t - f(v), taper s, shift h and
/// its slope, graph slope f'. Callers guarantee |v - v0| < r.
ShiftJet shift_jet(double delta, double s, double h, double h_slope, double f_slope);

Vec2 gamma_apply(const ShiftTransform& tr, const Vec2& x);
Vec2 gamma_inverse(const ShiftTransform& tr, const Vec2& y);
Mat2 gamma_grad(const ShiftTransform& tr, const Vec2& x);
/// (grad gamma(x))^{-1}, i.e. the gradient of the inverse at gamma(x).
Mat2 inverse_grad(const ShiftTransform& tr, const Vec2& x);
double jacobian_det(const ShiftTransform& tr, const Vec2& x);
/// W(x) = (grad gamma(x))^{-1} J(x), local block [[d, 0], [-c, 1]].
Mat2 lipjac_matrix(const ShiftTransform& tr, const Vec2& x);

struct EigenPair {
  double small = 1.0;
  double large = 1.0;
};

/// Eigenvalues of the Gram matrix of [[1, 0], [c, d]] in closed form.
EigenPair eigenvalues_gradgram(double c, double d);

struct ComparisonConstants {
  double g = 0.0;        ///< sup_x sup_|w|=1 |W1 w| + |W2 w| - 2
  double g_upper = 0.0;  ///< sup_x of the square-root concavity bound 1/2 |W1^T W1 + W2^T W2 - 2I|
  double j = 0.0;        ///< sup_x |J1 + J2 - 2|
  double d1 = 0.0;       ///< sup_x |(grad gamma1)^{-1} - I|
  double d2 = 0.0;
  std::size_t samples = 0;

  double total() const { return g + j + d1 * d1 + d2 * d2; }
};

/// Suprema over a stratified sample of both support boxes: `density` points
/// per axis, plus rows on the branch interfaces and columns near the bump
/// centre (kinks of the standard bump are avoided by a 1e-4 r belt).
ComparisonConstants comparison_constants(const ShiftTransform& t1, const ShiftTransform& t2,
                                         std::size_t density = 64);

struct SweepRow {
  double rho = 0.0;
  ComparisonConstants pair;      ///< (gamma_rho, gamma_-rho)
  ComparisonConstants identity;  ///< (gamma_rho, identity)
};

struct ScalingSweep {
  std::vector<SweepRow> rows;
  double pair_slope = 0.0;
  double identity_slope = 0.0;
};

/// Least-squares slope of log y against log x over the positive entries.
/// Throws when fewer than three points remain.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Constants for every rho (nonnegative, ascending) and the fitted slopes of
/// log T against log rho for both pairs.
ScalingSweep scaling_sweep(const LipschitzGraph& graph, double centre_v, double radius, const Bump& bump,
                           const std::vector<double>& rhos, std::size_t density = 64);

/// |rho| r sup|bump|.
double max_displacement(const ShiftTransform& tr);
/// max |gamma(x) - x| over a density x density sample of the support box,
/// with the graph line and the bump centre included.
double sampled_displacement(const ShiftTransform& tr, std::size_t density = 401);

}  // namespace tvjump
