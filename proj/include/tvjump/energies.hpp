#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvjump/grid.hpp"

namespace tvjump {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Power fidelity phi(t) = weight |t|^p. The increase constant C_phi makes
/// phi p-increasing: phi(x) - phi(y) <= C_phi (|x| - |y|) |x|^(p-1).
struct FidelitySpec {
  double p = 2.0;
  double weight = 1.0;
  double increase_constant = 2.0;

  /// weight |t|^p with the tight constant C_phi = p * weight.
  static FidelitySpec power(double p, double weight = 1.0);
  void validate() const;
};

double phi_value(const FidelitySpec& spec, double t);

struct SamplePair {
  double x = 0.0;
  double y = 0.0;
};

/// Pairs violating the p-increase inequality by more than 1e-12.
std::vector<SamplePair> check_p_increasing(const FidelitySpec& spec, std::span<const SamplePair> samples);

/// A regulariser energy psi on [0, inf) with psi(0) = 0.
///
/// Members of the Psi family are increasing, convex, with finite positive
/// asymptotic slope psi_inf and the limited co-coercivity bound
///   <dpsi(t) - dpsi(s), t - s> <= 0                 if min(s,t) >= K_psi,
///                               <= C_psi |t - s|^2  otherwise.
/// Subgradients are returned as closed intervals; on [0, inf) the left end of
/// the interval at 0 is taken from the even extension psi(|t|).
struct EnergyPsi {
  std::string name;
  double parameter = 0.0;  ///< e.g. eta for Huber; used for serialisation
  std::function<double(double)> value;
  std::function<Interval(double)> subgradient;
  /// psi^*(s) for s >= 0, +inf outside the domain. Empty when unknown.
  std::function<double(double)> conjugate;
  double asymptote = 0.0;   ///< psi_inf
  double threshold = 0.0;   ///< K_psi
  double coco_bound = 0.0;  ///< C_psi
  double slope_at_zero = 0.0;
  bool convex = true;
  bool psi_member = false;

  double operator()(double t) const { return value(t); }
};

/// Huber energy: t - 1/(2 eta) for t >= 1/eta, (eta/2) t^2 below.
/// Psi member with (K_psi, C_psi) = (1/eta, eta) and psi_inf = 1.
EnergyPsi huber_psi(double eta);

/// psi(t) = t, i.e. plain TV written as an energy.
EnergyPsi linear_psi();

/// psi(t) = t^2: convex, no linear tail. `claimed_threshold` and
/// `claimed_bound` are the (K, C) to test it against; it is not a Psi member.
EnergyPsi square_psi(double claimed_threshold, double claimed_bound);

/// Concave, increasing psi(t) = eps t + (1 - exp(-t)) with eps = 0.1, so
/// psi^0 = 1.1 and psi_inf = 0.1.
EnergyPsi concave_psi_example(double eps = 0.1);

/// psi(t) = log(1 + t^2).
EnergyPsi perona_malik_psi();

struct PsiSamplePair {
  double s = 0.0;
  double t = 0.0;
};

/// Pairs where some selection of subgradients breaks the co-coercivity bound
/// by more than 1e-12. Requires psi.threshold > 0 and psi.coco_bound > 0.
std::vector<PsiSamplePair> check_psi_membership(const EnergyPsi& psi, std::span<const PsiSamplePair> samples);

/// alpha * sum_cells psi(|grad u|) h^2. Grid functions carry no separate
/// singular part; jump-scale gradients sit on the linear tail of psi.
double tv_psi_value(const GridImage& u, const EnergyPsi& psi, double alpha,
                    DiffStencil stencil = DiffStencil::Forward);

/// Terms of the two-sided energy estimate for the pair (cA, dB).
struct EnergyPairGap {
  double lhs = 0.0;           ///< c psi(|Av|) + d psi(|Bv|) - 2 psi(|v|)
  double g_tilde = 0.0;       ///< sup_{|w|=1} |cAw| + |dBw| - 2
  double g_tilde_upper = 0.0; ///< 1/2 |(cA)^T cA + (dB)^T dB - 2I|
  double j_tilde = 0.0;       ///< |c + d - 2|
  double d_a = 0.0;           ///< |A - I|
  double d_b = 0.0;           ///< |B - I|
  double v_norm = 0.0;

  double rhs_sum() const { return g_tilde + j_tilde + d_a * d_a + d_b * d_b; }
};

EnergyPairGap energy_pair_gap(const EnergyPsi& psi, const Mat2& a, const Mat2& b, double c, double d,
                              const Vec2& v);

/// |c^2 A^T A + d^2 B^T B - 2I| |v|, the log-energy comparison bound.
double perona_malik_bound(const Mat2& a, const Mat2& b, double c, double d, const Vec2& v);

struct RegulariserSpec {
  enum class Kind { TV, Psi };
  Kind kind = Kind::TV;
  double alpha = 1.0;
  EnergyPsi psi;  ///< used when kind == Psi
  DiffStencil stencil = DiffStencil::Forward;

  static RegulariserSpec tv(double alpha);
  static RegulariserSpec huber(double alpha, double eta);
  static RegulariserSpec with_psi(double alpha, EnergyPsi psi);

  /// Energy applied to |grad u| (linear_psi for TV).
  const EnergyPsi& energy() const;
  /// Slope of the energy on jumps: alpha * psi_inf (alpha for TV).
  double singular_weight() const;
  void validate() const;
};

/// R(u) on the grid.
double regulariser_value(const GridImage& u, const RegulariserSpec& reg);

/// {"fidelity":{"p":2,"weight":0.5},"regulariser":{"kind":"huber","eta":0.01,"alpha":0.1}}
nlohmann::json to_json(const FidelitySpec& fid, const RegulariserSpec& reg);
std::pair<FidelitySpec, RegulariserSpec> specs_from_json(const nlohmann::json& j);

}  // namespace tvjump
