#pragma once

#include <cstdint>
#include <vector>

#include "tvjump/energies.hpp"
#include "tvjump/grid.hpp"

namespace tvjump {

/// Parameters of the first-order primal-dual iteration.
///
/// Step sizes are in the units of the discrete gradient (which carries 1/h),
/// so tau * sigma * 8 / h^2 <= 1 is required (32 / h^2 for the symmetric
/// stencil). Zero steps pick defaults
/// with tau * sigma * 8 / h^2 = 1.
struct SolverConfig {
  std::size_t max_iterations = 20000;
  double tau = 0.0;
  double sigma = 0.0;
  /// Relative primal-dual gap target; relative objective change when the
  /// gap is not computable.
  double tolerance = 1e-8;
  /// Strong-convexity step adaptation for p = 2.
  bool accelerate = true;
  /// Relaxation factor in [1, 2) for the non-accelerated iteration.
  double over_relaxation = 1.0;
  /// Draw the relaxation factor uniformly from [1, over_relaxation] per iteration.
  bool randomized_relaxation = false;
  std::uint64_t seed = 0;
  std::size_t check_every = 10;
  /// Iterations between objective samples compared in the fallback criterion.
  std::size_t stall_window = 50;

  /// `blocks` is the number of stacked gradients (4 for the symmetric stencil).
  void validate(double spacing, std::size_t blocks = 1) const;
};

struct SolveResult {
  GridImage solution;
  /// Primal objective (h^2-scaled) at every convergence check.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = false;
  /// Final relative gap (or relative objective change).
  double residual = 0.0;
  double objective = 0.0;
  /// Absolute h^2-scaled duality gap; NaN when not computable.
  double gap = 0.0;
};

/// argmin_u tau * weight * |u - f|^p + (u - v)^2 / 2, closed form for
/// p in {1, 2}, safeguarded Newton otherwise. At the L1 kink (v == f) the
/// result is f.
double prox_fidelity(const FidelitySpec& fid, double tau, double f, double v);

/// prox of sigma F^* for F(q) = alpha psi(|q|) on one cell's dual vector.
/// TV: projection onto the alpha-ball. Huber: shrink by 1/(1 + sigma/(alpha eta))
/// then project. Other convex energies: Moreau identity with a 1-D radial prox.
Vec2 prox_dual_regulariser(const RegulariserSpec& reg, double sigma, const Vec2& p);

/// Radial prox used for generic energies: argmin_r>=0 lambda psi(r) + (r - z)^2 / 2.
double radial_prox(const EnergyPsi& psi, double lambda, double z);

/// sum phi(f - u) h^2 + R(u).
double objective_value(const GridImage& u, const GridImage& f, const FidelitySpec& fid,
                       const RegulariserSpec& reg);

/// Approximate minimiser of sum phi(f - u) + R(u) by the primal-dual method.
/// Non-convergence within max_iterations is reported through the flag.
SolveResult solve_denoise(const GridImage& f, const FidelitySpec& fid, const RegulariserSpec& reg,
                          const SolverConfig& cfg = {});

/// Reference solve for small grids (<= 32x32): same iteration with a very
/// small primal step, relative gap target 1e-10 and a large budget. `converged == false` means the
/// target was not reached.
SolveResult oracle_solve(const GridImage& f, const FidelitySpec& fid, const RegulariserSpec& reg);

}  // namespace tvjump
