#pragma once

#include "tvjump/grid.hpp"

namespace tvjump {

/// Operator 2-norm of a 2x2 matrix (closed form through the eigenvalues of M^T M).
double spectral_norm(const Mat2& m);

/// sup over unit w of |W1 w| + |W2 w| - 2, by a dense angular scan refined
/// with golden-section search. Accurate to ~1e-13 for well-scaled inputs.
double sup_pair_excess(const Mat2& w1, const Mat2& w2);

/// Upper bound 1/2 |W1^T W1 + W2^T W2 - 2I| for sup_pair_excess, from the
/// concavity of the square root.
double biestim_upper(const Mat2& w1, const Mat2& w2);

}  // namespace tvjump
