#pragma once

#include <utility>

#include "lcdl/model.hpp"

namespace lcdl::dictionary {

/// D = X Z^T (Z Z^T + ridge_eps I)^{-1}. Throws SingularGram when the Gram
/// matrix cannot be factored.
Matrix update_dictionary(const FeatureMatrix& samples,
                         const CodingMatrix& codes, double ridge_eps);

/// 1e-10 * trace(Z Z^T) / K.
double default_ridge(const CodingMatrix& codes);

/// Atom norms below this are reported as DegenerateAtom.
inline constexpr double kDegenerateNorm = 1e-12;

/// Divides atom k by its norm and multiplies profile row k by the same norm,
/// leaving D Z unchanged. Throws DegenerateAtom(k) for the first collapsed
/// atom.
std::pair<Matrix, CodingMatrix> normalize_atoms(const Matrix& atoms,
                                                const CodingMatrix& codes);

}  // namespace lcdl::dictionary
