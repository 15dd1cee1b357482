#include "lcdl/dictionary.hpp"

#include <cmath>
#include <string>

#include "lcdl/linalg.hpp"

namespace lcdl::dictionary {

Matrix update_dictionary(const FeatureMatrix& samples,
                         const CodingMatrix& codes, double ridge_eps) {
  if (samples.cols() != codes.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(samples.cols()) + " samples but " +
                    std::to_string(codes.cols()) + " code columns");
  }
  if (!(ridge_eps >= 0.0) || !std::isfinite(ridge_eps)) {
    throw Error(ErrorCode::InvalidParameter, "ridge_eps must be nonnegative");
  }
  Matrix gram = codes * codes.transpose();
  gram.diagonal().array() += ridge_eps;
  const linalg::SpdFactor factor(gram, 0.0, ErrorCode::SingularGram);
  // Solve (Z Z^T + eps I) D^T = Z X^T.
  return factor.solve(Matrix(codes * samples.transpose())).transpose();
}

double default_ridge(const CodingMatrix& codes) {
  if (codes.rows() == 0) return 0.0;
  return 1e-10 * codes.squaredNorm() / static_cast<double>(codes.rows());
}

std::pair<Matrix, CodingMatrix> normalize_atoms(const Matrix& atoms,
                                                const CodingMatrix& codes) {
  if (atoms.cols() != codes.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(atoms.cols()) + " atoms but " +
                    std::to_string(codes.rows()) + " profile rows");
  }
  Matrix d = atoms;
  CodingMatrix z = codes;
  for (Eigen::Index k = 0; k < d.cols(); ++k) {
    const double norm = d.col(k).norm();
    if (!(norm >= kDegenerateNorm)) {
      throw Error(ErrorCode::DegenerateAtom,
                  "atom " + std::to_string(k) + " has norm " +
                      std::to_string(norm),
                  static_cast<long>(k));
    }
    d.col(k) /= norm;
    z.row(k) *= norm;
  }
  return {std::move(d), std::move(z)};
}

}  // namespace lcdl::dictionary
