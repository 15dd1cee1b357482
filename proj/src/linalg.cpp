#include "lcdl/linalg.hpp"

#include <cmath>
#include <limits>

namespace lcdl::linalg {

std::optional<Eigen::LLT<Matrix>> try_cholesky(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto pivots = llt.matrixLLT().diagonal();
  if (!pivots.allFinite()) return std::nullopt;
  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();
  const double min_pivot_sq = pivots.cwiseAbs2().minCoeff();
  if (!(min_pivot_sq > 64.0 * std::numeric_limits<double>::epsilon() * max_diag)) {
    return std::nullopt;
  }
  return llt;
}

SpdFactor::SpdFactor(const Matrix& a, double retry_ridge_scale,
                     ErrorCode failure_code) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "system matrix must be square");
  }
  if (auto llt = try_cholesky(a)) {
    llt_ = std::move(*llt);
    return;
  }
  if (retry_ridge_scale > 0.0) {
    const double ridge =
        retry_ridge_scale * a.trace() / static_cast<double>(a.rows());
    if (ridge > 0.0 && std::isfinite(ridge)) {
      Matrix shifted = a;
      shifted.diagonal().array() += ridge;
      if (auto llt = try_cholesky(shifted)) {
        llt_ = std::move(*llt);
        ridge_ = ridge;
        return;
      }
    }
  }
  throw Error(failure_code, "symmetric system of order " +
                                std::to_string(a.rows()) +
                                " is not numerically positive definite");
}

Vector SpdFactor::solve(const Vector& rhs) const { return llt_.solve(rhs); }

Matrix SpdFactor::solve(const Matrix& rhs) const { return llt_.solve(rhs); }

}  // namespace lcdl::linalg
