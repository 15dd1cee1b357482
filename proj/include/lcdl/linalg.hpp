#pragma once

#include <optional>

#include "lcdl/model.hpp"

namespace lcdl::linalg {

/// Cholesky factorization of a symmetric positive-definite system.
///
/// Factorization is declared failed when a pivot is non-positive or when the
/// smallest squared pivot falls below 64 * eps times the largest diagonal
/// entry, which catches PSD matrices that are singular up to rounding.
class SpdFactor {
 public:
  /// Factors `a`; if that fails, retries once with
  /// `retry_ridge_scale * trace(a) / n` added to the diagonal. Throws
  /// Error(failure_code) when both attempts fail. A retry scale of zero
  /// disables the retry.
  SpdFactor(const Matrix& a, double retry_ridge_scale, ErrorCode failure_code);

  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;

  /// Ridge added on the retry path, zero when the first attempt succeeded.
  double ridge() const noexcept { return ridge_; }

 private:
  Eigen::LLT<Matrix> llt_;
  double ridge_ = 0.0;
};

/// Attempts a single factorization without any retry.
std::optional<Eigen::LLT<Matrix>> try_cholesky(const Matrix& a);

/// Ridge used by the coding solver's retry path: 1e-10 * trace / n.
inline constexpr double kStabilizingRidgeScale = 1e-10;

}  // namespace lcdl::linalg
