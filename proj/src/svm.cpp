#include "lcdl/svm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lcdl {

SvmModel SvmModel::zeros(Eigen::Index num_atoms, int num_classes) {
  return {Matrix::Zero(num_atoms, num_classes), Vector::Zero(num_classes)};
}

namespace svm {

namespace {

constexpr int kMaxRounds = 100;

void check_shapes(const CodingMatrix& codes, const Vector& targets) {
  if (codes.cols() != targets.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(targets.size()) + " targets for " +
                    std::to_string(codes.cols()) + " codes");
  }
}

std::vector<bool> margin_violators(const CodingMatrix& codes,
                                   const Vector& targets, const Vector& normal,
                                   double bias) {
  const Vector margins = targets.cwiseProduct(
      codes.transpose() * normal + Vector::Constant(codes.cols(), bias));
  std::vector<bool> active(static_cast<std::size_t>(codes.cols()));
  for (Eigen::Index i = 0; i < codes.cols(); ++i) {
    active[static_cast<std::size_t>(i)] = margins[i] < 1.0;
  }
  return active;
}

// Minimizes ||u||^2 + theta * sum_{i in A} (u^T z_i + b - y_i)^2, which equals
// the squared-hinge objective on A because y_i^2 = 1.
std::pair<Vector, double> restricted_solve(const CodingMatrix& codes,
                                           const Vector& targets,
                                           const std::vector<bool>& active,
                                           double theta) {
  const Eigen::Index k = codes.rows();
  Matrix h = Matrix::Zero(k + 1, k + 1);
  Vector rhs = Vector::Zero(k + 1);
  h.topLeftCorner(k, k).setIdentity();
  Vector aug(k + 1);
  bool any = false;
  for (Eigen::Index i = 0; i < codes.cols(); ++i) {
    if (!active[static_cast<std::size_t>(i)]) continue;
    any = true;
    aug.head(k) = codes.col(i);
    aug[k] = 1.0;
    h.noalias() += theta * aug * aug.transpose();
    rhs.noalias() += theta * targets[i] * aug;
  }
  if (!any) return {Vector::Zero(k), 0.0};
  Eigen::LDLT<Matrix> ldlt(h);
  const Vector sol = ldlt.solve(rhs);
  return {sol.head(k), sol[k]};
}

// Exact minimizer over t >= 0 of the objective along (du, db). The
// derivative is continuous, piecewise linear and nondecreasing in t.
double line_search(const CodingMatrix& codes, const Vector& targets,
                   const Vector& normal, double bias, const Vector& du,
                   double db, double theta) {
  const Vector a = Vector::Ones(codes.cols()) -
                   targets.cwiseProduct(codes.transpose() * normal +
                                        Vector::Constant(codes.cols(), bias));
  const Vector g = targets.cwiseProduct(codes.transpose() * du +
                                        Vector::Constant(codes.cols(), db));
  const double ud = normal.dot(du);
  const double dd = du.squaredNorm();
  auto slope = [&](double t) {
    double s = 2.0 * (ud + t * dd);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double h = a[i] - t * g[i];
      if (h > 0.0) s -= 2.0 * theta * g[i] * h;
    }
    return s;
  };
  if (slope(0.0) >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (slope(hi) < 0.0 && hi < 0x1.0p40) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double binary_objective(const CodingMatrix& codes, const Vector& targets,
                        const Vector& normal, double bias, double theta) {
  check_shapes(codes, targets);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < codes.cols(); ++i) {
    const double h = 1.0 - targets[i] * (normal.dot(codes.col(i)) + bias);
    if (h > 0.0) loss += h * h;
  }
  return normal.squaredNorm() + theta * loss;
}

Vector binary_gradient(const CodingMatrix& codes, const Vector& targets,
                       const Vector& normal, double bias, double theta) {
  check_shapes(codes, targets);
  const Eigen::Index k = codes.rows();
  Vector grad = Vector::Zero(k + 1);
  grad.head(k) = 2.0 * normal;
  for (Eigen::Index i = 0; i < codes.cols(); ++i) {
    const double h = 1.0 - targets[i] * (normal.dot(codes.col(i)) + bias);
    if (h > 0.0) {
      grad.head(k).noalias() -= 2.0 * theta * targets[i] * h * codes.col(i);
      grad[k] -= 2.0 * theta * targets[i] * h;
    }
  }
  return grad;
}

double kkt_tolerance(double theta, Eigen::Index num_samples) {
  return 1e-8 * (1.0 + theta * static_cast<double>(num_samples));
}

BinaryFit fit_binary_squared_hinge(const CodingMatrix& codes,
                                   const Vector& targets, double theta) {
  check_shapes(codes, targets);
  if (codes.cols() < 1) {
    throw Error(ErrorCode::EmptyInput, "no samples to fit");
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::InvalidParameter, "theta must be nonnegative");
  }

  BinaryFit fit;
  fit.normal = Vector::Zero(codes.rows());
  if (theta == 0.0) return fit;

  const double tol = kkt_tolerance(theta, codes.cols());
  fit.converged = false;
  for (fit.rounds = 1; fit.rounds <= kMaxRounds; ++fit.rounds) {
    if (binary_gradient(codes, targets, fit.normal, fit.bias, theta).norm() <= tol) {
      fit.converged = true;
      break;
    }
    const auto active = margin_violators(codes, targets, fit.normal, fit.bias);
    auto [u, b] = restricted_solve(codes, targets, active, theta);
    if (margin_violators(codes, targets, u, b) == active) {
      fit.normal = std::move(u);
      fit.bias = b;
      fit.converged = true;
      break;
    }
    const Vector du = u - fit.normal;
    const double db = b - fit.bias;
    const double t =
        line_search(codes, targets, fit.normal, fit.bias, du, db, theta);
    if (t == 0.0) break;
    fit.normal += t * du;
    fit.bias += t * db;
  }
  fit.rounds = std::min(fit.rounds, kMaxRounds);
  fit.kkt_residual =
      binary_gradient(codes, targets, fit.normal, fit.bias, theta).norm();
  if (fit.kkt_residual > tol) fit.converged = false;
  return fit;
}

MulticlassFit fit_multiclass(const CodingMatrix& codes, const Labels& labels,
                             int num_classes, double theta) {
  if (static_cast<Eigen::Index>(labels.size()) != codes.cols()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(labels.size()) + " labels for " +
                    std::to_string(codes.cols()) + " codes");
  }
  MulticlassFit out;
  out.model = SvmModel::zeros(codes.rows(), num_classes);
  out.per_class.reserve(static_cast<std::size_t>(num_classes));
  for (int c = 1; c <= num_classes; ++c) {
    BinaryFit fit = fit_binary_squared_hinge(
        codes, one_vs_all_targets(labels, c, num_classes), theta);
    out.model.normals.col(c - 1) = fit.normal;
    out.model.biases[c - 1] = fit.bias;
    out.per_class.push_back(std::move(fit));
  }
  return out;
}

Vector scores(const Vector& code, const SvmModel& model) {
  if (code.size() != model.normals.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "code has " + std::to_string(code.size()) +
                    " entries, model expects " +
                    std::to_string(model.normals.rows()));
  }
  return model.normals.transpose() * code + model.biases;
}

}  // namespace svm
}  // namespace lcdl
